//! Rule → structured query `(region, function, params)`.
//!
//! The default planner is a keyword-template table; an external planner can
//! be plugged in through [`PlannerClient`] and is always validated, with the
//! template planner as fallback.

mod client;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::checks;
use crate::graph::{EdgeKind, NodeKind, PropertyGraph};
use crate::topology::component_count_unionfind;

pub use client::{
    plan_with_client, ClientError, HttpPlannerClient, PlanResult, PlannerClient, PlannerRequest,
    DEFAULT_TIMEOUT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Labeling,
    Grounding,
    Wiring,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Labeling, Category::Grounding, Category::Wiring];

    /// Short column label used in metric tables.
    pub fn label(self) -> &'static str {
        match self {
            Category::Labeling => "Conn.",
            Category::Grounding => "Ground.",
            Category::Wiring => "Wiring",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub id: String,
    pub text: String,
    pub category: Category,
}

impl Rule {
    pub fn new(id: &str, text: &str, category: Category) -> Self {
        Self {
            id: id.to_string(),
            text: text.to_string(),
            category,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredQuery {
    pub region: String,
    pub function: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, serde_json::Value>,
}

impl StructuredQuery {
    pub fn new(region: &str, function: &str) -> Self {
        Self {
            region: region.to_string(),
            function: function.to_string(),
            params: BTreeMap::new(),
        }
    }

    /// Reject queries that name an unregistered function or region.
    pub fn validate(&self) -> Result<(), PlanError> {
        if checks::lookup(&self.function).is_none() {
            return Err(PlanError::UnknownFunction(self.function.clone()));
        }
        if !region_is_registered(&self.region) {
            return Err(PlanError::UnknownRegion(self.region.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("no template matches rule {0}")]
    NoTemplateMatch(String),
    #[error("unknown region selector {0:?}")]
    UnknownRegion(String),
    #[error("unknown check function {0:?}")]
    UnknownFunction(String),
}

pub const REGION_WHOLE: &str = "whole";
pub const REGION_CT_SECONDARY: &str = "CT_secondary";
pub const REGION_TERMINAL_STRIP: &str = "terminal_strip";
pub const REGION_PER_CIRCUIT: &str = "per_circuit:";

/// Fixed region names; `per_circuit:<label>` is accepted for any label.
pub const REGIONS: [&str; 3] = [REGION_WHOLE, REGION_CT_SECONDARY, REGION_TERMINAL_STRIP];

pub fn region_is_registered(name: &str) -> bool {
    REGIONS.contains(&name)
        || name
            .strip_prefix(REGION_PER_CIRCUIT)
            .is_some_and(|label| !label.is_empty())
}

/// Names advertised to external planners.
pub fn region_catalog() -> Vec<String> {
    REGIONS
        .iter()
        .map(|r| r.to_string())
        .chain(std::iter::once(format!("{REGION_PER_CIRCUIT}<label>")))
        .collect()
}

pub fn select_region(g: &PropertyGraph, region: &str) -> Result<PropertyGraph, PlanError> {
    match region {
        REGION_WHOLE => Ok(g.clone()),
        REGION_CT_SECONDARY => {
            let wired = g.with_edges_where(|e| e.kind == EdgeKind::Conductor);
            let partition = component_count_unionfind(&wired);
            let keep: BTreeSet<usize> = wired
                .nodes
                .iter()
                .filter(|n| n.kind == NodeKind::CurrentTransformer)
                .map(|n| partition.assignment[&n.id])
                .collect();
            Ok(wired.induced_subgraph(|n| keep.contains(&partition.assignment[&n.id])))
        }
        REGION_TERMINAL_STRIP => {
            let index = g.index();
            let adj = g.adjacency();
            let near_terminal: BTreeSet<usize> = g
                .nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| n.kind == NodeKind::Terminal)
                .flat_map(|(i, _)| adj[i].iter().copied())
                .collect();
            Ok(g.induced_subgraph(|n| {
                n.kind == NodeKind::Terminal
                    || (n.kind == NodeKind::Junction && near_terminal.contains(&index[&n.id]))
            }))
        }
        other => match other.strip_prefix(REGION_PER_CIRCUIT) {
            Some(label) if !label.is_empty() => {
                Ok(g.induced_subgraph(|n| n.attr(crate::graph::attr::CIRCUIT) == Some(label)))
            }
            _ => Err(PlanError::UnknownRegion(other.to_string())),
        },
    }
}

/// Keyword set plus the query it yields.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub keywords: &'static [&'static str],
    pub region: &'static str,
    pub function: &'static str,
    pub params: &'static [(&'static str, u64)],
}

impl Template {
    fn query(&self) -> StructuredQuery {
        let mut q = StructuredQuery::new(self.region, self.function);
        for (k, v) in self.params {
            q.params.insert(k.to_string(), serde_json::Value::from(*v));
        }
        q
    }
}

/// Templates in tie-break order.
pub const TEMPLATES: [Template; 10] = [
    Template {
        keywords: &["ground", "grounded", "exactly", "one", "single", "multiple", "earthed"],
        region: REGION_CT_SECONDARY,
        function: "check_grounding_uniqueness",
        params: &[],
    },
    Template {
        keywords: &["location", "located", "designated", "placement", "wrong"],
        region: REGION_CT_SECONDARY,
        function: "check_grounding_location",
        params: &[],
    },
    Template {
        keywords: &["label", "missing", "unlabeled", "id"],
        region: REGION_TERMINAL_STRIP,
        function: "check_terminal_ids_missing",
        params: &[],
    },
    Template {
        keywords: &["unique", "duplicate", "distinct", "ids"],
        region: REGION_TERMINAL_STRIP,
        function: "check_terminal_ids_duplicate",
        params: &[],
    },
    Template {
        keywords: &["aligned", "alignment", "order", "misaligned", "strip", "sequence"],
        region: REGION_TERMINAL_STRIP,
        function: "check_terminal_alignment",
        params: &[],
    },
    Template {
        keywords: &["open", "continuous", "broken", "interrupted", "continuity"],
        region: REGION_CT_SECONDARY,
        function: "check_open_circuit",
        params: &[("expected_components", 1)],
    },
    Template {
        keywords: &["polarity", "reversed", "reversal"],
        region: REGION_WHOLE,
        function: "check_polarity",
        params: &[],
    },
    Template {
        keywords: &["short", "shorted", "bridged", "separate", "isolated"],
        region: REGION_WHOLE,
        function: "check_short_circuit",
        params: &[],
    },
    Template {
        keywords: &["phase", "phases", "three"],
        region: REGION_CT_SECONDARY,
        function: "check_missing_phase",
        params: &[],
    },
    Template {
        keywords: &["loop", "loops", "radial", "mesh", "cycle"],
        region: REGION_WHOLE,
        function: "check_loop_anomaly",
        params: &[("expected_beta", 0)],
    },
];

fn tokens(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Template with the largest keyword overlap; earlier templates win ties.
pub fn plan(rule: &Rule) -> Result<StructuredQuery, PlanError> {
    let words = tokens(&rule.text);
    let mut best: Option<(usize, &Template)> = None;
    for t in &TEMPLATES {
        let overlap = t.keywords.iter().filter(|k| words.contains(**k)).count();
        if overlap > 0 && best.is_none_or(|(score, _)| overlap > score) {
            best = Some((overlap, t));
        }
    }
    best.map(|(_, t)| t.query())
        .ok_or_else(|| PlanError::NoTemplateMatch(rule.id.clone()))
}

/// The ten benchmark rules, one per diagnostic check kind.
pub fn default_rules() -> Vec<Rule> {
    use Category::*;
    vec![
        Rule::new("MA", "Terminal labels must be aligned with their terminals in strip order", Labeling),
        Rule::new("DI", "All terminals must carry unique IDs", Labeling),
        Rule::new("MI", "Every terminal must carry an ID label", Labeling),
        Rule::new(
            "IL",
            "CT secondary grounding must be located at the designated grounding terminal",
            Grounding,
        ),
        Rule::new("MP", "Every CT secondary must connect to exactly one ground", Grounding),
        Rule::new("MG", "Every CT secondary circuit must be grounded", Grounding),
        Rule::new("OC", "CT secondary wiring must be continuous with no open circuit", Wiring),
        Rule::new("PR", "Connected devices must share the same polarity marking", Wiring),
        Rule::new("XS", "Separate circuits must not be shorted together", Wiring),
        Rule::new("MPH", "The CT secondary must carry all three phases A, B and C", Wiring),
    ]
}

/// Supplementary radial-wiring rule, not part of the default set.
pub fn loop_rule() -> Rule {
    Rule::new("LOOP", "Secondary wiring must be radial without loops", Category::Wiring)
}
