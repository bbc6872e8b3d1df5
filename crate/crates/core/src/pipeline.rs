//! parse → build → plan → select → check → report.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::builder::{build, BuildError, BuildOutput, BuilderConfig};
use crate::checks::{run_check, CheckContext};
use crate::dxf::{parse_document, tokenize, Document, DxfError};
use crate::graph::PropertyGraph;
use crate::planner::{
    default_rules, plan_with_client, select_region, PlannerClient, Rule, REGION_WHOLE,
};
use crate::report::{aggregate, fingerprint, ComplianceReport, RuleEvaluation, Source};
use crate::topology::DEFAULT_EPS;

/// Pipeline stages that can be switched off to measure their contribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    /// Drop every edge before checking: no graph structure.
    NoGsp,
    /// Drop every node attribute before checking.
    NoAttrs,
    /// Run every check on the whole graph instead of its planned region.
    NoRegion,
}

impl Ablation {
    pub const ALL: [Ablation; 3] = [Ablation::NoGsp, Ablation::NoAttrs, Ablation::NoRegion];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::NoGsp => "no-gsp",
            Ablation::NoAttrs => "no-attrs",
            Ablation::NoRegion => "no-region",
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ablation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ablation::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown ablation {s:?} (expected no-gsp, no-attrs or no-region)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub builder: BuilderConfig,
    pub eps: f64,
    pub rules: Vec<Rule>,
    pub ablation: Option<Ablation>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            builder: BuilderConfig::default(),
            eps: DEFAULT_EPS,
            rules: default_rules(),
            ablation: None,
        }
    }
}

impl PipelineConfig {
    pub fn fingerprint(&self) -> String {
        fingerprint(&serde_json::to_vec(self).expect("config serializes"))
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Dxf(#[from] DxfError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Audit {
    pub build: BuildOutput,
    pub report: ComplianceReport,
}

pub fn parse_bytes(bytes: &[u8]) -> Result<Document, DxfError> {
    parse_document(&tokenize(bytes)?)
}

fn ablate(g: &PropertyGraph, ablation: Option<Ablation>) -> PropertyGraph {
    match ablation {
        Some(Ablation::NoGsp) => g.with_edges_where(|_| false),
        Some(Ablation::NoAttrs) => {
            let mut g = g.clone();
            for n in &mut g.nodes {
                n.attributes.clear();
            }
            g
        }
        _ => g.clone(),
    }
}

/// Plan and check every configured rule against a built graph.
pub fn evaluate_rules(
    g: &PropertyGraph,
    cfg: &PipelineConfig,
    client: Option<&dyn PlannerClient>,
) -> Vec<RuleEvaluation> {
    let g = ablate(g, cfg.ablation);
    cfg.rules
        .iter()
        .map(|rule| {
            let planned = plan_with_client(rule, client);
            let query = match planned.query {
                Ok(q) => q,
                Err(e) => {
                    return RuleEvaluation {
                        rule: rule.clone(),
                        query: None,
                        outcome: Err(e.into()),
                        diagnostics: planned.diagnostics,
                    }
                }
            };
            let region = if cfg.ablation == Some(Ablation::NoRegion) {
                REGION_WHOLE
            } else {
                query.region.as_str()
            };
            let ctx = CheckContext {
                params: query.params.clone(),
                eps: cfg.eps,
            };
            let outcome = select_region(&g, region)
                .map_err(Into::into)
                .and_then(|sub| run_check(&query.function, &sub, &ctx).map_err(Into::into));
            RuleEvaluation {
                rule: rule.clone(),
                query: Some(query),
                outcome,
                diagnostics: planned.diagnostics,
            }
        })
        .collect()
}

pub fn audit_document(
    doc: &Document,
    schematic: &str,
    cfg: &PipelineConfig,
    client: Option<&dyn PlannerClient>,
) -> Result<Audit, PipelineError> {
    if !(cfg.eps.is_finite() && cfg.eps > 0.0) {
        return Err(PipelineError::Config(format!("eps must be > 0, got {}", cfg.eps)));
    }
    let built = build(doc, &cfg.builder)?;
    let evaluations = evaluate_rules(&built.graph, cfg, client);
    let report = aggregate(
        evaluations,
        Source {
            schematic: schematic.to_string(),
            config_fingerprint: cfg.fingerprint(),
        },
    );
    Ok(Audit {
        build: built,
        report,
    })
}

pub fn audit_bytes(
    bytes: &[u8],
    schematic: &str,
    cfg: &PipelineConfig,
    client: Option<&dyn PlannerClient>,
) -> Result<Audit, PipelineError> {
    audit_document(&parse_bytes(bytes)?, schematic, cfg, client)
}
