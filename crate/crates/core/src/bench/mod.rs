//! Synthetic diagnostic benchmark: seeded base cases with known ground
//! truth, semantics-preserving variants, base-level scoring and the paired
//! statistics used to compare pipeline configurations.

mod augment;
mod generator;
pub mod manifest;
pub mod stats;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use augment::{augment, Family, Transform, Variant};
pub use generator::{generate_document, ground_truth, SYMBOL_LAYER, TEXT_LAYER, WIRE_LAYER};

use crate::dxf::write_document;
use crate::geometry::Point;
use crate::graph::PropertyGraph;
use crate::pipeline::{audit_bytes, PipelineConfig};
use crate::planner::Category;
use crate::report::{ComplianceReport, Status};

/// The ten diagnostic check kinds. Each one is also the id of the
/// default rule that detects it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CheckKind {
    MA,
    DI,
    MI,
    IL,
    MP,
    MG,
    OC,
    PR,
    XS,
    MPH,
}

impl CheckKind {
    pub const ALL: [CheckKind; 10] = [
        CheckKind::MA,
        CheckKind::DI,
        CheckKind::MI,
        CheckKind::IL,
        CheckKind::MP,
        CheckKind::MG,
        CheckKind::OC,
        CheckKind::PR,
        CheckKind::XS,
        CheckKind::MPH,
    ];

    pub fn rule_id(self) -> &'static str {
        match self {
            CheckKind::MA => "MA",
            CheckKind::DI => "DI",
            CheckKind::MI => "MI",
            CheckKind::IL => "IL",
            CheckKind::MP => "MP",
            CheckKind::MG => "MG",
            CheckKind::OC => "OC",
            CheckKind::PR => "PR",
            CheckKind::XS => "XS",
            CheckKind::MPH => "MPH",
        }
    }

    pub fn category(self) -> Category {
        use CheckKind::*;
        match self {
            MA | DI | MI => Category::Labeling,
            IL | MP | MG => Category::Grounding,
            OC | PR | XS | MPH => Category::Wiring,
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.rule_id())
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum BenchError {
    #[error("unknown check kind {0:?}")]
    UnknownKind(String),
}

impl FromStr for CheckKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckKind::ALL
            .into_iter()
            .find(|k| k.rule_id().eq_ignore_ascii_case(s))
            .ok_or_else(|| BenchError::UnknownKind(s.to_string()))
    }
}

/// Where the violation was injected, in drawing coordinates, plus a word
/// the evidence message must mention.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InjectionSite {
    pub points: Vec<Point>,
    pub token: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseCase {
    pub case_id: String,
    pub kind: CheckKind,
    pub compliant: bool,
    pub seed: u64,
    pub dxf: Vec<u8>,
    pub ground_truth: BTreeMap<String, Status>,
    pub site: InjectionSite,
}

impl BaseCase {
    /// Expected status of the rule this case was built to exercise.
    pub fn expected(&self) -> Status {
        self.ground_truth[self.kind.rule_id()]
    }
}

pub fn generate_case(kind: CheckKind, compliant: bool, seed: u64) -> BaseCase {
    let (doc, site) = generate_document(kind, compliant, seed);
    let tag = if compliant { "ok" } else { "bad" };
    BaseCase {
        case_id: format!("{kind}-{tag}-{seed:016x}"),
        kind,
        compliant,
        seed,
        dxf: write_document(&doc).into_bytes(),
        ground_truth: ground_truth(kind, compliant),
        site,
    }
}

/// String-kind entry point for callers holding user input.
pub fn generate_case_named(kind: &str, compliant: bool, seed: u64) -> Result<BaseCase, BenchError> {
    Ok(generate_case(kind.parse()?, compliant, seed))
}

pub const CASES_PER_KIND: usize = 6;
pub const VARIANTS_PER_CASE: usize = 15;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteCase {
    pub base: BaseCase,
    pub variants: Vec<Variant>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Suite {
    pub seed: u64,
    pub cases: Vec<SuiteCase>,
}

impl Suite {
    pub fn instance_count(&self) -> usize {
        self.cases.iter().map(|c| c.variants.len()).sum()
    }
}

fn mix(seed: u64, salt: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Default suite: six cases per kind (first half compliant), fifteen
/// variants each.
pub fn generate_suite(seed: u64) -> Suite {
    generate_suite_with(seed, CASES_PER_KIND, VARIANTS_PER_CASE)
}

pub fn generate_suite_with(seed: u64, per_kind: usize, variants: usize) -> Suite {
    let specs: Vec<(CheckKind, bool, u64)> = CheckKind::ALL
        .iter()
        .enumerate()
        .flat_map(|(k, &kind)| {
            (0..per_kind).map(move |i| (kind, i < per_kind / 2, mix(seed, (k * 1000 + i) as u64)))
        })
        .collect();
    let cases = specs
        .into_par_iter()
        .map(|(kind, compliant, case_seed)| {
            let base = generate_case(kind, compliant, case_seed);
            let variants = augment(&base, variants, mix(case_seed, 0xA11));
            SuiteCase { base, variants }
        })
        .collect();
    Suite { seed, cases }
}

/// Base-level verdict from per-variant correctness. Rotations count if any
/// one is right; every other family needs a strict majority (ties are
/// wrong); all present families must hold.
pub fn aggregate_base_level(predictions: &[(Family, bool)]) -> bool {
    let mut by_family: BTreeMap<Family, (usize, usize)> = BTreeMap::new();
    for &(family, correct) in predictions {
        let e = by_family.entry(family).or_default();
        e.0 += usize::from(correct);
        e.1 += 1;
    }
    !by_family.is_empty()
        && by_family.iter().all(|(family, &(right, total))| match family {
            Family::Rotation => right > 0,
            _ => 2 * right > total,
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    /// `None` for the unperturbed parent.
    pub variant: Option<usize>,
    pub family: Option<Family>,
    pub statuses: BTreeMap<String, Status>,
    pub error: Option<String>,
    pub correct: bool,
    /// Violating cases only: evidence points at the injection.
    pub evidence_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case_id: String,
    pub kind: CheckKind,
    pub compliant: bool,
    pub parent: InstanceResult,
    pub variants: Vec<InstanceResult>,
    pub base_correct: bool,
}

impl CaseResult {
    /// True when every variant reached the parent's verdicts.
    pub fn invariant(&self) -> bool {
        self.variants
            .iter()
            .all(|v| v.error.is_none() && v.statuses == self.parent.statuses)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub cases: Vec<CaseResult>,
    pub accuracy: BTreeMap<Category, f64>,
    pub overall: f64,
}

impl EvalResult {
    pub fn base_bits(&self) -> Vec<bool> {
        self.cases.iter().map(|c| c.base_correct).collect()
    }

    /// Per-base (self correct, other correct) pairs; both runs must cover
    /// the same suite in the same order.
    pub fn paired(&self, other: &EvalResult) -> Vec<(bool, bool)> {
        assert_eq!(self.cases.len(), other.cases.len(), "runs cover different suites");
        self.base_bits().into_iter().zip(other.base_bits()).collect()
    }
}

const SITE_RADIUS: f64 = 0.5;

fn evidence_names_site(report: &ComplianceReport, graph: &PropertyGraph, case: &BaseCase, sites: &[Point]) -> bool {
    let Some(entry) = report.entries.iter().find(|e| e.rule_id == case.kind.rule_id()) else {
        return false;
    };
    entry.evidence.iter().any(|ev| {
        let near = ev.nodes.iter().any(|id| {
            graph
                .node(*id)
                .is_some_and(|n| sites.iter().any(|s| s.distance(n.anchor) <= SITE_RADIUS))
        });
        near && case.site.token.as_ref().is_none_or(|t| ev.message.contains(t.as_str()))
    })
}

fn run_instance(
    case: &BaseCase,
    dxf: &[u8],
    transform: Option<(usize, &Transform)>,
    cfg: &PipelineConfig,
) -> InstanceResult {
    let expected = case.expected();
    let (statuses, error, evidence_ok) = match audit_bytes(dxf, &case.case_id, cfg, None) {
        Ok(audit) => {
            let statuses = audit
                .report
                .entries
                .iter()
                .map(|e| (e.rule_id.clone(), e.status))
                .collect();
            let evidence_ok = case.compliant || {
                let sites: Vec<Point> = match transform {
                    Some((_, t)) => case.site.points.iter().map(|p| t.similarity().apply(*p)).collect(),
                    None => case.site.points.clone(),
                };
                evidence_names_site(&audit.report, &audit.build.graph, case, &sites)
            };
            (statuses, None, evidence_ok)
        }
        Err(e) => (BTreeMap::new(), Some(e.to_string()), false),
    };
    let correct = error.is_none() && statuses.get(case.kind.rule_id()) == Some(&expected);
    InstanceResult {
        variant: transform.map(|(i, _)| i),
        family: transform.map(|(_, t)| t.family()),
        statuses,
        error,
        correct,
        evidence_ok,
    }
}

fn share_correct<'a>(cases: impl Iterator<Item = &'a CaseResult>) -> f64 {
    let (right, total) = cases.fold((0usize, 0usize), |(r, t), c| (r + usize::from(c.base_correct), t + 1));
    if total == 0 {
        0.0
    } else {
        right as f64 / total as f64
    }
}

/// Run the pipeline on every parent and variant. Pipeline errors count as
/// incorrect predictions instead of aborting.
pub fn evaluate(suite: &Suite, cfg: &PipelineConfig) -> EvalResult {
    let cases: Vec<CaseResult> = suite
        .cases
        .par_iter()
        .map(|sc| {
            let parent = run_instance(&sc.base, &sc.base.dxf, None, cfg);
            let variants: Vec<InstanceResult> = sc
                .variants
                .par_iter()
                .enumerate()
                .map(|(i, v)| run_instance(&sc.base, &v.dxf, Some((i, &v.transform)), cfg))
                .collect();
            let bits: Vec<(Family, bool)> = variants
                .iter()
                .map(|v| (v.family.expect("variant has a family"), v.correct))
                .collect();
            let base_correct = if bits.is_empty() {
                parent.correct
            } else {
                aggregate_base_level(&bits)
            };
            CaseResult {
                case_id: sc.base.case_id.clone(),
                kind: sc.base.kind,
                compliant: sc.base.compliant,
                parent,
                variants,
                base_correct,
            }
        })
        .collect();
    let accuracy: BTreeMap<Category, f64> = Category::ALL
        .iter()
        .map(|&cat| (cat, share_correct(cases.iter().filter(|c| c.kind.category() == cat))))
        .collect();
    let overall = share_correct(cases.iter());
    EvalResult {
        cases,
        accuracy,
        overall,
    }
}
