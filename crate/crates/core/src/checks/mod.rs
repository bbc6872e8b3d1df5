//! Verifier functions. Each maps a region subgraph to a binary outcome
//! with evidence; a region holding nothing the check can examine is an
//! [`CheckError::EmptyRegion`] rather than a pass.

mod grounding;
mod terminals;
mod wiring;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::{NodeId, PropertyGraph};
use crate::topology::{TopologyError, DEFAULT_EPS};

pub use grounding::{check_grounding_location, check_grounding_uniqueness};
pub use terminals::{
    check_terminal_alignment, check_terminal_ids_duplicate, check_terminal_ids_missing,
    natural_key,
};
pub use wiring::{
    check_loop_anomaly, check_missing_phase, check_open_circuit, check_polarity,
    check_short_circuit,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub nodes: Vec<NodeId>,
    pub message: String,
}

impl Evidence {
    pub fn new(nodes: Vec<NodeId>, message: impl Into<String>) -> Self {
        Self {
            nodes,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub function_id: String,
    pub pass: bool,
    /// Empty when `pass`; non-empty otherwise.
    pub evidence: Vec<Evidence>,
}

impl CheckOutcome {
    pub fn passed(function_id: &str) -> Self {
        Self {
            function_id: function_id.to_string(),
            pass: true,
            evidence: Vec::new(),
        }
    }

    fn from_evidence(function_id: &str, evidence: Vec<Evidence>) -> Self {
        Self {
            function_id: function_id.to_string(),
            pass: evidence.is_empty(),
            evidence,
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CheckError {
    #[error("{function_id}: region has nothing to check ({reason})")]
    EmptyRegion {
        function_id: String,
        reason: String,
    },
    #[error("{function_id}: bad parameter {key:?}: {reason}")]
    InvalidParam {
        function_id: String,
        key: String,
        reason: String,
    },
    #[error("unknown check function {0:?}")]
    UnknownFunction(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

fn empty(function_id: &str, reason: &str) -> CheckError {
    CheckError::EmptyRegion {
        function_id: function_id.to_string(),
        reason: reason.to_string(),
    }
}

/// Per-invocation inputs besides the subgraph.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckContext {
    pub params: BTreeMap<String, serde_json::Value>,
    /// Zero-eigenvalue threshold for the spectral component cross-check.
    pub eps: f64,
}

impl Default for CheckContext {
    fn default() -> Self {
        Self {
            params: BTreeMap::new(),
            eps: DEFAULT_EPS,
        }
    }
}

impl CheckContext {
    pub fn with_param(mut self, key: &str, value: serde_json::Value) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn usize_param(&self, function_id: &str, key: &str, default: usize) -> Result<usize, CheckError> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| CheckError::InvalidParam {
                    function_id: function_id.to_string(),
                    key: key.to_string(),
                    reason: format!("expected a non-negative integer, got {v}"),
                }),
        }
    }
}

pub type CheckFn = fn(&PropertyGraph, &CheckContext) -> Result<CheckOutcome, CheckError>;

/// Registry keyed by function id.
pub const REGISTRY: [(&str, CheckFn); 10] = [
    ("check_grounding_uniqueness", check_grounding_uniqueness),
    ("check_grounding_location", check_grounding_location),
    ("check_terminal_ids_missing", check_terminal_ids_missing),
    ("check_terminal_ids_duplicate", check_terminal_ids_duplicate),
    ("check_terminal_alignment", check_terminal_alignment),
    ("check_open_circuit", check_open_circuit),
    ("check_polarity", check_polarity),
    ("check_short_circuit", check_short_circuit),
    ("check_missing_phase", check_missing_phase),
    ("check_loop_anomaly", check_loop_anomaly),
];

pub fn lookup(function_id: &str) -> Option<CheckFn> {
    REGISTRY
        .iter()
        .find(|(id, _)| *id == function_id)
        .map(|(_, f)| *f)
}

pub fn function_ids() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|(id, _)| *id)
}

/// Look up and run a check by id.
pub fn run_check(
    function_id: &str,
    sub: &PropertyGraph,
    ctx: &CheckContext,
) -> Result<CheckOutcome, CheckError> {
    let f = lookup(function_id).ok_or_else(|| CheckError::UnknownFunction(function_id.to_string()))?;
    let mut outcome = f(sub, ctx)?;
    outcome.function_id = function_id.to_string();
    Ok(outcome)
}
