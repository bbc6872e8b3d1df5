//! Primitive list → property graph.
//!
//! The stages run in order: [`extract_nodes`] recognizes component symbols,
//! [`infer_edges`] chains wires into conductor edges (adding junctions) and
//! assigns final node ids, and [`attach_attributes`] maps annotation text
//! onto nodes.

mod attributes;
mod edges;
mod nodes;

use serde::{Deserialize, Serialize};

use crate::dxf::{resolve_inserts, Document, DxfError, Geometry, Primitive};
use crate::graph::{GraphError, NodeId, NodeKind, PropertyGraph};

pub use attributes::{attach_attributes, parse_annotation, Annotation, Attachment};
pub use edges::infer_edges;
pub use nodes::extract_nodes;

pub const DEFAULT_TAU: f64 = 0.5;
pub const DEFAULT_TEXT_RADIUS: f64 = 5.0;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("invalid builder configuration: {0}")]
    InvalidConfig(String),
    #[error("wire {handle} collapses to a point after endpoint merging")]
    DegenerateWire { handle: String },
    #[error("node {node} receives conflicting values for {key:?}: {existing:?} vs {incoming:?}")]
    ConflictingAttribute {
        node: NodeId,
        key: String,
        existing: String,
        incoming: String,
    },
    #[error(transparent)]
    Dxf(#[from] DxfError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Block-name patterns per node kind. A trailing `*` matches any suffix;
/// matching ignores ASCII case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternLibrary {
    pub blocks: Vec<(NodeKind, Vec<String>)>,
    /// Recognize loose three-bar ground symbols.
    pub geometric_ground: bool,
    /// Recognize loose small circles as terminals.
    pub loose_terminals: bool,
}

impl Default for PatternLibrary {
    fn default() -> Self {
        let names = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        Self {
            blocks: vec![
                (
                    NodeKind::CurrentTransformer,
                    names(&["CT", "CT_*", "CURRENT_TRANSFORMER"]),
                ),
                (NodeKind::Breaker, names(&["BRK", "BRK_*", "CB", "BREAKER"])),
                (NodeKind::Ground, names(&["GND", "GND_*", "GROUND", "EARTH"])),
                (NodeKind::Terminal, names(&["TERM", "TERM_*", "TB", "TERMINAL"])),
                (NodeKind::Generic, names(&["RLY", "RELAY", "METER", "LOAD"])),
            ],
            geometric_ground: true,
            loose_terminals: true,
        }
    }
}

impl PatternLibrary {
    pub fn kind_for_block(&self, block_name: &str) -> Option<NodeKind> {
        self.blocks.iter().find_map(|(kind, patterns)| {
            patterns
                .iter()
                .any(|p| match p.strip_suffix('*') {
                    Some(prefix) => block_name
                        .get(..prefix.len())
                        .is_some_and(|head| head.eq_ignore_ascii_case(prefix)),
                    None => p.eq_ignore_ascii_case(block_name),
                })
                .then_some(*kind)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuilderConfig {
    /// Endpoint merge tolerance in drawing units.
    pub tau: f64,
    /// Maximum distance from an annotation to the node it labels.
    pub text_radius: f64,
    pub patterns: PatternLibrary,
    /// Layers whose lines are wires. `None` means every layer not listed
    /// in `symbol_layers`.
    pub wire_layers: Option<Vec<String>>,
    pub symbol_layers: Vec<String>,
}

impl Default for BuilderConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            text_radius: DEFAULT_TEXT_RADIUS,
            patterns: PatternLibrary::default(),
            wire_layers: None,
            symbol_layers: vec!["SYMBOLS".to_string()],
        }
    }
}

impl BuilderConfig {
    pub fn with_tau(tau: f64) -> Self {
        Self {
            tau,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), BuildError> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(BuildError::InvalidConfig(format!("tau must be > 0, got {}", self.tau)));
        }
        if !(self.text_radius.is_finite() && self.text_radius > 0.0) {
            return Err(BuildError::InvalidConfig(format!(
                "text_radius must be > 0, got {}",
                self.text_radius
            )));
        }
        Ok(())
    }

    pub fn is_wire_layer(&self, layer: &str) -> bool {
        match &self.wire_layers {
            Some(layers) => layers.iter().any(|l| l == layer),
            None => !self.symbol_layers.iter().any(|l| l == layer),
        }
    }
}

/// Graph plus the annotations that could not be placed.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildOutput {
    pub graph: PropertyGraph,
    pub orphan_texts: Vec<String>,
    pub unrecognized_texts: Vec<String>,
}

/// Resolve, extract, infer and attach in one pass.
pub fn build(doc: &Document, cfg: &BuilderConfig) -> Result<BuildOutput, BuildError> {
    cfg.validate()?;
    let primitives = resolve_inserts(doc)?;
    let nodes = extract_nodes(&primitives, cfg);
    let (nodes, edges) = infer_edges(&primitives, nodes, cfg)?;
    let texts: Vec<Primitive> = primitives
        .into_iter()
        .filter(|p| !p.in_block() && matches!(p.geometry, Geometry::Text { .. }))
        .collect();
    let attached = attach_attributes(&texts, nodes, cfg)?;
    let graph = PropertyGraph::new(attached.nodes, edges)?;
    Ok(BuildOutput {
        graph,
        orphan_texts: attached.orphans,
        unrecognized_texts: attached.unrecognized,
    })
}

pub fn build_graph(doc: &Document, cfg: &BuilderConfig) -> Result<PropertyGraph, BuildError> {
    build(doc, cfg).map(|out| out.graph)
}
