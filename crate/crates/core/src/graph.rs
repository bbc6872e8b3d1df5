//! The property graph `G = (V, E, X)`: typed component nodes carrying
//! attribute maps, joined by wire edges.
//!
//! Serialized form (stable key order, pretty-printed JSON):
//!
//! ```json
//! {
//!   "nodes": [{"id": 0, "kind": "CurrentTransformer", "anchor": {"x": 0.0, "y": 40.0},
//!              "attributes": {"circuit": "1", "phase": "A"}}],
//!   "edges": [{"a": 0, "b": 3, "kind": "Conductor"}]
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;

/// Attribute keys understood by the checks. Other keys are kept but ignored.
pub mod attr {
    pub const TERMINAL_ID: &str = "terminal_id";
    pub const POLARITY: &str = "polarity";
    pub const PHASE: &str = "phase";
    pub const GROUND_TYPE: &str = "ground_type";
    pub const GROUND_OK: &str = "ground_ok";
    pub const CIRCUIT: &str = "circuit";
    /// Set when a terminal label lies within reach of more than one terminal.
    pub const LABEL_AMBIGUOUS: &str = "label_ambiguous";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    CurrentTransformer,
    Breaker,
    Ground,
    Terminal,
    Junction,
    Generic,
}

impl NodeKind {
    pub const ALL: [NodeKind; 6] = [
        NodeKind::CurrentTransformer,
        NodeKind::Breaker,
        NodeKind::Ground,
        NodeKind::Terminal,
        NodeKind::Junction,
        NodeKind::Generic,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeKind {
    Conductor,
    SymbolInternal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub anchor: Point,
    pub attributes: BTreeMap<String, String>,
}

impl ComponentNode {
    pub fn new(id: u32, kind: NodeKind, anchor: Point) -> Self {
        Self {
            id: NodeId(id),
            kind,
            anchor,
            attributes: BTreeMap::new(),
        }
    }

    pub fn with_attr(mut self, key: &str, value: &str) -> Self {
        self.attributes.insert(key.to_string(), value.to_string());
        self
    }

    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attributes.get(key).map(String::as_str)
    }
}

/// Undirected edge; constructors store the smaller id in `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WireEdge {
    pub a: NodeId,
    pub b: NodeId,
    pub kind: EdgeKind,
}

impl WireEdge {
    pub fn new(u: NodeId, v: NodeId, kind: EdgeKind) -> Self {
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        Self { a, b, kind }
    }

    pub fn conductor(u: u32, v: u32) -> Self {
        Self::new(NodeId(u), NodeId(v), EdgeKind::Conductor)
    }

    pub fn other(&self, id: NodeId) -> NodeId {
        if self.a == id {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("node id {0} appears more than once")]
    DuplicateNodeId(NodeId),
    #[error("edge {0}–{1} references a missing node")]
    DanglingEdge(NodeId, NodeId),
    #[error("self-loop on {0}")]
    SelfLoop(NodeId),
    #[error("duplicate {kind:?} edge {a}–{b}")]
    DuplicateEdge { a: NodeId, b: NodeId, kind: EdgeKind },
    #[error("invalid graph document: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PropertyGraph {
    pub nodes: Vec<ComponentNode>,
    pub edges: Vec<WireEdge>,
}

impl PropertyGraph {
    /// Build a graph, checking the structural invariants.
    pub fn new(nodes: Vec<ComponentNode>, edges: Vec<WireEdge>) -> Result<Self, GraphError> {
        let g = Self {
            nodes,
            edges: edges
                .into_iter()
                .map(|e| WireEdge::new(e.a, e.b, e.kind))
                .collect(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id) {
                return Err(GraphError::DuplicateNodeId(n.id));
            }
        }
        let mut seen = BTreeSet::new();
        for e in &self.edges {
            if e.a == e.b {
                return Err(GraphError::SelfLoop(e.a));
            }
            if !ids.contains(&e.a) || !ids.contains(&e.b) {
                return Err(GraphError::DanglingEdge(e.a, e.b));
            }
            let key = WireEdge::new(e.a, e.b, e.kind);
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge {
                    a: key.a,
                    b: key.b,
                    kind: e.kind,
                });
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Option<&ComponentNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Map from node id to its position in `nodes`.
    pub fn index(&self) -> HashMap<NodeId, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect()
    }

    /// Distinct neighbour positions per node, ignoring edge kind.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let index = self.index();
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.nodes.len()];
        for e in &self.edges {
            let (i, j) = (index[&e.a], index[&e.b]);
            adj[i].insert(j);
            adj[j].insert(i);
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    /// Distinct unordered node pairs joined by at least one edge.
    pub fn simple_edges(&self) -> Vec<(usize, usize)> {
        let index = self.index();
        let pairs: BTreeSet<(usize, usize)> = self
            .edges
            .iter()
            .map(|e| {
                let (i, j) = (index[&e.a], index[&e.b]);
                (i.min(j), i.max(j))
            })
            .collect();
        pairs.into_iter().collect()
    }

    /// Nodes satisfying `keep`, and the edges with both endpoints kept.
    pub fn induced_subgraph(&self, keep: impl Fn(&ComponentNode) -> bool) -> PropertyGraph {
        let nodes: Vec<ComponentNode> = self.nodes.iter().filter(|n| keep(n)).cloned().collect();
        let kept: BTreeSet<NodeId> = nodes.iter().map(|n| n.id).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| kept.contains(&e.a) && kept.contains(&e.b))
            .copied()
            .collect();
        PropertyGraph { nodes, edges }
    }

    pub fn with_edges_where(&self, keep: impl Fn(&WireEdge) -> bool) -> PropertyGraph {
        PropertyGraph {
            nodes: self.nodes.clone(),
            edges: self.edges.iter().filter(|e| keep(e)).copied().collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("graph serialization is infallible");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let g: PropertyGraph =
            serde_json::from_str(text).map_err(|e| GraphError::Format(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> PropertyGraph {
        PropertyGraph::new(
            (0..3)
                .map(|i| ComponentNode::new(i, NodeKind::Generic, Point::new(i as f64, 0.0)))
                .collect(),
            vec![
                WireEdge::conductor(0, 1),
                WireEdge::conductor(1, 2),
                WireEdge::conductor(2, 0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn induced_keep_all_is_identity() {
        let g = triangle();
        assert_eq!(g.induced_subgraph(|_| true), g);
    }

    #[test]
    fn induced_keep_none_is_empty() {
        assert_eq!(triangle().induced_subgraph(|_| false), PropertyGraph::default());
    }

    #[test]
    fn induced_two_of_triangle_is_path() {
        let p2 = triangle().induced_subgraph(|n| n.id != NodeId(2));
        assert_eq!(p2.nodes.len(), 2);
        assert_eq!(p2.edges, vec![WireEdge::conductor(0, 1)]);
    }

    #[test]
    fn invariants_enforced() {
        let n = |i| ComponentNode::new(i, NodeKind::Generic, Point::ORIGIN);
        assert_eq!(
            PropertyGraph::new(vec![n(0), n(0)], vec![]),
            Err(GraphError::DuplicateNodeId(NodeId(0)))
        );
        assert_eq!(
            PropertyGraph::new(vec![n(0)], vec![WireEdge::conductor(0, 0)]),
            Err(GraphError::SelfLoop(NodeId(0)))
        );
        assert!(matches!(
            PropertyGraph::new(vec![n(0)], vec![WireEdge::conductor(0, 1)]),
            Err(GraphError::DanglingEdge(..))
        ));
        assert!(matches!(
            PropertyGraph::new(
                vec![n(0), n(1)],
                vec![WireEdge::conductor(0, 1), WireEdge::conductor(1, 0)]
            ),
            Err(GraphError::DuplicateEdge { .. })
        ));
    }

    #[test]
    fn json_is_canonical() {
        let mut g = triangle();
        g.nodes[0].attributes.insert("phase".into(), "A".into());
        g.nodes[0].attributes.insert("circuit".into(), "1".into());
        let text = g.to_json();
        let back = PropertyGraph::from_json(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_json(), text);
        assert!(text.find("\"circuit\"").unwrap() < text.find("\"phase\"").unwrap());
    }
}
