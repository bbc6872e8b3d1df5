//! Connectivity mathematics over property graphs: Laplacian spectra,
//! disjoint-set components, cycle number and fundamental cycles.

mod spectral;
mod unionfind;

use std::collections::{BTreeMap, VecDeque};

use crate::graph::{NodeId, PropertyGraph};

pub use spectral::{
    component_count_spectral, laplacian, matrix_rank, symmetric_eigenvalues, LaplacianMatrix,
};
pub use unionfind::UnionFind;

/// Default relative zero-eigenvalue threshold.
pub const DEFAULT_EPS: f64 = 1e-8;
/// Pivot threshold for rank computations.
pub const RANK_THRESHOLD: f64 = 1e-10;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("eigensolver did not converge within {sweeps} sweeps")]
    EigensolveFailure { sweeps: usize },
    #[error("zero-eigenvalue threshold must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("spectral component count {spectral} disagrees with union-find count {combinatorial}")]
    InconsistentSpectrum { spectral: usize, combinatorial: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPartition {
    pub count: usize,
    pub assignment: BTreeMap<NodeId, usize>,
}

impl ComponentPartition {
    /// Member ids of each component, in graph node order.
    pub fn members(&self, g: &PropertyGraph) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.count];
        for n in &g.nodes {
            out[self.assignment[&n.id]].push(n.id);
        }
        out
    }
}

/// Exact components by disjoint-set union. Component indices are numbered
/// in order of first appearance along `g.nodes`.
pub fn component_count_unionfind(g: &PropertyGraph) -> ComponentPartition {
    let mut uf = UnionFind::new(g.nodes.len());
    for (i, j) in g.simple_edges() {
        uf.union(i, j);
    }
    let labels = uf.labels();
    ComponentPartition {
        count: uf.set_count(),
        assignment: g.nodes.iter().zip(labels).map(|(n, l)| (n.id, l)).collect(),
    }
}

/// Union-find partition, cross-checked against the Laplacian's zero
/// eigenvalue multiplicity.
pub fn checked_components(g: &PropertyGraph, eps: f64) -> Result<ComponentPartition, TopologyError> {
    let partition = component_count_unionfind(g);
    let spectral = component_count_spectral(&laplacian(g), eps)?;
    if spectral != partition.count {
        return Err(TopologyError::InconsistentSpectrum {
            spectral,
            combinatorial: partition.count,
        });
    }
    Ok(partition)
}

/// `β = |E| − |V| + c` over distinct adjacent pairs.
pub fn cycle_number(g: &PropertyGraph) -> usize {
    let edges = g.simple_edges().len();
    let c = component_count_unionfind(g).count;
    edges + c - g.nodes.len()
}

/// One cycle per non-tree edge of a BFS spanning forest. Each cycle is the
/// node sequence around the loop, starting and ending at the non-tree
/// edge's endpoints.
pub fn fundamental_cycles(g: &PropertyGraph) -> Vec<Vec<NodeId>> {
    let adj = g.adjacency();
    let n = g.nodes.len();
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = u;
                    depth[v] = depth[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    let mut cycles = Vec::new();
    for (u, v) in g.simple_edges() {
        if parent[v] == u || parent[u] == v {
            continue;
        }
        let (mut a, mut b) = (u, v);
        let mut left = vec![a];
        let mut right = vec![b];
        while a != b {
            if depth[a] >= depth[b] {
                a = parent[a];
                left.push(a);
            } else {
                b = parent[b];
                right.push(b);
            }
        }
        right.pop();
        left.extend(right.into_iter().rev());
        cycles.push(left.into_iter().map(|i| g.nodes[i].id).collect());
    }
    cycles
}

/// Shortest path (by edge count) from any node in `from` to any node in
/// `to`, inclusive of both endpoints.
pub fn shortest_path(
    g: &PropertyGraph,
    from: impl Fn(NodeId) -> bool,
    to: impl Fn(NodeId) -> bool,
) -> Option<Vec<NodeId>> {
    let adj = g.adjacency();
    let n = g.nodes.len();
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for (i, node) in g.nodes.iter().enumerate() {
        if from(node.id) {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(u) = queue.pop_front() {
        if to(g.nodes[u].id) {
            let mut path = vec![g.nodes[u].id];
            let mut cur = u;
            while prev[cur] != usize::MAX {
                cur = prev[cur];
                path.push(g.nodes[cur].id);
            }
            path.reverse();
            return Some(path);
        }
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    None
}
