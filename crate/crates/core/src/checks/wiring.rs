use std::collections::{BTreeMap, BTreeSet};

use super::{empty, CheckContext, CheckError, CheckOutcome, Evidence};
use crate::graph::{attr, NodeId, NodeKind, PropertyGraph};
use crate::topology::{checked_components, fundamental_cycles, shortest_path};

const OPEN: &str = "check_open_circuit";
const POLARITY: &str = "check_polarity";
const SHORT: &str = "check_short_circuit";
const PHASE: &str = "check_missing_phase";
const LOOP: &str = "check_loop_anomaly";

const PHASES: [&str; 3] = ["A", "B", "C"];

/// Ordering that ignores ids and node order: junctions last, then kind and
/// position.
fn placement(sub: &PropertyGraph, id: NodeId) -> impl Ord {
    let n = sub.node(id).expect("member of the subgraph");
    (
        n.kind == NodeKind::Junction,
        n.kind,
        OrdF64(n.anchor.y),
        OrdF64(n.anchor.x),
    )
}

#[derive(PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn representative(sub: &PropertyGraph, members: &[NodeId]) -> NodeId {
    *members
        .iter()
        .min_by_key(|id| placement(sub, **id))
        .expect("fragments are non-empty")
}

/// The region must form exactly `expected_components` connected pieces
/// (default 1); each extra fragment is reported against the first.
pub fn check_open_circuit(sub: &PropertyGraph, ctx: &CheckContext) -> Result<CheckOutcome, CheckError> {
    let expected = ctx.usize_param(OPEN, "expected_components", 1)?;
    if sub.nodes.is_empty() {
        return Err(empty(OPEN, "no nodes"));
    }
    let partition = checked_components(sub, ctx.eps)?;
    if partition.count == expected {
        return Ok(CheckOutcome::passed(OPEN));
    }
    let fragments = partition.members(sub);
    let mut reps: Vec<NodeId> = fragments.iter().map(|m| representative(sub, m)).collect();
    reps.sort_by_key(|id| placement(sub, *id));
    let evidence = if partition.count > expected {
        reps[1..]
            .iter()
            .map(|&r| {
                Evidence::new(
                    vec![reps[0], r],
                    format!(
                        "open circuit: {r} is cut off from {} ({} fragments, expected {expected})",
                        reps[0], partition.count
                    ),
                )
            })
            .collect()
    } else {
        vec![Evidence::new(
            reps,
            format!("{} connected pieces where {expected} were expected", partition.count),
        )]
    };
    Ok(CheckOutcome::from_evidence(OPEN, evidence))
}

/// Product of polarity agreement over edges whose two endpoints are both
/// marked.
pub fn check_polarity(sub: &PropertyGraph, _ctx: &CheckContext) -> Result<CheckOutcome, CheckError> {
    let mut marked_edges = 0;
    let mut evidence = Vec::new();
    for e in &sub.edges {
        let (Some(a), Some(b)) = (sub.node(e.a), sub.node(e.b)) else {
            continue;
        };
        let (Some(pa), Some(pb)) = (a.attr(attr::POLARITY), b.attr(attr::POLARITY)) else {
            continue;
        };
        marked_edges += 1;
        if pa != pb {
            evidence.push(Evidence::new(
                vec![e.a, e.b],
                format!("polarity reversal: {} is {pa} but {} is {pb}", e.a, e.b),
            ));
        }
    }
    if marked_edges == 0 {
        return Err(empty(POLARITY, "no edge joins two polarity-marked nodes"));
    }
    Ok(CheckOutcome::from_evidence(POLARITY, evidence))
}

/// No connected component may mix circuit labels. Evidence is a shortest
/// path joining the two circuits.
pub fn check_short_circuit(sub: &PropertyGraph, ctx: &CheckContext) -> Result<CheckOutcome, CheckError> {
    if !sub.nodes.iter().any(|n| n.attr(attr::CIRCUIT).is_some()) {
        return Err(empty(SHORT, "no circuit labels"));
    }
    let partition = checked_components(sub, ctx.eps)?;
    let mut evidence = Vec::new();
    for members in partition.members(sub) {
        let mut circuits: BTreeMap<&str, BTreeSet<NodeId>> = BTreeMap::new();
        for id in &members {
            if let Some(c) = sub.node(*id).and_then(|n| n.attr(attr::CIRCUIT)) {
                circuits.entry(c).or_default().insert(*id);
            }
        }
        let mut labels = circuits.iter();
        let Some((first, first_nodes)) = labels.next() else {
            continue;
        };
        for (other, other_nodes) in labels {
            let path = shortest_path(sub, |id| first_nodes.contains(&id), |id| other_nodes.contains(&id))
                .expect("nodes in one component are connected");
            evidence.push(Evidence::new(
                path.clone(),
                format!(
                    "circuits {first} and {other} are shorted together along {}",
                    path.iter().map(NodeId::to_string).collect::<Vec<_>>().join("-")
                ),
            ));
        }
    }
    Ok(CheckOutcome::from_evidence(SHORT, evidence))
}

/// The phase labels present must be exactly {A, B, C}.
pub fn check_missing_phase(sub: &PropertyGraph, _ctx: &CheckContext) -> Result<CheckOutcome, CheckError> {
    if sub.nodes.is_empty() {
        return Err(empty(PHASE, "no nodes"));
    }
    let present: BTreeSet<&str> = sub.nodes.iter().filter_map(|n| n.attr(attr::PHASE)).collect();
    let unlabelled_cts: Vec<NodeId> = sub
        .nodes
        .iter()
        .filter(|n| n.kind == NodeKind::CurrentTransformer && n.attr(attr::PHASE).is_none())
        .map(|n| n.id)
        .collect();
    let mut evidence: Vec<Evidence> = PHASES
        .iter()
        .filter(|p| !present.contains(*p))
        .map(|p| Evidence::new(unlabelled_cts.clone(), format!("phase {p} is missing")))
        .collect();
    for extra in present.iter().filter(|p| !PHASES.contains(p)) {
        let nodes = sub
            .nodes
            .iter()
            .filter(|n| n.attr(attr::PHASE) == Some(*extra))
            .map(|n| n.id)
            .collect();
        evidence.push(Evidence::new(nodes, format!("unexpected phase {extra}")));
    }
    Ok(CheckOutcome::from_evidence(PHASE, evidence))
}

/// Cycle number must equal `expected_beta` (default 0, radial wiring);
/// each excess loop is reported as a fundamental cycle.
pub fn check_loop_anomaly(sub: &PropertyGraph, ctx: &CheckContext) -> Result<CheckOutcome, CheckError> {
    let expected = ctx.usize_param(LOOP, "expected_beta", 0)?;
    if sub.nodes.is_empty() {
        return Err(empty(LOOP, "no nodes"));
    }
    let c = checked_components(sub, ctx.eps)?.count;
    let beta = sub.simple_edges().len() + c - sub.nodes.len();
    if beta == expected {
        return Ok(CheckOutcome::passed(LOOP));
    }
    let evidence = if beta > expected {
        fundamental_cycles(sub)
            .into_iter()
            .take(beta - expected)
            .map(|cycle| {
                let msg = format!(
                    "unexpected loop {} (beta={beta}, expected {expected})",
                    cycle.iter().map(NodeId::to_string).collect::<Vec<_>>().join("-")
                );
                Evidence::new(cycle, msg)
            })
            .collect()
    } else {
        vec![Evidence::new(
            Vec::new(),
            format!("beta={beta} is below the expected {expected}"),
        )]
    };
    Ok(CheckOutcome::from_evidence(LOOP, evidence))
}
