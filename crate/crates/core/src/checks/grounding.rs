use super::{empty, CheckContext, CheckError, CheckOutcome, Evidence};
use crate::graph::{attr, ComponentNode, NodeKind, PropertyGraph};
use crate::topology::checked_components;

const UNIQUENESS: &str = "check_grounding_uniqueness";
const LOCATION: &str = "check_grounding_location";

/// Every connected component holding a current transformer must hold
/// exactly one ground: `g = 0` is a missing ground, `g > 1` multi-point
/// grounding.
pub fn check_grounding_uniqueness(
    sub: &PropertyGraph,
    ctx: &CheckContext,
) -> Result<CheckOutcome, CheckError> {
    if !sub.nodes.iter().any(|n| n.kind == NodeKind::CurrentTransformer) {
        return Err(empty(UNIQUENESS, "no current transformer"));
    }
    let partition = checked_components(sub, ctx.eps)?;
    let mut evidence = Vec::new();
    for members in partition.members(sub) {
        let of_kind = |kind: NodeKind| {
            members
                .iter()
                .copied()
                .filter(|id| sub.node(*id).is_some_and(|n| n.kind == kind))
                .collect::<Vec<_>>()
        };
        let cts = of_kind(NodeKind::CurrentTransformer);
        if cts.is_empty() {
            continue;
        }
        let grounds = of_kind(NodeKind::Ground);
        match grounds.len() {
            1 => {}
            0 => evidence.push(Evidence::new(cts, "CT secondary circuit has no ground (g=0)")),
            g => evidence.push(Evidence::new(
                grounds,
                format!("CT secondary circuit grounded at {g} points (g={g})"),
            )),
        }
    }
    Ok(CheckOutcome::from_evidence(UNIQUENESS, evidence))
}

fn designated(n: &ComponentNode) -> bool {
    n.attr(attr::GROUND_OK)
        .is_some_and(|v| v.eq_ignore_ascii_case("true"))
}

/// Every ground must attach to a designated grounding terminal, directly
/// or through a single junction.
pub fn check_grounding_location(
    sub: &PropertyGraph,
    _ctx: &CheckContext,
) -> Result<CheckOutcome, CheckError> {
    let adj = sub.adjacency();
    let grounds: Vec<usize> = (0..sub.nodes.len())
        .filter(|&i| sub.nodes[i].kind == NodeKind::Ground)
        .collect();
    if grounds.is_empty() {
        return Err(empty(LOCATION, "no ground"));
    }
    let mut evidence = Vec::new();
    for g in grounds {
        let ok = adj[g].iter().any(|&v| {
            designated(&sub.nodes[v])
                || (sub.nodes[v].kind == NodeKind::Junction
                    && adj[v].iter().any(|&w| w != g && designated(&sub.nodes[w])))
        });
        if !ok {
            let mut nodes = vec![sub.nodes[g].id];
            nodes.extend(adj[g].iter().map(|&v| sub.nodes[v].id));
            let attached: Vec<String> = adj[g]
                .iter()
                .map(|&v| format!("{:?} {}", sub.nodes[v].kind, sub.nodes[v].id))
                .collect();
            let at = if attached.is_empty() {
                "nothing".to_string()
            } else {
                attached.join(", ")
            };
            evidence.push(Evidence::new(
                nodes,
                format!("ground {} is not at a designated grounding terminal (attached to {at})", sub.nodes[g].id),
            ));
        }
    }
    Ok(CheckOutcome::from_evidence(LOCATION, evidence))
}
