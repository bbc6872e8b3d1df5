use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use v2g_core::bench::{generate_document, CheckKind};
use v2g_core::builder::{build_graph, BuilderConfig};
use v2g_core::graph::{NodeId, PropertyGraph, WireEdge};
use v2g_core::pipeline::{evaluate_rules, PipelineConfig};
use v2g_core::report::EvaluationError;

fn pass_bits(g: &PropertyGraph) -> Vec<Result<bool, EvaluationError>> {
    evaluate_rules(g, &PipelineConfig::default(), None)
        .into_iter()
        .map(|e| e.outcome.map(|o| o.pass))
        .collect()
}

/// Same graph with ids permuted and nodes shuffled.
fn relabel(g: &PropertyGraph, seed: u64) -> (PropertyGraph, BTreeMap<NodeId, NodeId>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fresh: Vec<u32> = (0..g.nodes.len() as u32).map(|i| i * 3 + 100).collect();
    fresh.shuffle(&mut rng);
    let map: BTreeMap<NodeId, NodeId> = g.nodes.iter().zip(&fresh).map(|(n, &f)| (n.id, NodeId(f))).collect();
    let mut nodes = g.nodes.clone();
    for n in &mut nodes {
        n.id = map[&n.id];
    }
    nodes.shuffle(&mut rng);
    let edges = g
        .edges
        .iter()
        .map(|e| WireEdge::new(map[&e.a], map[&e.b], e.kind))
        .collect();
    (PropertyGraph::new(nodes, edges).unwrap(), map)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn verdicts_ignore_node_ids(
        kind in prop::sample::select(CheckKind::ALL.to_vec()),
        compliant in any::<bool>(),
        seed in 0u64..500,
        perm in any::<u64>(),
    ) {
        let (doc, _) = generate_document(kind, compliant, seed);
        let g = build_graph(&doc, &BuilderConfig::default()).unwrap();
        let (h, map) = relabel(&g, perm);
        let before = pass_bits(&g);
        prop_assert_eq!(&before, &pass_bits(&h));

        // evidence ids map through the bijection
        for (a, b) in evaluate_rules(&g, &PipelineConfig::default(), None)
            .into_iter()
            .zip(evaluate_rules(&h, &PipelineConfig::default(), None))
        {
            if let (Ok(a), Ok(b)) = (a.outcome, b.outcome) {
                let mut want: Vec<NodeId> = a.evidence.iter().flat_map(|e| e.nodes.iter().map(|id| map[id])).collect();
                let mut got: Vec<NodeId> = b.evidence.iter().flat_map(|e| e.nodes.clone()).collect();
                want.sort();
                got.sort();
                prop_assert_eq!(want, got);
            }
        }
    }
}

#[test]
fn checks_are_repeatable() {
    let (doc, _) = generate_document(CheckKind::XS, false, 4);
    let g = build_graph(&doc, &BuilderConfig::default()).unwrap();
    let a = evaluate_rules(&g, &PipelineConfig::default(), None);
    let b = evaluate_rules(&g, &PipelineConfig::default(), None);
    assert_eq!(a, b);
}
