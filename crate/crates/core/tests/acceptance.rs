//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use v2g_core::bench::stats::{mcnemar, mcnemar_counts};
use v2g_core::bench::{evaluate, generate_document, generate_suite, EvalResult, Suite};
use v2g_core::dxf::{resolve_inserts, write_document, Geometry, Primitive};
use v2g_core::geometry::Point;
use v2g_core::graph::{ComponentNode, NodeKind, PropertyGraph, WireEdge};
use v2g_core::pipeline::{parse_bytes, Ablation, PipelineConfig};
use v2g_core::planner::{default_rules, plan, plan_with_client, StructuredQuery};
use v2g_core::report::{from_structured, to_structured};
use v2g_core::topology::{
    component_count_spectral, component_count_unionfind, cycle_number, laplacian, DEFAULT_EPS, RANK_THRESHOLD,
};

const SUITE_SEED: u64 = 2024;

type Outcome = Result<String, String>;

fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize, p: f64) -> PropertyGraph {
    let n = rng.gen_range(1..=max_nodes);
    let nodes = (0..n as u32)
        .map(|i| ComponentNode::new(i, NodeKind::Generic, Point::new(i as f64, 0.0)))
        .collect();
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            if rng.gen_bool(p) {
                edges.push(WireEdge::conductor(u, v));
            }
        }
    }
    PropertyGraph::new(nodes, edges).expect("valid random graph")
}

fn corpus() -> Vec<PropertyGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..1000)
        .map(|_| {
            let p = rng.gen_range(0.1..=0.5);
            random_graph(&mut rng, 50, p)
        })
        .collect()
}

fn ac1(graphs: &[PropertyGraph]) -> Outcome {
    let start = Instant::now();
    for (i, g) in graphs.iter().enumerate() {
        let spectral = component_count_spectral(&laplacian(g), DEFAULT_EPS).map_err(|e| e.to_string())?;
        let combinatorial = component_count_unionfind(g).count;
        if spectral != combinatorial {
            return Err(format!("graph {i}: spectral {spectral} vs union-find {combinatorial}"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(30) {
        return Err(format!("took {elapsed:.1?}"));
    }
    Ok(format!("{} graphs agree in {elapsed:.1?}", graphs.len()))
}

fn ac2(graphs: &[PropertyGraph]) -> Outcome {
    for (i, g) in graphs.iter().enumerate() {
        let rank = laplacian(g).rank(RANK_THRESHOLD);
        let expected = g.nodes.len() - component_count_unionfind(g).count;
        if rank != expected {
            return Err(format!("graph {i}: rank {rank} vs |V|-c {expected}"));
        }
    }
    Ok(format!("rank(L) = |V| - c on {} graphs", graphs.len()))
}

/// Cycle-space dimension by counting even-degree edge subsets (there are
/// exactly 2^β of them).
fn brute_force_beta(g: &PropertyGraph) -> usize {
    let edges = g.simple_edges();
    let mut even = 0usize;
    for mask in 0u32..(1 << edges.len()) {
        let mut degree = vec![0u8; g.nodes.len()];
        for (k, (u, v)) in edges.iter().enumerate() {
            if mask >> k & 1 == 1 {
                degree[*u] ^= 1;
                degree[*v] ^= 1;
            }
        }
        even += usize::from(degree.iter().all(|d| *d == 0));
    }
    even.trailing_zeros() as usize
}

fn ac3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 2000 {
        let p = rng.gen_range(0.1..=0.9);
        let g = random_graph(&mut rng, 8, p);
        if g.simple_edges().len() > 8 {
            continue;
        }
        let (beta, oracle) = (cycle_number(&g), brute_force_beta(&g));
        if beta != oracle {
            return Err(format!("beta {beta} vs brute force {oracle} on {:?}", g.simple_edges()));
        }
        checked += 1;
    }
    Ok(format!("{checked} graphs with <= 8 edges match exhaustive enumeration"))
}

fn ac4(suite: &Suite, full: &EvalResult, elapsed: Duration) -> Outcome {
    let instances = suite.cases.len() + suite.instance_count();
    if full.overall != 1.0 {
        let wrong: Vec<&str> = full
            .cases
            .iter()
            .filter(|c| !c.base_correct)
            .map(|c| c.case_id.as_str())
            .collect();
        return Err(format!("overall {:.3}; wrong: {wrong:?}", full.overall));
    }
    for c in &full.cases {
        let truth = &suite.cases.iter().find(|s| s.base.case_id == c.case_id).unwrap().base.ground_truth;
        for inst in std::iter::once(&c.parent).chain(&c.variants) {
            if &inst.statuses != truth {
                return Err(format!("{} variant {:?}: verdicts differ from ground truth", c.case_id, inst.variant));
            }
            if !inst.evidence_ok {
                return Err(format!("{} variant {:?}: evidence misses the injection", c.case_id, inst.variant));
            }
        }
    }
    if elapsed > Duration::from_secs(120) {
        return Err(format!("took {elapsed:.1?}"));
    }
    Ok(format!(
        "{} base cases, {instances} instances, overall 100% in {elapsed:.1?}",
        suite.cases.len()
    ))
}

fn ac5(full: &EvalResult) -> Outcome {
    let broken: Vec<&str> = full
        .cases
        .iter()
        .filter(|c| !c.invariant())
        .map(|c| c.case_id.as_str())
        .collect();
    if broken.is_empty() {
        Ok(format!("all variants of {} cases match their parent", full.cases.len()))
    } else {
        Err(format!("variant verdicts differ for {broken:?}"))
    }
}

fn ac6(suite: &Suite, full: &EvalResult) -> Outcome {
    let run = |a| {
        evaluate(
            suite,
            &PipelineConfig {
                ablation: Some(a),
                ..PipelineConfig::default()
            },
        )
    };
    let no_gsp = run(Ablation::NoGsp);
    let no_attrs = run(Ablation::NoAttrs);
    if no_gsp.overall >= full.overall || no_attrs.overall >= full.overall {
        return Err(format!(
            "full {:.3}, no-gsp {:.3}, no-attrs {:.3}",
            full.overall, no_gsp.overall, no_attrs.overall
        ));
    }
    let test = mcnemar(&full.paired(&no_gsp)).map_err(|e| e.to_string())?;
    if test.p_value >= 0.01 {
        return Err(format!("McNemar full vs no-gsp p = {:.4}", test.p_value));
    }
    Ok(format!(
        "full {:.1}%, no-gsp {:.1}%, no-attrs {:.1}%, McNemar b={} c={} p={:.2e}",
        full.overall * 100.0,
        no_gsp.overall * 100.0,
        no_attrs.overall * 100.0,
        test.b,
        test.c,
        test.p_value
    ))
}

/// P(χ²₁ > x) = 2·P(Z > √x), by composite Simpson's rule on the normal
/// density.
fn chi2_1_sf(x: f64) -> f64 {
    let phi = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let (a, b, n) = (x.sqrt(), 40.0, 100_000);
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| phi(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    2.0 * (phi(a) + phi(b) + inner) * h / 3.0
}

fn ac7() -> Outcome {
    let m = mcnemar_counts(10, 2).map_err(|e| e.to_string())?;
    let oracle = chi2_1_sf(m.statistic);
    let ok = (m.statistic - 4.0833).abs() < 1e-3 && (m.p_value - 0.0433).abs() < 1e-3 && (m.p_value - oracle).abs() < 1e-6;
    let line = format!("statistic {:.4}, p {:.4} (oracle {oracle:.4})", m.statistic, m.p_value);
    if ok {
        Ok(line)
    } else {
        Err(line)
    }
}

fn close(a: Point, b: Point) -> bool {
    a.approx_eq(b, 1e-9)
}

fn same_geometry(a: &Geometry, b: &Geometry) -> bool {
    let num = |x: f64, y: f64| (x - y).abs() <= 1e-9;
    match (a, b) {
        (Geometry::Line { p1, p2 }, Geometry::Line { p1: q1, p2: q2 }) => close(*p1, *q1) && close(*p2, *q2),
        (Geometry::Polyline { vertices: v }, Geometry::Polyline { vertices: w }) => {
            v.len() == w.len() && v.iter().zip(w).all(|(p, q)| close(*p, *q))
        }
        (Geometry::Circle { center: c, radius: r }, Geometry::Circle { center: d, radius: s }) => {
            close(*c, *d) && num(*r, *s)
        }
        (
            Geometry::Arc { center: c, radius: r, start_angle: s0, end_angle: e0 },
            Geometry::Arc { center: d, radius: q, start_angle: s1, end_angle: e1 },
        ) => close(*c, *d) && num(*r, *q) && num(*s0, *s1) && num(*e0, *e1),
        (
            Geometry::Text { anchor: p, content: t, height: h, rotation: r },
            Geometry::Text { anchor: q, content: u, height: k, rotation: s },
        ) => close(*p, *q) && t == u && num(*h, *k) && num(*r, *s),
        (Geometry::Insert(x), Geometry::Insert(y)) => {
            x.block_name == y.block_name
                && close(x.position, y.position)
                && num(x.rotation, y.rotation)
                && num(x.scale, y.scale)
                && x.attributes == y.attributes
        }
        _ => false,
    }
}

fn same_primitive(a: &Primitive, b: &Primitive) -> bool {
    a.layer == b.layer
        && a.handle == b.handle
        && a.insert_path.len() == b.insert_path.len()
        && a.insert_path.iter().zip(&b.insert_path).all(|(x, y)| x.handle == y.handle)
        && same_geometry(&a.geometry, &b.geometry)
}

fn ac8(suite: &Suite) -> Outcome {
    let mut total = 0;
    for sc in &suite.cases {
        let b = &sc.base;
        let (intended, _) = generate_document(b.kind, b.compliant, b.seed);
        let want = resolve_inserts(&intended).map_err(|e| e.to_string())?;
        let parsed = parse_bytes(write_document(&intended).as_bytes()).map_err(|e| format!("{}: {e}", b.case_id))?;
        let got = resolve_inserts(&parsed).map_err(|e| e.to_string())?;
        if want.len() != got.len() || !want.iter().zip(&got).all(|(a, b)| same_primitive(a, b)) {
            return Err(format!("{}: resolved primitives differ after round trip", b.case_id));
        }
        total += want.len();
    }
    Ok(format!("{} cases, {total} resolved primitives within 1e-9", suite.cases.len()))
}

fn ac9() -> Outcome {
    let rules = default_rules();
    for rule in &rules {
        let fallback = plan_with_client(rule, None);
        if fallback.query != plan(rule) || !fallback.diagnostics.is_empty() {
            return Err(format!("{}: client-less plan differs from template plan", rule.id));
        }
    }
    let mp = rules.iter().find(|r| r.id == "MP").ok_or("no MP rule")?;
    let expected = StructuredQuery::new("CT_secondary", "check_grounding_uniqueness");
    if plan(mp).as_ref() != Ok(&expected) {
        return Err(format!("grounding rule planned as {:?}", plan(mp)));
    }
    Ok(format!("{} rules; grounding rule -> CT_secondary/check_grounding_uniqueness", rules.len()))
}

fn ac10() -> Outcome {
    for (name, kind, compliant) in common::GOLDEN_FIXTURES {
        let fresh = common::golden_report(name, kind, compliant);
        let reparsed = from_structured(&fresh).map_err(|e| format!("{name}: {e}"))?;
        if to_structured(&reparsed) != fresh {
            return Err(format!("{name}: serialize/parse/serialize is not byte-identical"));
        }
        common::check_golden(name, &fresh)?;
    }
    Ok(format!("{} golden reports round-trip and match", common::GOLDEN_FIXTURES.len()))
}

fn main() {
    let mut results: Vec<(&str, &str, Outcome)> = Vec::new();

    let graphs = corpus();
    results.push(("AC1", "spectral-combinatorial equivalence", ac1(&graphs)));
    results.push(("AC2", "rank identity", ac2(&graphs)));
    results.push(("AC3", "cycle number", ac3()));

    let start = Instant::now();
    let suite = generate_suite(SUITE_SEED);
    let full = evaluate(&suite, &PipelineConfig::default());
    let elapsed = start.elapsed();
    results.push(("AC4", "generator soundness", ac4(&suite, &full, elapsed)));
    results.push(("AC5", "rigid-motion invariance", ac5(&full)));
    results.push(("AC6", "ablation direction", ac6(&suite, &full)));
    results.push(("AC7", "McNemar oracle", ac7()));
    results.push(("AC8", "parser round-trip", ac8(&suite)));
    results.push(("AC9", "planner fallback equivalence", ac9()));
    results.push(("AC10", "report canonical form", ac10()));

    let mut failed = 0;
    for (id, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("{id:5} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("{id:5} FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
