use std::collections::{BTreeMap, BTreeSet};

use super::BuilderConfig;
use crate::dxf::{Geometry, Primitive};
use crate::geometry::Point;
use crate::graph::{attr, ComponentNode, NodeId, NodeKind};

/// A loose three-bar ground symbol.
#[derive(Debug, Clone, PartialEq)]
pub(super) struct GroundPattern {
    pub anchor: Point,
    pub bars: [String; 3],
}

struct Bar<'a> {
    handle: &'a str,
    a: Point,
    b: Point,
    len: f64,
}

impl Bar<'_> {
    fn dir(&self) -> Point {
        self.b.sub(self.a).scale(1.0 / self.len)
    }

    fn mid(&self) -> Point {
        self.a.midpoint(self.b)
    }
}

/// Three mutually parallel loose lines, stacked along their common normal
/// with spacing at most `2τ`, centres aligned within `τ`, lengths strictly
/// decreasing away from the longest bar. The symbol is orientation-free so
/// rotated drawings match the same way.
pub(super) fn ground_patterns(primitives: &[Primitive], tau: f64) -> Vec<GroundPattern> {
    let mut bars: Vec<Bar<'_>> = primitives
        .iter()
        .filter(|p| !p.in_block())
        .filter_map(|p| match p.geometry {
            Geometry::Line { p1, p2 } => Some(Bar {
                handle: &p.handle,
                a: p1,
                b: p2,
                len: p1.distance(p2),
            }),
            _ => None,
        })
        .collect();
    bars.sort_by(|x, y| y.len.total_cmp(&x.len).then_with(|| x.handle.cmp(y.handle)));

    let mut used = vec![false; bars.len()];
    let mut out = Vec::new();
    for top in 0..bars.len() {
        if used[top] {
            continue;
        }
        let dir = bars[top].dir();
        let normal = Point::new(-dir.y, dir.x);
        let origin = bars[top].mid();
        // (index, signed offset along normal) of parallel, aligned, shorter bars
        let stacked: Vec<(usize, f64)> = (0..bars.len())
            .filter(|&j| j != top && !used[j])
            .filter(|&j| dir.cross(bars[j].dir()).abs() <= 1e-6)
            .filter_map(|j| {
                let rel = bars[j].mid().sub(origin);
                (rel.dot(dir).abs() <= tau).then_some((j, rel.dot(normal)))
            })
            .collect();
        let found = [1.0, -1.0].into_iter().find_map(|side: f64| {
            let mut prev = (top, 0.0);
            let mut chain = Vec::new();
            for _ in 0..2 {
                let next = stacked
                    .iter()
                    .filter(|(j, off)| {
                        let step = (off - prev.1) * side;
                        step > 0.0 && step <= 2.0 * tau && bars[*j].len < bars[prev.0].len
                    })
                    .min_by(|x, y| (x.1 * side).total_cmp(&(y.1 * side)))?;
                chain.push(next.0);
                prev = *next;
            }
            Some(chain)
        });
        if let Some(chain) = found {
            used[top] = true;
            for &j in &chain {
                used[j] = true;
            }
            out.push(GroundPattern {
                anchor: origin,
                bars: [
                    bars[top].handle.to_string(),
                    bars[chain[0]].handle.to_string(),
                    bars[chain[1]].handle.to_string(),
                ],
            });
        }
    }
    out
}

/// Give nodes sequential ids ordered by `(kind, anchor.y, anchor.x)`.
/// Returns the old→new id map.
pub(super) fn assign_ids(nodes: &mut [ComponentNode]) -> BTreeMap<NodeId, NodeId> {
    nodes.sort_by(|a, b| {
        a.kind
            .cmp(&b.kind)
            .then(a.anchor.y.total_cmp(&b.anchor.y))
            .then(a.anchor.x.total_cmp(&b.anchor.x))
    });
    let mut map = BTreeMap::new();
    for (i, n) in nodes.iter_mut().enumerate() {
        let new = NodeId(i as u32);
        map.insert(n.id, new);
        n.id = new;
    }
    map
}

/// Recognize component nodes: matched block inserts first, then loose
/// ground symbols and loose terminal circles that do not coincide with an
/// insert-based node.
pub fn extract_nodes(primitives: &[Primitive], cfg: &BuilderConfig) -> Vec<ComponentNode> {
    let mut nodes: Vec<ComponentNode> = Vec::new();
    let mut seen_inserts = BTreeSet::new();
    for prim in primitives {
        for origin in &prim.insert_path {
            let Some(kind) = cfg.patterns.kind_for_block(&origin.block_name) else {
                continue;
            };
            if !seen_inserts.insert(origin.handle.clone()) {
                continue;
            }
            let mut node = ComponentNode::new(nodes.len() as u32, kind, origin.position);
            for (tag, value) in &origin.attributes {
                node.attributes.insert(tag.to_ascii_lowercase(), value.clone());
            }
            if kind == NodeKind::Ground {
                node.attributes.remove(attr::POLARITY);
            }
            nodes.push(node);
        }
    }

    let occupied = |nodes: &[ComponentNode], p: Point| {
        nodes.iter().any(|n| n.anchor.distance(p) <= cfg.tau)
    };
    if cfg.patterns.geometric_ground {
        for pattern in ground_patterns(primitives, cfg.tau) {
            if !occupied(&nodes, pattern.anchor) {
                let id = nodes.len() as u32;
                nodes.push(ComponentNode::new(id, NodeKind::Ground, pattern.anchor));
            }
        }
    }
    if cfg.patterns.loose_terminals {
        for prim in primitives.iter().filter(|p| !p.in_block()) {
            if let Geometry::Circle { center, radius } = prim.geometry {
                if radius <= 4.0 * cfg.tau && !occupied(&nodes, center) {
                    let id = nodes.len() as u32;
                    nodes.push(ComponentNode::new(id, NodeKind::Terminal, center));
                }
            }
        }
    }
    assign_ids(&mut nodes);
    nodes
}
