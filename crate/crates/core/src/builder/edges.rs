use std::collections::BTreeSet;

use super::nodes::{assign_ids, ground_patterns};
use super::{BuildError, BuilderConfig};
use crate::dxf::{Geometry, Primitive};
use crate::geometry::{point_segment_distance, Point};
use crate::graph::{ComponentNode, NodeId, NodeKind, WireEdge};
use crate::topology::UnionFind;

#[derive(Debug, Clone)]
struct Segment {
    handle: String,
    a: Point,
    b: Point,
}

#[derive(Debug, Default)]
struct Cluster {
    endpoints: Vec<Point>,
    /// Indices into the node list.
    anchors: Vec<usize>,
}

impl Cluster {
    fn centroid(&self) -> Point {
        let sum = self.endpoints.iter().fold(Point::ORIGIN, |acc, p| acc.add(*p));
        sum.scale(1.0 / self.endpoints.len() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Role {
    Node(NodeId),
    PassThrough,
}

fn wire_segments(primitives: &[Primitive], cfg: &BuilderConfig) -> Vec<Segment> {
    let bars: BTreeSet<String> = if cfg.patterns.geometric_ground {
        ground_patterns(primitives, cfg.tau)
            .into_iter()
            .flat_map(|g| g.bars)
            .collect()
    } else {
        BTreeSet::new()
    };
    let mut out = Vec::new();
    for prim in primitives {
        if prim.in_block() || !cfg.is_wire_layer(&prim.layer) || bars.contains(&prim.handle) {
            continue;
        }
        match &prim.geometry {
            Geometry::Line { p1, p2 } => out.push(Segment {
                handle: prim.handle.clone(),
                a: *p1,
                b: *p2,
            }),
            Geometry::Polyline { vertices } => {
                for (k, w) in vertices.windows(2).enumerate() {
                    out.push(Segment {
                        handle: format!("{}#{k}", prim.handle),
                        a: w[0],
                        b: w[1],
                    });
                }
            }
            _ => {}
        }
    }
    out
}

/// Chain wire segments into conductor edges between nodes.
///
/// Endpoints within `τ` of each other or of a node anchor merge into one
/// connection point. A connection point lying within `τ` of another
/// segment's interior splits that segment (T-meet). Unanchored points
/// where exactly two segment ends meet are bends and are walked through;
/// every other unanchored point (meets of three or more, and dangling
/// ends) becomes a Junction node. Interior crossings never connect.
///
/// Returns the nodes with final ids and the sorted, de-duplicated edges.
pub fn infer_edges(
    primitives: &[Primitive],
    mut nodes: Vec<ComponentNode>,
    cfg: &BuilderConfig,
) -> Result<(Vec<ComponentNode>, Vec<WireEdge>), BuildError> {
    cfg.validate()?;
    let tau = cfg.tau;
    let segments = wire_segments(primitives, cfg);
    let endpoint = |i: usize| {
        let s = &segments[i / 2];
        if i.is_multiple_of(2) {
            s.a
        } else {
            s.b
        }
    };
    let n_ends = segments.len() * 2;

    let mut uf = UnionFind::new(n_ends + nodes.len());
    for i in 0..n_ends {
        for j in (i + 1)..n_ends {
            if endpoint(i).distance(endpoint(j)) <= tau {
                uf.union(i, j);
            }
        }
        for (k, node) in nodes.iter().enumerate() {
            if endpoint(i).distance(node.anchor) <= tau {
                uf.union(i, n_ends + k);
            }
        }
    }

    let labels = uf.labels();
    let mut clusters: Vec<Cluster> = Vec::new();
    clusters.resize_with(uf.set_count(), Cluster::default);
    for i in 0..n_ends {
        clusters[labels[i]].endpoints.push(endpoint(i));
    }
    for k in 0..nodes.len() {
        clusters[labels[n_ends + k]].anchors.push(k);
    }

    // Representative anchor: closest to the wire ends, then by kind.
    let mut extra_edges = Vec::new();
    let mut position = Vec::with_capacity(clusters.len());
    let mut role = Vec::with_capacity(clusters.len());
    for c in &mut clusters {
        if c.anchors.is_empty() {
            position.push(c.centroid());
            role.push(None);
            continue;
        }
        if !c.endpoints.is_empty() {
            let centre = c.centroid();
            c.anchors.sort_by(|&x, &y| {
                let (nx, ny) = (&nodes[x], &nodes[y]);
                nx.anchor
                    .distance(centre)
                    .total_cmp(&ny.anchor.distance(centre))
                    .then(nx.kind.cmp(&ny.kind))
                    .then(nx.id.cmp(&ny.id))
            });
        }
        let rep = &nodes[c.anchors[0]];
        for &other in &c.anchors[1..] {
            extra_edges.push((rep.id, nodes[other].id));
        }
        position.push(rep.anchor);
        role.push(Some(Role::Node(rep.id)));
    }

    // T-meets: split segments whose interior passes a connection point.
    let seg_cluster = |i: usize| labels[i];
    let mut pieces: Vec<(String, usize, usize)> = Vec::new();
    for (s_idx, s) in segments.iter().enumerate() {
        let (ca, cb) = (seg_cluster(2 * s_idx), seg_cluster(2 * s_idx + 1));
        let mut stops: Vec<(f64, usize)> = vec![(0.0, ca), (1.0, cb)];
        for (c_idx, c) in clusters.iter().enumerate() {
            if c.endpoints.is_empty() || c_idx == ca || c_idx == cb {
                continue;
            }
            let (d, t) = point_segment_distance(position[c_idx], s.a, s.b);
            let foot = s.a.add(s.b.sub(s.a).scale(t));
            if d <= tau && foot.distance(s.a) > tau && foot.distance(s.b) > tau {
                stops.push((t, c_idx));
            }
        }
        stops.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in stops.windows(2) {
            if w[0].1 == w[1].1 {
                return Err(BuildError::DegenerateWire {
                    handle: s.handle.clone(),
                });
            }
            pieces.push((s.handle.clone(), w[0].1, w[1].1));
        }
    }

    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); clusters.len()];
    for (p, &(_, u, v)) in pieces.iter().enumerate() {
        incident[u].push(p);
        incident[v].push(p);
    }

    let mut next_id = nodes.iter().map(|n| n.id.0 + 1).max().unwrap_or(0);
    for c_idx in 0..clusters.len() {
        if role[c_idx].is_some() {
            continue;
        }
        role[c_idx] = Some(if incident[c_idx].len() == 2 {
            Role::PassThrough
        } else {
            let junction = ComponentNode::new(next_id, NodeKind::Junction, position[c_idx]);
            next_id += 1;
            let id = junction.id;
            nodes.push(junction);
            Role::Node(id)
        });
    }
    let role: Vec<Role> = role.into_iter().map(|r| r.expect("every cluster has a role")).collect();

    let mut pairs: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let mut add_pair = |u: NodeId, v: NodeId| {
        if u != v {
            pairs.insert((u.min(v), u.max(v)));
        }
    };
    for (u, v) in extra_edges {
        add_pair(u, v);
    }
    let mut visited = vec![false; pieces.len()];
    for start in 0..clusters.len() {
        let Role::Node(from) = role[start] else {
            continue;
        };
        for &first in &incident[start] {
            if visited[first] {
                continue;
            }
            visited[first] = true;
            let mut edge = first;
            let mut at = other_end(&pieces[edge], start);
            while role[at] == Role::PassThrough {
                let Some(&next) = incident[at].iter().find(|&&p| p != edge) else {
                    break;
                };
                if visited[next] {
                    break;
                }
                visited[next] = true;
                edge = next;
                at = other_end(&pieces[edge], at);
            }
            if let Role::Node(to) = role[at] {
                add_pair(from, to);
            }
        }
    }

    let remap = assign_ids(&mut nodes);
    let mut edges: Vec<WireEdge> = pairs
        .into_iter()
        .map(|(u, v)| WireEdge::conductor(remap[&u].0, remap[&v].0))
        .collect();
    edges.sort_by_key(|e| (e.a, e.b));
    Ok((nodes, edges))
}

fn other_end(piece: &(String, usize, usize), from: usize) -> usize {
    if piece.1 == from {
        piece.2
    } else {
        piece.1
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::graph::PropertyGraph;
    use crate::topology::component_count_unionfind;

    fn degrees(edges: &[WireEdge]) -> BTreeMap<NodeId, usize> {
        let mut out = BTreeMap::new();
        for e in edges {
            *out.entry(e.a).or_insert(0) += 1;
            *out.entry(e.b).or_insert(0) += 1;
        }
        out
    }

    fn wire(x1: f64, y1: f64, x2: f64, y2: f64, h: &str) -> Primitive {
        Primitive::new(
            Geometry::Line {
                p1: Point::new(x1, y1),
                p2: Point::new(x2, y2),
            },
            "WIRES",
            h,
        )
    }

    fn terminal(id: u32, x: f64, y: f64) -> ComponentNode {
        ComponentNode::new(id, NodeKind::Terminal, Point::new(x, y))
    }

    fn run(prims: &[Primitive], nodes: Vec<ComponentNode>, tau: f64) -> PropertyGraph {
        let (nodes, edges) = infer_edges(prims, nodes, &BuilderConfig::with_tau(tau)).unwrap();
        PropertyGraph::new(nodes, edges).unwrap()
    }

    fn id_at(g: &PropertyGraph, x: f64, y: f64) -> NodeId {
        g.nodes
            .iter()
            .find(|n| n.anchor.approx_eq(Point::new(x, y), 1e-9))
            .map(|n| n.id)
            .unwrap()
    }

    fn has_edge(g: &PropertyGraph, u: NodeId, v: NodeId) -> bool {
        g.edges.iter().any(|e| (e.a, e.b) == (u.min(v), u.max(v)))
    }

    #[test]
    fn endpoint_within_tolerance_connects() {
        let g = run(
            &[wire(0.0, 0.0, 5.0, 0.0, "w")],
            vec![terminal(0, 0.0, 0.0), terminal(1, 5.0005, 0.0)],
            0.001,
        );
        assert!(has_edge(&g, id_at(&g, 0.0, 0.0), id_at(&g, 5.0005, 0.0)));
        assert_eq!(g.edges.len(), 1);
    }

    #[test]
    fn endpoint_outside_tolerance_does_not_connect() {
        let g = run(
            &[wire(0.0, 0.0, 5.0, 0.0, "w")],
            vec![terminal(0, 0.0, 0.0), terminal(1, 5.01, 0.0)],
            0.001,
        );
        let (a, b) = (id_at(&g, 0.0, 0.0), id_at(&g, 5.01, 0.0));
        assert!(!has_edge(&g, a, b));
        let p = component_count_unionfind(&g);
        assert_ne!(p.assignment[&a], p.assignment[&b]);
    }

    #[test]
    fn visual_crossing_is_not_a_junction() {
        let g = run(
            &[wire(0.0, -1.0, 0.0, 1.0, "v"), wire(-1.0, 0.0, 1.0, 0.0, "h")],
            vec![],
            0.5,
        );
        assert!(g.nodes.iter().all(|n| !n.anchor.approx_eq(Point::ORIGIN, 0.5)));
        assert_eq!(g.edges.len(), 2);
        assert_eq!(component_count_unionfind(&g).count, 2);
    }

    /// Independent check: which endpoints touch another segment's interior.
    fn brute_force_t_meets(segs: &[(Point, Point)], tau: f64) -> Vec<Point> {
        let mut out = Vec::new();
        for (i, &(a, b)) in segs.iter().enumerate() {
            for p in [a, b] {
                for (j, &(c, d)) in segs.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let len = c.distance(d);
                    let dir = d.sub(c).scale(1.0 / len);
                    let along = p.sub(c).dot(dir);
                    let across = p.sub(c).cross(dir).abs();
                    if across <= tau && along > tau && along < len - tau {
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn t_meet_creates_junction_with_three_edges() {
        let segs = [
            (Point::new(0.0, 0.0), Point::new(2.0, 0.0)),
            (Point::new(1.0, 0.0), Point::new(1.0, 1.0)),
        ];
        let tau = 0.1;
        assert_eq!(brute_force_t_meets(&segs, tau), vec![Point::new(1.0, 0.0)]);
        let prims: Vec<Primitive> = segs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| wire(a.x, a.y, b.x, b.y, &format!("w{i}")))
            .collect();
        let g = run(&prims, vec![], tau);
        let meet = id_at(&g, 1.0, 0.0);
        assert_eq!(g.node(meet).unwrap().kind, NodeKind::Junction);
        assert_eq!(g.edges.len(), 3);
        assert_eq!(degrees(&g.edges)[&meet], 3);
        assert!(g.edges.iter().all(|e| e.a == meet || e.b == meet));
    }

    #[test]
    fn polyline_bends_are_walked_through() {
        let poly = Primitive::new(
            Geometry::Polyline {
                vertices: vec![
                    Point::new(0.0, 0.0),
                    Point::new(10.0, 0.0),
                    Point::new(10.0, 10.0),
                    Point::new(20.0, 10.0),
                ],
            },
            "WIRES",
            "P",
        );
        let g = run(&[poly], vec![terminal(0, 0.0, 0.0), terminal(1, 20.0, 10.0)], 0.5);
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges, vec![WireEdge::conductor(0, 1)]);
    }

    #[test]
    fn three_way_meet_at_shared_endpoint() {
        let prims = [
            wire(0.0, 0.0, 5.0, 5.0, "a"),
            wire(10.0, 0.0, 5.0, 5.2, "b"),
            wire(5.0, 10.0, 5.1, 5.0, "c"),
        ];
        let nodes = vec![terminal(0, 0.0, 0.0), terminal(1, 10.0, 0.0), terminal(2, 5.0, 10.0)];
        let g = run(&prims, nodes, 0.5);
        let junctions: Vec<_> = g.nodes.iter().filter(|n| n.kind == NodeKind::Junction).collect();
        assert_eq!(junctions.len(), 1);
        assert_eq!(g.edges.len(), 3);
        assert_eq!(degrees(&g.edges)[&junctions[0].id], 3);
    }

    #[test]
    fn zero_length_wire_is_degenerate() {
        let err = infer_edges(
            &[wire(1.0, 1.0, 1.2, 1.0, "tiny")],
            vec![],
            &BuilderConfig::with_tau(0.5),
        )
        .unwrap_err();
        assert_eq!(err, BuildError::DegenerateWire { handle: "tiny".into() });
    }

    #[test]
    fn symbol_layer_lines_are_not_wires() {
        let art = Primitive::new(
            Geometry::Line {
                p1: Point::new(0.0, 0.0),
                p2: Point::new(5.0, 0.0),
            },
            "SYMBOLS",
            "s",
        );
        let g = run(&[art], vec![terminal(0, 0.0, 0.0), terminal(1, 5.0, 0.0)], 0.5);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn ground_bars_are_not_wires() {
        let prims = [
            wire(-1.5, 0.0, 1.5, 0.0, "g1"),
            wire(-1.0, -0.5, 1.0, -0.5, "g2"),
            wire(-0.5, -1.0, 0.5, -1.0, "g3"),
            wire(0.0, 0.0, 0.0, 8.0, "lead"),
        ];
        let cfg = BuilderConfig::default();
        let nodes = super::super::extract_nodes(&prims, &cfg);
        let (nodes, edges) = infer_edges(&prims, nodes, &cfg).unwrap();
        assert_eq!(nodes.len(), 2);
        assert_eq!(nodes[0].kind, NodeKind::Ground);
        assert_eq!(edges.len(), 1);
    }

    #[test]
    fn coincident_anchors_are_tied_together() {
        let g = run(
            &[wire(0.0, 0.0, 5.0, 0.0, "w")],
            vec![terminal(0, 0.0, 0.0), terminal(1, 0.2, 0.0), terminal(2, 5.0, 0.0)],
            0.5,
        );
        assert_eq!(g.edges.len(), 2);
        assert_eq!(component_count_unionfind(&g).count, 1);
    }
}
