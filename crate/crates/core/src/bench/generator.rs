//! Canonical CT-secondary schematic with optional injected violations.
//!
//! Layout in drawing units before the seeded global offset:
//!
//! ```text
//!   GND2?(-25,35)     CT_A(0,40) ── BRK(30,40) ── T1(60,40)
//!        ╲           │                            T2(60,30)
//!   J(-10,20) ────── CT_B(0,20) ┄┄┄ bends ┄┄┄     T3(60,20)
//!        │           CT_C(0,0)  ┄┄┄ bends ┄┄┄     T4(60,10) ── GND1(75,10)
//!        └── around the bottom ───────────────┘   T5(60,0) ── RLY(90,0)
//!                                                 T6(60,-10) ─┘
//! ```
//!
//! The J→T4 return wire visually crosses two phase wires without touching
//! them. Circuit 1 is the CT secondary; circuit 2 is the relay loop.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CheckKind, InjectionSite};
use crate::dxf::{BlockDefinition, Document, Geometry, Insert, Primitive};
use crate::geometry::Point;
use crate::report::Status;

pub const WIRE_LAYER: &str = "WIRES";
pub const TEXT_LAYER: &str = "TEXT";
pub const SYMBOL_LAYER: &str = "SYMBOLS";

const CT_POS: [(&str, f64); 3] = [("A", 40.0), ("B", 20.0), ("C", 0.0)];
const TERMINAL_X: f64 = 60.0;
const TERMINAL_Y: [f64; 6] = [40.0, 30.0, 20.0, 10.0, 0.0, -10.0];
const JUNCTION: Point = Point::new(-10.0, 20.0);

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

fn terminal(k: usize) -> Point {
    p(TERMINAL_X, TERMINAL_Y[k - 1])
}

fn ct(phase: &str) -> Point {
    let (_, y) = CT_POS.iter().find(|(ph, _)| *ph == phase).expect("phase A, B or C");
    p(0.0, *y)
}

/// Named entities so violations can edit the layout by name.
struct Sheet {
    items: Vec<(String, Primitive)>,
}

impl Sheet {
    fn push(&mut self, name: &str, geometry: Geometry, layer: &str) {
        self.items.push((name.to_string(), Primitive::new(geometry, layer, "")));
    }

    fn wire(&mut self, name: &str, points: &[Point]) {
        let geometry = if points.len() == 2 {
            Geometry::Line {
                p1: points[0],
                p2: points[1],
            }
        } else {
            Geometry::Polyline {
                vertices: points.to_vec(),
            }
        };
        self.push(name, geometry, WIRE_LAYER);
    }

    fn text(&mut self, name: &str, content: &str, at: Point) {
        self.push(
            name,
            Geometry::Text {
                anchor: at,
                content: content.to_string(),
                height: 1.5,
                rotation: 0.0,
            },
            TEXT_LAYER,
        );
    }

    fn insert(&mut self, name: &str, block: &str, at: Point, attrs: &[(&str, &str)]) {
        self.push(
            name,
            Geometry::Insert(Insert {
                block_name: block.to_string(),
                position: at,
                rotation: 0.0,
                scale: 1.0,
                attributes: attrs
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect(),
            }),
            SYMBOL_LAYER,
        );
    }

    fn remove(&mut self, name: &str) {
        let before = self.items.len();
        self.items.retain(|(n, _)| n != name);
        assert!(self.items.len() < before, "no entity named {name}");
    }

    fn get_mut(&mut self, name: &str) -> &mut Geometry {
        &mut self
            .items
            .iter_mut()
            .find(|(n, _)| n == name)
            .unwrap_or_else(|| panic!("no entity named {name}"))
            .1
            .geometry
    }

    fn set_text(&mut self, name: &str, content: &str) {
        if let Geometry::Text { content: c, .. } = self.get_mut(name) {
            *c = content.to_string();
        }
    }

    fn text_anchor(&mut self, name: &str) -> &mut Point {
        match self.get_mut(name) {
            Geometry::Text { anchor, .. } => anchor,
            _ => panic!("{name} is not a text"),
        }
    }

    fn move_insert(&mut self, name: &str, to: Point) {
        if let Geometry::Insert(ins) = self.get_mut(name) {
            ins.position = to;
        }
    }
}

fn block(name: &str, art: Vec<Geometry>) -> (String, BlockDefinition) {
    let primitives = art
        .into_iter()
        .enumerate()
        .map(|(i, g)| Primitive::new(g, SYMBOL_LAYER, format!("{name}{i}")))
        .collect();
    (
        name.to_string(),
        BlockDefinition {
            name: name.to_string(),
            base_point: Point::ORIGIN,
            primitives,
        },
    )
}

fn line(x1: f64, y1: f64, x2: f64, y2: f64) -> Geometry {
    Geometry::Line {
        p1: p(x1, y1),
        p2: p(x2, y2),
    }
}

fn blocks() -> BTreeMap<String, BlockDefinition> {
    let rect = |w: f64, h: f64| Geometry::Polyline {
        vertices: vec![p(-w, -h), p(w, -h), p(w, h), p(-w, h), p(-w, -h)],
    };
    [
        block(
            "CT",
            vec![
                Geometry::Circle {
                    center: Point::ORIGIN,
                    radius: 1.5,
                },
                line(-2.5, 0.0, 2.5, 0.0),
            ],
        ),
        block("BRK", vec![rect(1.5, 1.0), line(-1.0, -0.7, 1.0, 0.7)]),
        block(
            "GND",
            vec![
                line(0.0, 0.0, 0.0, -1.0),
                line(-1.5, -1.0, 1.5, -1.0),
                line(-1.0, -1.5, 1.0, -1.5),
                line(-0.5, -2.0, 0.5, -2.0),
            ],
        ),
        block(
            "TERM",
            vec![Geometry::Circle {
                center: Point::ORIGIN,
                radius: 1.0,
            }],
        ),
        block("RLY", vec![rect(2.0, 2.0), line(-2.0, -2.0, 2.0, 2.0)]),
    ]
    .into_iter()
    .collect()
}

fn compliant_sheet() -> Sheet {
    let mut s = Sheet { items: Vec::new() };
    for (phase, _) in CT_POS {
        let at = ct(phase);
        s.insert(&format!("CT_{phase}"), "CT", at, &[("CIRCUIT", "1")]);
        s.text(&format!("ph_{phase}"), &format!("PH:{phase}"), at.add(p(-3.0, 2.0)));
        s.text(&format!("pol_CT_{phase}"), "+", at.add(p(2.0, 3.0)));
    }
    s.insert("BRK", "BRK", p(30.0, 40.0), &[("CIRCUIT", "1")]);
    s.text("pol_BRK", "+", p(30.0, 43.0));
    for k in 1..=6 {
        let circuit = if k <= 4 { "1" } else { "2" };
        let mut attrs = vec![("CIRCUIT", circuit)];
        if k == 4 {
            attrs.push(("GROUND_OK", "true"));
        }
        s.insert(&format!("T{k}"), "TERM", terminal(k), &attrs);
        s.text(&format!("id_T{k}"), &format!("ID:X{k}"), terminal(k).add(p(3.0, 1.0)));
        if k <= 3 {
            s.text(&format!("pol_T{k}"), "+", terminal(k).add(p(3.0, -2.0)));
        }
    }
    s.insert("GND1", "GND", p(75.0, 10.0), &[]);
    s.insert("RLY", "RLY", p(90.0, 0.0), &[("CIRCUIT", "2")]);

    s.wire("w_CT_A", &[ct("A"), p(30.0, 40.0)]);
    s.wire("w_BRK_T1", &[p(30.0, 40.0), terminal(1)]);
    s.wire("w_CT_B", &[ct("B"), p(40.0, 20.0), p(40.0, 30.0), terminal(2)]);
    s.wire("w_CT_C", &[ct("C"), p(50.0, 0.0), p(50.0, 20.0), terminal(3)]);
    s.wire("n_CT_A", &[ct("A"), p(-10.0, 40.0), JUNCTION]);
    s.wire("n_CT_B", &[ct("B"), JUNCTION]);
    s.wire("n_CT_C", &[ct("C"), p(-10.0, 0.0), JUNCTION]);
    s.wire(
        "w_J_T4",
        &[JUNCTION, p(-20.0, 20.0), p(-20.0, -20.0), p(45.0, -20.0), p(45.0, 10.0), terminal(4)],
    );
    s.wire("w_T4_GND", &[terminal(4), p(75.0, 10.0)]);
    s.wire("w_T5_RLY", &[terminal(5), p(90.0, 0.0)]);
    s.wire("w_T6_RLY", &[terminal(6), p(90.0, -10.0), p(90.0, 0.0)]);
    s
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    &xs[rng.gen_range(0..xs.len())]
}

/// Expected status of every default rule for a case.
pub fn ground_truth(kind: CheckKind, compliant: bool) -> BTreeMap<String, Status> {
    let mut truth: BTreeMap<String, Status> = CheckKind::ALL
        .iter()
        .map(|k| (k.rule_id().to_string(), Status::Pass))
        .collect();
    if compliant {
        return truth;
    }
    let mut set = |ids: &[CheckKind], status| {
        for k in ids {
            truth.insert(k.rule_id().to_string(), status);
        }
    };
    use CheckKind::*;
    match kind {
        // both grounding rules run the same uniqueness check
        MP | MG => set(&[MP, MG], Status::Fail),
        // the orphaned CT fragment has no ground
        OC => set(&[OC, MP, MG], Status::Fail),
        other => set(&[other], Status::Fail),
    }
    if kind == MG {
        // no ground left anywhere in the CT region
        set(&[IL], Status::Indeterminate);
    }
    truth
}

/// Build the case document. The returned site locates the injection
/// (empty for compliant controls).
pub fn generate_document(kind: CheckKind, compliant: bool, seed: u64) -> (Document, InjectionSite) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = p(rng.gen_range(-100..=100) as f64, rng.gen_range(-100..=100) as f64);
    let mut s = compliant_sheet();
    let mut site = InjectionSite::default();
    if !compliant {
        match kind {
            CheckKind::MP => {
                let at = p(-25.0, 35.0);
                s.insert("GND2", "GND", at, &[]);
                s.wire("w_GND2", &[at, JUNCTION]);
                site.points.push(at);
            }
            CheckKind::MG => {
                s.remove("GND1");
                s.remove("w_T4_GND");
                site.points.extend(CT_POS.iter().map(|(ph, _)| ct(ph)));
                site.token = Some("g=0".into());
            }
            CheckKind::OC => {
                let phase = *pick(&mut rng, &["A", "B", "C"]);
                s.remove(&format!("n_CT_{phase}"));
                site.points.push(ct(phase));
            }
            CheckKind::PR => {
                let k = rng.gen_range(1..=3);
                s.set_text(&format!("pol_T{k}"), "-");
                site.points.push(terminal(k));
                site.token = Some("polarity".into());
            }
            CheckKind::XS => {
                s.wire("w_bridge", &[terminal(4), terminal(5)]);
                site.points.extend([terminal(4), terminal(5)]);
                site.token = Some("circuits 1 and 2".into());
            }
            CheckKind::MPH => {
                let phase = *pick(&mut rng, &["A", "B", "C"]);
                s.remove(&format!("ph_{phase}"));
                site.points.push(ct(phase));
                site.token = Some(format!("phase {phase}"));
            }
            CheckKind::MI => {
                let k = rng.gen_range(1..=6);
                s.remove(&format!("id_T{k}"));
                site.points.push(terminal(k));
            }
            CheckKind::DI => {
                let k = rng.gen_range(1..=5);
                s.set_text(&format!("id_T{}", k + 1), &format!("ID:X{k}"));
                site.points.extend([terminal(k), terminal(k + 1)]);
                site.token = Some(format!("X{k}"));
            }
            CheckKind::MA => {
                let k = rng.gen_range(1..=5);
                let (a, b) = (format!("id_T{k}"), format!("id_T{}", k + 1));
                let pa = *s.text_anchor(&a);
                let pb = *s.text_anchor(&b);
                *s.text_anchor(&a) = pb;
                *s.text_anchor(&b) = pa;
                site.points.extend([terminal(k), terminal(k + 1)]);
            }
            CheckKind::IL => {
                let at = p(30.0, 55.0);
                s.move_insert("GND1", at);
                s.remove("w_T4_GND");
                s.wire("w_GND_BRK", &[at, p(30.0, 40.0)]);
                site.points.push(at);
            }
        }
    }

    let shift = crate::geometry::Similarity::translation(offset.x, offset.y);
    let entities = s
        .items
        .into_iter()
        .enumerate()
        .map(|(i, (_, mut prim))| {
            prim.handle = format!("{:X}", 0x100 + i);
            prim.geometry = prim.geometry.transformed(&shift);
            prim
        })
        .collect();
    for pt in &mut site.points {
        *pt = shift.apply(*pt);
    }
    let doc = Document {
        blocks: blocks(),
        entities,
        skipped: BTreeMap::new(),
    };
    (doc, site)
}
