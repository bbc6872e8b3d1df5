use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::generator::WIRE_LAYER;
use super::BaseCase;
use crate::dxf::{write_document, Document, Geometry};
use crate::geometry::{Point, Similarity};
use crate::pipeline::parse_bytes;

/// Upper bound on wire-endpoint jitter. Two jittered endpoints stay within
/// 0.1 of each other, well inside the default snapping tolerance.
pub const MAX_JITTER: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Rotation,
    Translation,
    Scale,
    Noise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Transform {
    Rotation { degrees: f64 },
    Translation { dx: f64, dy: f64 },
    Scale { factor: f64 },
    Noise { amplitude: f64, seed: u64 },
}

impl Transform {
    pub fn family(&self) -> Family {
        match self {
            Transform::Rotation { .. } => Family::Rotation,
            Transform::Translation { .. } => Family::Translation,
            Transform::Scale { .. } => Family::Scale,
            Transform::Noise { .. } => Family::Noise,
        }
    }

    /// Rigid part of the transform; noise has none.
    pub fn similarity(&self) -> Similarity {
        match *self {
            Transform::Rotation { degrees } => Similarity::rotation(degrees),
            Transform::Translation { dx, dy } => Similarity::translation(dx, dy),
            Transform::Scale { factor } => Similarity::scaling(factor),
            Transform::Noise { .. } => Similarity::IDENTITY,
        }
    }

    pub fn apply(&self, doc: &Document) -> Document {
        match *self {
            Transform::Noise { amplitude, seed } => jitter(doc, amplitude, seed),
            _ => doc.transformed(&self.similarity()),
        }
    }
}

fn jitter(doc: &Document, amplitude: f64, seed: u64) -> Document {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nudge = |p: &mut Point| {
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = rng.gen_range(0.0..=amplitude);
        *p = p.add(Point::new(r * angle.cos(), r * angle.sin()));
    };
    let mut out = doc.clone();
    for prim in out.entities.iter_mut().filter(|p| p.layer == WIRE_LAYER) {
        match &mut prim.geometry {
            Geometry::Line { p1, p2 } => {
                nudge(p1);
                nudge(p2);
            }
            Geometry::Polyline { vertices } => vertices.iter_mut().for_each(&mut nudge),
            _ => {}
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub parent: String,
    pub transform: Transform,
    pub dxf: Vec<u8>,
}

/// `count` variants: the three quarter-turn rotations first, then
/// translation, scale and noise in turn.
pub fn augment(base: &BaseCase, count: usize, seed: u64) -> Vec<Variant> {
    let doc = parse_bytes(&base.dxf).expect("generated DXF parses");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transforms: Vec<Transform> = [90.0, 180.0, 270.0]
        .into_iter()
        .map(|degrees| Transform::Rotation { degrees })
        .take(count)
        .collect();
    for i in 0..count.saturating_sub(3) {
        transforms.push(match i % 3 {
            0 => Transform::Translation {
                dx: rng.gen_range(-500.0..500.0),
                dy: rng.gen_range(-500.0..500.0),
            },
            1 => Transform::Scale {
                factor: rng.gen_range(0.9..=1.1),
            },
            _ => Transform::Noise {
                amplitude: MAX_JITTER,
                seed: rng.gen(),
            },
        });
    }
    transforms
        .into_iter()
        .map(|transform| Variant {
            parent: base.case_id.clone(),
            transform,
            dxf: write_document(&transform.apply(&doc)).into_bytes(),
        })
        .collect()
}
