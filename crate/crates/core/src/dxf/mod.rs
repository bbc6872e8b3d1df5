//! ASCII DXF subset: tokenizer, section parser, block resolution and writer.
//!
//! Supported sections are `HEADER` (skipped), `BLOCKS` and `ENTITIES`; other
//! sections are skipped whole. Supported entities are `LINE`, `ARC`,
//! `CIRCLE`, `TEXT`, `INSERT` (with trailing `ATTRIB`/`SEQEND`) and
//! `LWPOLYLINE`. Anything else is skipped and counted in
//! [`Document::skipped`].
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | entity / record type |
//! | 1    | text value (`TEXT`, `ATTRIB`) |
//! | 2    | block name, attribute tag, section name |
//! | 5    | handle |
//! | 8    | layer |
//! | 10/20 | first point x/y (repeated per vertex for `LWPOLYLINE`) |
//! | 11/21 | second point x/y |
//! | 30/31 | z, must be ≈ 0 |
//! | 40   | radius or text height |
//! | 41/42 | insert scale (uniform, 42 must equal 41) |
//! | 50   | rotation or arc start angle (degrees) |
//! | 51   | arc end angle (degrees) |
//! | 66   | insert has attributes follow |
//! | 70   | flags (`LWPOLYLINE` bit 1 = closed) |
//! | 90   | vertex count (`LWPOLYLINE`) |

mod reader;
mod resolve;
mod writer;

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::geometry::{normalize_deg, Point, Similarity};

pub use reader::{parse_document, read_document, tokenize};
pub use resolve::resolve_inserts;
pub use writer::write_document;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum DxfError {
    #[error("input is not text (invalid UTF-8 near byte {offset})")]
    NotText { offset: usize },
    #[error("binary DXF is not supported")]
    BinaryDxf,
    #[error("truncated stream: {lines} lines cannot form code/value pairs")]
    OddLineCount { lines: usize },
    #[error("line {line}: group code {raw:?} is not a non-negative integer")]
    NonIntegerCode { line: usize, raw: String },
    #[error("INSERT references undefined block {0:?}")]
    UnresolvedBlock(String),
    #[error("block {0:?} inserts itself through its definition chain")]
    RecursiveBlock(String),
    #[error("entity {handle}: {reason}")]
    MalformedEntity { handle: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupCodePair<'a> {
    pub code: u32,
    pub value: &'a str,
    /// 1-based line number of the code line.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Insert {
    pub block_name: String,
    pub position: Point,
    pub rotation: f64,
    pub scale: f64,
    pub attributes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Line {
        p1: Point,
        p2: Point,
    },
    Arc {
        center: Point,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
    },
    Circle {
        center: Point,
        radius: f64,
    },
    Text {
        anchor: Point,
        content: String,
        height: f64,
        rotation: f64,
    },
    Insert(Insert),
    Polyline {
        vertices: Vec<Point>,
    },
}

impl Geometry {
    pub fn type_name(&self) -> &'static str {
        match self {
            Geometry::Line { .. } => "LINE",
            Geometry::Arc { .. } => "ARC",
            Geometry::Circle { .. } => "CIRCLE",
            Geometry::Text { .. } => "TEXT",
            Geometry::Insert(_) => "INSERT",
            Geometry::Polyline { .. } => "LWPOLYLINE",
        }
    }

    pub fn transformed(&self, t: &Similarity) -> Geometry {
        match self {
            Geometry::Line { p1, p2 } => Geometry::Line {
                p1: t.apply(*p1),
                p2: t.apply(*p2),
            },
            Geometry::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => Geometry::Arc {
                center: t.apply(*center),
                radius: radius * t.scale,
                start_angle: normalize_deg(start_angle + t.rotation_deg),
                end_angle: normalize_deg(end_angle + t.rotation_deg),
            },
            Geometry::Circle { center, radius } => Geometry::Circle {
                center: t.apply(*center),
                radius: radius * t.scale,
            },
            Geometry::Text {
                anchor,
                content,
                height,
                rotation,
            } => Geometry::Text {
                anchor: t.apply(*anchor),
                content: content.clone(),
                height: height * t.scale,
                rotation: normalize_deg(rotation + t.rotation_deg),
            },
            Geometry::Insert(ins) => Geometry::Insert(Insert {
                block_name: ins.block_name.clone(),
                position: t.apply(ins.position),
                rotation: normalize_deg(ins.rotation + t.rotation_deg),
                scale: ins.scale * t.scale,
                attributes: ins.attributes.clone(),
            }),
            Geometry::Polyline { vertices } => Geometry::Polyline {
                vertices: vertices.iter().map(|v| t.apply(*v)).collect(),
            },
        }
    }

    /// Check the per-kind invariants; `Err` carries the reason.
    pub fn validate(&self) -> Result<(), String> {
        let finite = |p: &Point| p.x.is_finite() && p.y.is_finite();
        match self {
            Geometry::Line { p1, p2 } => {
                if !finite(p1) || !finite(p2) {
                    return Err("non-finite coordinate".into());
                }
                if p1 == p2 {
                    return Err("zero-length line".into());
                }
            }
            Geometry::Arc { radius, .. } | Geometry::Circle { radius, .. } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(format!("radius must be positive, got {radius}"));
                }
            }
            Geometry::Text { height, .. } => {
                if !(height.is_finite() && *height >= 0.0) {
                    return Err(format!("invalid text height {height}"));
                }
            }
            Geometry::Insert(ins) => {
                if ins.block_name.is_empty() {
                    return Err("INSERT without block name".into());
                }
                if !(ins.scale.is_finite() && ins.scale > 0.0) {
                    return Err(format!("insert scale must be positive, got {}", ins.scale));
                }
            }
            Geometry::Polyline { vertices } => {
                if vertices.len() < 2 {
                    return Err("polyline needs at least two vertices".into());
                }
                if vertices.windows(2).any(|w| w[0] == w[1]) {
                    return Err("polyline repeats a vertex".into());
                }
            }
        }
        Ok(())
    }
}

/// The insert that placed a resolved primitive, in world coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct InsertOrigin {
    pub handle: String,
    pub block_name: String,
    pub position: Point,
    pub rotation: f64,
    pub scale: f64,
    pub attributes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    pub geometry: Geometry,
    pub layer: String,
    pub handle: String,
    /// Chain of inserts that produced this primitive, outermost first.
    /// Empty for model-space entities.
    pub insert_path: Vec<Arc<InsertOrigin>>,
}

impl Primitive {
    pub fn new(geometry: Geometry, layer: impl Into<String>, handle: impl Into<String>) -> Self {
        Self {
            geometry,
            layer: layer.into(),
            handle: handle.into(),
            insert_path: Vec::new(),
        }
    }

    pub fn in_block(&self) -> bool {
        !self.insert_path.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDefinition {
    pub name: String,
    pub base_point: Point,
    pub primitives: Vec<Primitive>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub blocks: BTreeMap<String, BlockDefinition>,
    pub entities: Vec<Primitive>,
    /// Unsupported entity types encountered, with counts.
    pub skipped: BTreeMap<String, usize>,
}

impl Document {
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty() && self.entities.is_empty()
    }

    /// Apply `t` to every model-space entity. Block definitions are local
    /// and stay untouched.
    pub fn transformed(&self, t: &Similarity) -> Document {
        Document {
            blocks: self.blocks.clone(),
            entities: self
                .entities
                .iter()
                .map(|p| Primitive {
                    geometry: p.geometry.transformed(t),
                    layer: p.layer.clone(),
                    handle: p.handle.clone(),
                    insert_path: p.insert_path.clone(),
                })
                .collect(),
            skipped: self.skipped.clone(),
        }
    }
}
