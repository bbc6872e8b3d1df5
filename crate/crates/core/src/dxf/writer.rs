use std::fmt::Write as _;

use super::{Document, Geometry, Primitive};

/// Shortest representation that parses back to the identical `f64`.
fn num(v: f64) -> String {
    if v == 0.0 {
        "0.0".to_string()
    } else {
        format!("{v:?}")
    }
}

struct Out(String);

impl Out {
    fn pair(&mut self, code: u32, value: impl std::fmt::Display) {
        let _ = write!(self.0, "{code}\n{value}\n");
    }

    fn f(&mut self, code: u32, v: f64) {
        self.pair(code, num(v));
    }

    fn entity(&mut self, prim: &Primitive) {
        self.pair(0, prim.geometry.type_name());
        if !prim.handle.starts_with('~') {
            self.pair(5, &prim.handle);
        }
        self.pair(8, &prim.layer);
        match &prim.geometry {
            Geometry::Line { p1, p2 } => {
                self.f(10, p1.x);
                self.f(20, p1.y);
                self.f(11, p2.x);
                self.f(21, p2.y);
            }
            Geometry::Circle { center, radius } => {
                self.f(10, center.x);
                self.f(20, center.y);
                self.f(40, *radius);
            }
            Geometry::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => {
                self.f(10, center.x);
                self.f(20, center.y);
                self.f(40, *radius);
                self.f(50, *start_angle);
                self.f(51, *end_angle);
            }
            Geometry::Text {
                anchor,
                content,
                height,
                rotation,
            } => {
                self.f(10, anchor.x);
                self.f(20, anchor.y);
                self.f(40, *height);
                self.pair(1, content);
                self.f(50, *rotation);
            }
            Geometry::Insert(ins) => {
                self.pair(2, &ins.block_name);
                self.f(10, ins.position.x);
                self.f(20, ins.position.y);
                self.f(41, ins.scale);
                self.f(42, ins.scale);
                self.f(50, ins.rotation);
                if !ins.attributes.is_empty() {
                    self.pair(66, 1);
                    for (tag, value) in &ins.attributes {
                        self.pair(0, "ATTRIB");
                        self.pair(8, &prim.layer);
                        self.f(10, ins.position.x);
                        self.f(20, ins.position.y);
                        self.pair(1, value);
                        self.pair(2, tag);
                    }
                    self.pair(0, "SEQEND");
                }
            }
            Geometry::Polyline { vertices } => {
                self.pair(90, vertices.len());
                self.pair(70, 0);
                for v in vertices {
                    self.f(10, v.x);
                    self.f(20, v.y);
                }
            }
        }
    }
}

/// Serialize a document as ASCII DXF. Output is deterministic and parses
/// back to the same coordinates bit for bit.
pub fn write_document(doc: &Document) -> String {
    let mut out = Out(String::new());
    out.pair(0, "SECTION");
    out.pair(2, "HEADER");
    out.pair(9, "$ACADVER");
    out.pair(1, "AC1009");
    out.pair(0, "ENDSEC");

    out.pair(0, "SECTION");
    out.pair(2, "BLOCKS");
    for block in doc.blocks.values() {
        out.pair(0, "BLOCK");
        out.pair(8, "0");
        out.pair(2, &block.name);
        out.pair(70, 0);
        out.f(10, block.base_point.x);
        out.f(20, block.base_point.y);
        for prim in &block.primitives {
            out.entity(prim);
        }
        out.pair(0, "ENDBLK");
    }
    out.pair(0, "ENDSEC");

    out.pair(0, "SECTION");
    out.pair(2, "ENTITIES");
    for prim in &doc.entities {
        out.entity(prim);
    }
    out.pair(0, "ENDSEC");
    out.pair(0, "EOF");
    out.0
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use proptest::prelude::*;

    use super::*;
    use crate::dxf::{read_document, BlockDefinition, Insert};
    use crate::geometry::Point;

    fn coord() -> impl Strategy<Value = f64> {
        -1.0e4..1.0e4f64
    }

    proptest! {
        #[test]
        fn write_then_read_is_exact(
            x1 in coord(), y1 in coord(), dx in 0.001..100.0f64, y2 in coord(),
            r in 0.01..50.0f64, rot in 0.0..360.0f64, s in 0.5..2.0f64,
        ) {
            let mut blocks = BTreeMap::new();
            blocks.insert("SYM".to_string(), BlockDefinition {
                name: "SYM".into(),
                base_point: Point::new(x1 / 7.0, y1 / 3.0),
                primitives: vec![Primitive::new(Geometry::Circle { center: Point::new(0.5, 0.25), radius: r }, "SYMBOLS", "B1")],
            });
            let mut attributes = BTreeMap::new();
            attributes.insert("CIRCUIT".to_string(), "7".to_string());
            let doc = Document {
                blocks,
                entities: vec![
                    Primitive::new(Geometry::Line { p1: Point::new(x1, y1), p2: Point::new(x1 + dx, y2) }, "WIRES", "L1"),
                    Primitive::new(Geometry::Arc { center: Point::new(y1, x1), radius: r, start_angle: rot, end_angle: 359.5 }, "SYMBOLS", "A1"),
                    Primitive::new(Geometry::Text { anchor: Point::new(x1, y2), content: "ID:X1".into(), height: 2.5, rotation: rot }, "TEXT", "T1"),
                    Primitive::new(Geometry::Insert(Insert { block_name: "SYM".into(), position: Point::new(y2, x1), rotation: rot, scale: s, attributes }), "SYMBOLS", "I1"),
                    Primitive::new(Geometry::Polyline { vertices: vec![Point::new(x1, y1), Point::new(x1 + dx, y1), Point::new(x1 + dx, y1 + dx)] }, "WIRES", "P1"),
                ],
                skipped: BTreeMap::new(),
            };
            let text = write_document(&doc);
            let back = read_document(text.as_bytes()).unwrap();
            prop_assert_eq!(&back, &doc);
            prop_assert_eq!(write_document(&back), text);
        }
    }
}
