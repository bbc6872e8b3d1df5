use std::sync::Arc;

use super::reader::check_block_references;
use super::{Document, DxfError, Geometry, Insert, InsertOrigin, Primitive};
use crate::geometry::{normalize_deg, Similarity};

/// Local-to-parent transform of an insert: scale, rotate about the block
/// base point, then move the base point onto the insert position.
fn insert_transform(ins: &Insert, base: crate::geometry::Point) -> Similarity {
    Similarity {
        scale: ins.scale,
        rotation_deg: ins.rotation,
        translation: ins.position.sub(base.scale(ins.scale).rotate(ins.rotation)),
    }
}

/// Flatten every insert into world-coordinate primitives. Non-insert
/// entities pass through unchanged; expanded primitives carry the chain of
/// inserts that placed them.
pub fn resolve_inserts(doc: &Document) -> Result<Vec<Primitive>, DxfError> {
    check_block_references(doc)?;
    let mut out = Vec::new();
    for prim in &doc.entities {
        expand(doc, prim, &Similarity::IDENTITY, &[], &mut out);
    }
    Ok(out)
}

fn expand(
    doc: &Document,
    prim: &Primitive,
    world: &Similarity,
    path: &[Arc<InsertOrigin>],
    out: &mut Vec<Primitive>,
) {
    let handle = match path.last() {
        Some(parent) => format!("{}/{}", parent.handle, prim.handle),
        None => prim.handle.clone(),
    };
    let Geometry::Insert(ins) = &prim.geometry else {
        out.push(Primitive {
            geometry: prim.geometry.transformed(world),
            layer: prim.layer.clone(),
            handle,
            insert_path: path.to_vec(),
        });
        return;
    };
    let block = &doc.blocks[&ins.block_name];
    let local = world.compose(&insert_transform(ins, block.base_point));
    let origin = Arc::new(InsertOrigin {
        handle,
        block_name: ins.block_name.clone(),
        position: world.apply(ins.position),
        rotation: normalize_deg(world.rotation_deg + ins.rotation),
        scale: world.scale * ins.scale,
        attributes: ins.attributes.clone(),
    });
    let mut child_path = path.to_vec();
    child_path.push(origin);
    for child in &block.primitives {
        expand(doc, child, &local, &child_path, out);
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::dxf::BlockDefinition;
    use crate::geometry::Point;

    fn unit_line_block(base: Point) -> BlockDefinition {
        BlockDefinition {
            name: "SEG".into(),
            base_point: base,
            primitives: vec![Primitive::new(
                Geometry::Line {
                    p1: Point::new(0.0, 0.0),
                    p2: Point::new(1.0, 0.0),
                },
                "SYMBOLS",
                "B1",
            )],
        }
    }

    fn doc_with_insert(position: Point, rotation: f64, scale: f64) -> Document {
        let mut blocks = BTreeMap::new();
        blocks.insert("SEG".to_string(), unit_line_block(Point::ORIGIN));
        Document {
            blocks,
            entities: vec![Primitive::new(
                Geometry::Insert(Insert {
                    block_name: "SEG".into(),
                    position,
                    rotation,
                    scale,
                    attributes: BTreeMap::new(),
                }),
                "0",
                "I1",
            )],
            skipped: BTreeMap::new(),
        }
    }

    fn only_line(doc: &Document) -> (Point, Point) {
        let prims = resolve_inserts(doc).unwrap();
        assert_eq!(prims.len(), 1);
        match prims[0].geometry {
            Geometry::Line { p1, p2 } => (p1, p2),
            ref g => panic!("unexpected {g:?}"),
        }
    }

    #[test]
    fn pure_translation() {
        let (a, b) = only_line(&doc_with_insert(Point::new(10.0, 10.0), 0.0, 1.0));
        assert_eq!((a, b), (Point::new(10.0, 10.0), Point::new(11.0, 10.0)));
    }

    #[test]
    fn quarter_rotation() {
        let (a, b) = only_line(&doc_with_insert(Point::new(10.0, 10.0), 90.0, 1.0));
        assert_eq!((a, b), (Point::new(10.0, 10.0), Point::new(10.0, 11.0)));
    }

    #[test]
    fn scale_then_half_turn() {
        // [cos180 -sin180; sin180 cos180]·(2·(1,0)) = (-2, 0)
        let (a, b) = only_line(&doc_with_insert(Point::ORIGIN, 180.0, 2.0));
        assert!(a.approx_eq(Point::new(0.0, 0.0), 1e-12));
        assert!(b.approx_eq(Point::new(-2.0, 0.0), 1e-12));
    }

    #[test]
    fn full_turn_matches_zero() {
        for angle in [360.0, 720.0, -360.0] {
            let (a, b) = only_line(&doc_with_insert(Point::new(3.0, -4.0), angle, 1.5));
            let (a0, b0) = only_line(&doc_with_insert(Point::new(3.0, -4.0), 0.0, 1.5));
            assert!(a.approx_eq(a0, 1e-9) && b.approx_eq(b0, 1e-9));
        }
    }

    #[test]
    fn base_point_maps_to_position() {
        let mut doc = doc_with_insert(Point::new(5.0, 5.0), 90.0, 2.0);
        doc.blocks.get_mut("SEG").unwrap().base_point = Point::new(1.0, 0.0);
        let (a, b) = only_line(&doc);
        // base (1,0) sits on the insert point; (0,0) is one scaled unit behind it
        assert!(b.approx_eq(Point::new(5.0, 5.0), 1e-12));
        assert!(a.approx_eq(Point::new(5.0, 3.0), 1e-12));
    }

    #[test]
    fn nested_inserts_record_their_chain() {
        let mut doc = doc_with_insert(Point::new(1.0, 1.0), 0.0, 1.0);
        doc.blocks.insert(
            "OUTER".into(),
            BlockDefinition {
                name: "OUTER".into(),
                base_point: Point::ORIGIN,
                primitives: vec![Primitive::new(
                    Geometry::Insert(Insert {
                        block_name: "SEG".into(),
                        position: Point::new(0.0, 2.0),
                        rotation: 0.0,
                        scale: 1.0,
                        attributes: BTreeMap::new(),
                    }),
                    "0",
                    "N1",
                )],
            },
        );
        doc.entities[0].geometry = Geometry::Insert(Insert {
            block_name: "OUTER".into(),
            position: Point::new(10.0, 0.0),
            rotation: 90.0,
            scale: 1.0,
            attributes: BTreeMap::new(),
        });
        let prims = resolve_inserts(&doc).unwrap();
        assert_eq!(prims.len(), 1);
        assert_eq!(prims[0].handle, "I1/N1/B1");
        let names: Vec<&str> = prims[0]
            .insert_path
            .iter()
            .map(|o| o.block_name.as_str())
            .collect();
        assert_eq!(names, ["OUTER", "SEG"]);
        assert_eq!(prims[0].insert_path[1].position, Point::new(8.0, 0.0));
        assert_eq!(
            prims[0].geometry,
            Geometry::Line {
                p1: Point::new(8.0, 0.0),
                p2: Point::new(8.0, 1.0)
            }
        );
    }
}
