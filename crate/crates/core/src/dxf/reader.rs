use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{BlockDefinition, Document, DxfError, Geometry, GroupCodePair, Insert, Primitive};
use crate::geometry::Point;

const BINARY_SENTINEL: &[u8] = b"AutoCAD Binary DXF";
const Z_TOLERANCE: f64 = 1e-9;

/// Split an ASCII DXF stream into code/value pairs.
pub fn tokenize(bytes: &[u8]) -> Result<Vec<GroupCodePair<'_>>, DxfError> {
    if bytes.starts_with(BINARY_SENTINEL) {
        return Err(DxfError::BinaryDxf);
    }
    let text = std::str::from_utf8(bytes).map_err(|e| DxfError::NotText {
        offset: e.valid_up_to(),
    })?;
    let mut lines: Vec<&str> = text.split('\n').collect();
    if text.ends_with('\n') {
        lines.pop();
    }
    if text.is_empty() {
        lines.clear();
    }
    if !lines.len().is_multiple_of(2) {
        return Err(DxfError::OddLineCount { lines: lines.len() });
    }
    lines
        .chunks_exact(2)
        .enumerate()
        .map(|(i, chunk)| {
            let line = 2 * i + 1;
            let raw = chunk[0].trim();
            let code = raw.parse::<u32>().map_err(|_| DxfError::NonIntegerCode {
                line,
                raw: raw.to_string(),
            })?;
            Ok(GroupCodePair {
                code,
                value: chunk[1].trim(),
                line,
            })
        })
        .collect()
}

/// Tokenize and parse in one step.
pub fn read_document(bytes: &[u8]) -> Result<Document, DxfError> {
    parse_document(&tokenize(bytes)?)
}

#[derive(Debug, Clone, Copy)]
struct Record<'p, 'a> {
    kind: &'a str,
    line: usize,
    fields: &'p [GroupCodePair<'a>],
}

impl<'p, 'a> Record<'p, 'a> {
    fn get(&self, code: u32) -> Option<&'a str> {
        self.fields.iter().find(|p| p.code == code).map(|p| p.value)
    }
}

fn split_records<'p, 'a>(pairs: &'p [GroupCodePair<'a>]) -> Result<Vec<Record<'p, 'a>>, DxfError> {
    if let Some(first) = pairs.first() {
        if first.code != 0 {
            return Err(DxfError::MalformedEntity {
                handle: format!("line {}", first.line),
                reason: "stream must start with group code 0".into(),
            });
        }
    }
    let mut out = Vec::new();
    let mut start = 0;
    while start < pairs.len() {
        let end = pairs[start + 1..]
            .iter()
            .position(|p| p.code == 0)
            .map_or(pairs.len(), |off| start + 1 + off);
        out.push(Record {
            kind: pairs[start].value,
            line: pairs[start].line,
            fields: &pairs[start + 1..end],
        });
        start = end;
    }
    Ok(out)
}

#[derive(Default)]
struct ParseCtx {
    handles: HashSet<String>,
    auto_handles: usize,
    skipped: BTreeMap<String, usize>,
}

impl ParseCtx {
    fn skip(&mut self, kind: &str) {
        *self.skipped.entry(kind.to_string()).or_default() += 1;
    }

    fn handle_for(&mut self, rec: &Record<'_, '_>) -> Result<String, DxfError> {
        let handle = match rec.get(5) {
            Some(h) if !h.is_empty() => h.to_string(),
            _ => loop {
                self.auto_handles += 1;
                let h = format!("~{}", self.auto_handles);
                if !self.handles.contains(&h) {
                    break h;
                }
            },
        };
        if !self.handles.insert(handle.clone()) {
            return Err(malformed(&handle, "duplicate handle"));
        }
        Ok(handle)
    }
}

fn malformed(handle: &str, reason: impl Into<String>) -> DxfError {
    DxfError::MalformedEntity {
        handle: handle.to_string(),
        reason: reason.into(),
    }
}

struct Fields<'r, 'p, 'a> {
    rec: &'r Record<'p, 'a>,
    handle: &'r str,
}

impl Fields<'_, '_, '_> {
    fn float(&self, code: u32) -> Result<Option<f64>, DxfError> {
        match self.rec.get(code) {
            None => Ok(None),
            Some(raw) => parse_float(raw, code, self.handle).map(Some),
        }
    }

    fn req(&self, code: u32) -> Result<f64, DxfError> {
        self.float(code)?.ok_or_else(|| {
            malformed(
                self.handle,
                format!("{} is missing group code {code}", self.rec.kind),
            )
        })
    }

    fn point(&self, xc: u32, yc: u32) -> Result<Point, DxfError> {
        Ok(Point::new(self.req(xc)?, self.req(yc)?))
    }

    fn planar(&self) -> Result<(), DxfError> {
        for code in [30, 31] {
            if let Some(z) = self.float(code)? {
                if z.abs() > Z_TOLERANCE {
                    return Err(malformed(
                        self.handle,
                        format!("non-planar entity: code {code} = {z}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn parse_float(raw: &str, code: u32, handle: &str) -> Result<f64, DxfError> {
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| malformed(handle, format!("group code {code}: {raw:?} is not a finite number")))
}

fn parse_polyline(rec: &Record<'_, '_>, handle: &str) -> Result<Vec<Point>, DxfError> {
    let mut vertices: Vec<(f64, Option<f64>)> = Vec::new();
    for pair in rec.fields {
        match pair.code {
            10 => vertices.push((parse_float(pair.value, 10, handle)?, None)),
            20 => {
                let y = parse_float(pair.value, 20, handle)?;
                match vertices.last_mut() {
                    Some(v) if v.1.is_none() => v.1 = Some(y),
                    _ => return Err(malformed(handle, "code 20 without preceding code 10")),
                }
            }
            _ => {}
        }
    }
    let mut points = vertices
        .into_iter()
        .map(|(x, y)| {
            y.map(|y| Point::new(x, y))
                .ok_or_else(|| malformed(handle, "vertex missing its y coordinate"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(count) = rec.get(90) {
        let declared: usize = count
            .parse()
            .map_err(|_| malformed(handle, format!("bad vertex count {count:?}")))?;
        if declared != points.len() {
            return Err(malformed(
                handle,
                format!("declared {declared} vertices, found {}", points.len()),
            ));
        }
    }
    let closed = rec
        .get(70)
        .and_then(|f| f.parse::<i64>().ok())
        .is_some_and(|f| f & 1 == 1);
    if closed && points.len() > 2 && points.first() != points.last() {
        points.push(points[0]);
    }
    Ok(points)
}

fn parse_entity(
    rec: &Record<'_, '_>,
    ctx: &mut ParseCtx,
) -> Result<Option<Primitive>, DxfError> {
    if !matches!(
        rec.kind,
        "LINE" | "ARC" | "CIRCLE" | "TEXT" | "INSERT" | "LWPOLYLINE"
    ) {
        ctx.skip(rec.kind);
        return Ok(None);
    }
    let handle = ctx.handle_for(rec)?;
    let f = Fields { rec, handle: &handle };
    f.planar()?;
    let geometry = match rec.kind {
        "LINE" => Geometry::Line {
            p1: f.point(10, 20)?,
            p2: f.point(11, 21)?,
        },
        "CIRCLE" => Geometry::Circle {
            center: f.point(10, 20)?,
            radius: f.req(40)?,
        },
        "ARC" => Geometry::Arc {
            center: f.point(10, 20)?,
            radius: f.req(40)?,
            start_angle: f.req(50)?,
            end_angle: f.req(51)?,
        },
        "TEXT" => Geometry::Text {
            anchor: f.point(10, 20)?,
            content: rec.get(1).unwrap_or("").to_string(),
            height: f.float(40)?.unwrap_or(0.0),
            rotation: f.float(50)?.unwrap_or(0.0),
        },
        "INSERT" => {
            let scale = f.float(41)?.unwrap_or(1.0);
            if let Some(sy) = f.float(42)? {
                if (sy - scale).abs() > 1e-12 {
                    return Err(malformed(&handle, "non-uniform insert scale"));
                }
            }
            Geometry::Insert(Insert {
                block_name: rec.get(2).unwrap_or("").to_string(),
                position: Point::new(f.float(10)?.unwrap_or(0.0), f.float(20)?.unwrap_or(0.0)),
                rotation: f.float(50)?.unwrap_or(0.0),
                scale,
                attributes: BTreeMap::new(),
            })
        }
        "LWPOLYLINE" => Geometry::Polyline {
            vertices: parse_polyline(rec, &handle)?,
        },
        _ => unreachable!(),
    };
    geometry.validate().map_err(|reason| malformed(&handle, reason))?;
    Ok(Some(Primitive::new(
        geometry,
        rec.get(8).unwrap_or("0"),
        handle,
    )))
}

fn parse_entity_list(records: &[Record<'_, '_>], ctx: &mut ParseCtx) -> Result<Vec<Primitive>, DxfError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let rec = &records[i];
        i += 1;
        let Some(mut prim) = parse_entity(rec, ctx)? else {
            continue;
        };
        let has_attribs = rec.get(66).is_some_and(|v| v == "1");
        if let (Geometry::Insert(ins), true) = (&mut prim.geometry, has_attribs) {
            loop {
                let Some(next) = records.get(i) else {
                    return Err(malformed(&prim.handle, "attribute list not terminated by SEQEND"));
                };
                i += 1;
                match next.kind {
                    "ATTRIB" => {
                        let tag = next.get(2).unwrap_or("").trim();
                        if tag.is_empty() {
                            return Err(malformed(&prim.handle, "ATTRIB without tag"));
                        }
                        ins.attributes
                            .insert(tag.to_string(), next.get(1).unwrap_or("").to_string());
                    }
                    "SEQEND" => break,
                    other => {
                        return Err(malformed(
                            &prim.handle,
                            format!("unexpected {other} inside attribute list"),
                        ))
                    }
                }
            }
        }
        out.push(prim);
    }
    Ok(out)
}

fn parse_blocks(
    records: &[Record<'_, '_>],
    ctx: &mut ParseCtx,
    blocks: &mut BTreeMap<String, BlockDefinition>,
) -> Result<(), DxfError> {
    let mut i = 0;
    while i < records.len() {
        let rec = &records[i];
        i += 1;
        if rec.kind != "BLOCK" {
            ctx.skip(rec.kind);
            continue;
        }
        let name = rec.get(2).unwrap_or("").to_string();
        let label = format!("BLOCK at line {}", rec.line);
        if name.is_empty() {
            return Err(malformed(&label, "block without name"));
        }
        let f = Fields { rec, handle: &label };
        let base_point = Point::new(f.float(10)?.unwrap_or(0.0), f.float(20)?.unwrap_or(0.0));
        let end = records[i..]
            .iter()
            .position(|r| r.kind == "ENDBLK")
            .map(|off| i + off)
            .ok_or_else(|| malformed(&label, format!("block {name:?} not terminated by ENDBLK")))?;
        let primitives = parse_entity_list(&records[i..end], ctx)?;
        i = end + 1;
        if blocks
            .insert(
                name.clone(),
                BlockDefinition {
                    name: name.clone(),
                    base_point,
                    primitives,
                },
            )
            .is_some()
        {
            return Err(malformed(&label, format!("block {name:?} defined twice")));
        }
    }
    Ok(())
}

/// Build a [`Document`] from tokenized pairs.
pub fn parse_document(pairs: &[GroupCodePair<'_>]) -> Result<Document, DxfError> {
    let records = split_records(pairs)?;
    let mut ctx = ParseCtx::default();
    let mut doc = Document::default();
    let mut i = 0;
    while i < records.len() {
        let rec = &records[i];
        i += 1;
        match rec.kind {
            "EOF" => break,
            "SECTION" => {
                let name = rec.get(2).unwrap_or("");
                let end = records[i..]
                    .iter()
                    .position(|r| r.kind == "ENDSEC")
                    .map(|off| i + off)
                    .ok_or_else(|| {
                        malformed(
                            &format!("SECTION at line {}", rec.line),
                            format!("section {name:?} not terminated by ENDSEC"),
                        )
                    })?;
                let body = &records[i..end];
                match name {
                    "ENTITIES" => doc.entities.extend(parse_entity_list(body, &mut ctx)?),
                    "BLOCKS" => parse_blocks(body, &mut ctx, &mut doc.blocks)?,
                    _ => {}
                }
                i = end + 1;
            }
            other => {
                return Err(malformed(
                    &format!("line {}", rec.line),
                    format!("unexpected {other} outside of a section"),
                ))
            }
        }
    }
    doc.skipped = ctx.skipped;
    check_block_references(&doc)?;
    Ok(doc)
}

fn inserted_blocks<'d>(prims: impl IntoIterator<Item = &'d Primitive>) -> impl Iterator<Item = &'d str> {
    prims.into_iter().filter_map(|p| match &p.geometry {
        Geometry::Insert(ins) => Some(ins.block_name.as_str()),
        _ => None,
    })
}

/// Every insert resolves, and no block reaches itself through inserts.
pub(super) fn check_block_references(doc: &Document) -> Result<(), DxfError> {
    let all = doc
        .entities
        .iter()
        .chain(doc.blocks.values().flat_map(|b| b.primitives.iter()));
    for name in inserted_blocks(all) {
        if !doc.blocks.contains_key(name) {
            return Err(DxfError::UnresolvedBlock(name.to_string()));
        }
    }
    fn visit<'d>(
        doc: &'d Document,
        name: &'d str,
        stack: &mut Vec<&'d str>,
        done: &mut BTreeSet<&'d str>,
    ) -> Result<(), DxfError> {
        if done.contains(name) {
            return Ok(());
        }
        if stack.contains(&name) {
            return Err(DxfError::RecursiveBlock(name.to_string()));
        }
        stack.push(name);
        for child in inserted_blocks(&doc.blocks[name].primitives) {
            visit(doc, child, stack, done)?;
        }
        stack.pop();
        done.insert(name);
        Ok(())
    }
    let mut done = BTreeSet::new();
    for name in doc.blocks.keys() {
        visit(doc, name, &mut Vec::new(), &mut done)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_LINE: &str = "0\nLINE\n8\nWIRES\n10\n0.0\n20\n0.0\n11\n5.0\n21\n0.0\n";

    fn wrap_entities(body: &str) -> String {
        format!("0\nSECTION\n2\nENTITIES\n{body}0\nENDSEC\n0\nEOF\n")
    }

    #[test]
    fn minimal_stream() {
        let pairs = tokenize(b"0\nEOF\n").unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!((pairs[0].code, pairs[0].value), (0, "EOF"));
        assert!(parse_document(&pairs).unwrap().is_empty());
    }

    #[test]
    fn hand_tokenized_line() {
        let pairs = tokenize(ONE_LINE.as_bytes()).unwrap();
        let got: Vec<(u32, &str)> = pairs.iter().map(|p| (p.code, p.value)).collect();
        assert_eq!(
            got,
            vec![
                (0, "LINE"),
                (8, "WIRES"),
                (10, "0.0"),
                (20, "0.0"),
                (11, "5.0"),
                (21, "0.0")
            ]
        );
    }

    #[test]
    fn truncated_stream() {
        assert_eq!(
            tokenize(b"0\nLINE\n10\n"),
            Err(DxfError::OddLineCount { lines: 3 })
        );
    }

    #[test]
    fn non_integer_code() {
        assert!(matches!(
            tokenize(b"0\nLINE\nx8\nWIRES\n"),
            Err(DxfError::NonIntegerCode { line: 3, .. })
        ));
        assert!(matches!(
            tokenize(b"-1\nLINE\n"),
            Err(DxfError::NonIntegerCode { line: 1, .. })
        ));
    }

    #[test]
    fn crlf_and_padded_codes() {
        let pairs = tokenize(b"  0\r\nEOF\r\n").unwrap();
        assert_eq!((pairs[0].code, pairs[0].value), (0, "EOF"));
    }

    #[test]
    fn binary_rejected() {
        assert_eq!(
            tokenize(b"AutoCAD Binary DXF\r\n\x1a\x00"),
            Err(DxfError::BinaryDxf)
        );
    }

    #[test]
    fn single_line_document() {
        let doc = read_document(wrap_entities(ONE_LINE).as_bytes()).unwrap();
        assert!(doc.blocks.is_empty());
        assert_eq!(doc.entities.len(), 1);
        assert_eq!(doc.entities[0].layer, "WIRES");
        assert_eq!(
            doc.entities[0].geometry,
            Geometry::Line {
                p1: Point::new(0.0, 0.0),
                p2: Point::new(5.0, 0.0)
            }
        );
    }

    #[test]
    fn undefined_block() {
        let src = wrap_entities("0\nINSERT\n2\nGND9\n10\n1\n20\n1\n");
        assert_eq!(
            read_document(src.as_bytes()),
            Err(DxfError::UnresolvedBlock("GND9".into()))
        );
    }

    #[test]
    fn recursive_block() {
        let src = "0\nSECTION\n2\nBLOCKS\n0\nBLOCK\n2\nA\n0\nINSERT\n2\nB\n0\nENDBLK\n\
                   0\nBLOCK\n2\nB\n0\nINSERT\n2\nA\n0\nENDBLK\n0\nENDSEC\n0\nEOF\n";
        assert!(matches!(
            read_document(src.as_bytes()),
            Err(DxfError::RecursiveBlock(_))
        ));
    }

    #[test]
    fn unknown_entities_are_counted() {
        let src = wrap_entities(&format!(
            "0\nSPLINE\n8\nX\n0\nHATCH\n0\nSPLINE\n{ONE_LINE}"
        ));
        let doc = read_document(src.as_bytes()).unwrap();
        assert_eq!(doc.entities.len(), 1);
        assert_eq!(doc.skipped.get("SPLINE"), Some(&2));
        assert_eq!(doc.skipped.get("HATCH"), Some(&1));
    }

    #[test]
    fn non_planar_rejected() {
        let src = wrap_entities("0\nLINE\n5\nA1\n10\n0\n20\n0\n30\n2.5\n11\n1\n21\n0\n");
        assert!(matches!(
            read_document(src.as_bytes()),
            Err(DxfError::MalformedEntity { handle, .. }) if handle == "A1"
        ));
    }

    #[test]
    fn degenerate_entities_rejected() {
        let zero_line = wrap_entities("0\nLINE\n5\nL\n10\n1\n20\n1\n11\n1\n21\n1\n");
        assert!(matches!(
            read_document(zero_line.as_bytes()),
            Err(DxfError::MalformedEntity { .. })
        ));
        let bad_circle = wrap_entities("0\nCIRCLE\n10\n1\n20\n1\n40\n0\n");
        assert!(read_document(bad_circle.as_bytes()).is_err());
        let missing = wrap_entities("0\nLINE\n10\n1\n20\n1\n");
        assert!(read_document(missing.as_bytes()).is_err());
    }

    #[test]
    fn duplicate_handles_rejected() {
        let src = wrap_entities(
            "0\nCIRCLE\n5\nH\n10\n0\n20\n0\n40\n1\n0\nCIRCLE\n5\nH\n10\n5\n20\n0\n40\n1\n",
        );
        assert!(matches!(
            read_document(src.as_bytes()),
            Err(DxfError::MalformedEntity { handle, .. }) if handle == "H"
        ));
    }

    #[test]
    fn insert_attributes_and_polyline() {
        let src = "0\nSECTION\n2\nBLOCKS\n0\nBLOCK\n2\nTERM\n10\n0\n20\n0\n\
                   0\nCIRCLE\n8\nSYMBOLS\n10\n0\n20\n0\n40\n1\n0\nENDBLK\n0\nENDSEC\n\
                   0\nSECTION\n2\nENTITIES\n\
                   0\nINSERT\n5\nI1\n2\nTERM\n10\n4\n20\n5\n41\n1\n66\n1\n\
                   0\nATTRIB\n2\nCIRCUIT\n1\n2\n0\nSEQEND\n\
                   0\nLWPOLYLINE\n5\nP1\n90\n3\n70\n0\n10\n0\n20\n0\n10\n1\n20\n0\n10\n1\n20\n1\n\
                   0\nENDSEC\n0\nEOF\n";
        let doc = read_document(src.as_bytes()).unwrap();
        assert_eq!(doc.blocks["TERM"].primitives.len(), 1);
        let Geometry::Insert(ins) = &doc.entities[0].geometry else {
            panic!("expected insert")
        };
        assert_eq!(ins.attributes.get("CIRCUIT").map(String::as_str), Some("2"));
        assert_eq!(
            doc.entities[1].geometry,
            Geometry::Polyline {
                vertices: vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0)]
            }
        );
    }
}
