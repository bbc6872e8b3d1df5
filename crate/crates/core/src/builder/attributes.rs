use super::{BuildError, BuilderConfig};
use crate::dxf::{Geometry, Primitive};
use crate::graph::{attr, ComponentNode, NodeKind};

/// A recognized annotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Annotation {
    TerminalId(String),
    /// `"+"` or `"-"`.
    Polarity(String),
    /// `"A"`, `"B"` or `"C"`.
    Phase(String),
    GroundType(String),
    Circuit(String),
}

impl Annotation {
    pub fn key(&self) -> &'static str {
        match self {
            Annotation::TerminalId(_) => attr::TERMINAL_ID,
            Annotation::Polarity(_) => attr::POLARITY,
            Annotation::Phase(_) => attr::PHASE,
            Annotation::GroundType(_) => attr::GROUND_TYPE,
            Annotation::Circuit(_) => attr::CIRCUIT,
        }
    }

    pub fn value(&self) -> &str {
        match self {
            Annotation::TerminalId(v)
            | Annotation::Polarity(v)
            | Annotation::Phase(v)
            | Annotation::GroundType(v)
            | Annotation::Circuit(v) => v,
        }
    }
}

fn strip_prefix_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    let head = s.get(..prefix.len())?;
    head.eq_ignore_ascii_case(prefix)
        .then(|| s[prefix.len()..].trim())
        .filter(|rest| !rest.is_empty())
}

/// Parse annotation text by prefix convention:
///
/// | text        | attribute            |
/// |-------------|----------------------|
/// | `ID:x`      | `terminal_id = x`    |
/// | `+`         | `polarity = +`       |
/// | `-` or `−`  | `polarity = -`       |
/// | `PH:A/B/C`  | `phase`              |
/// | `GND:x`     | `ground_type = x`    |
/// | `CKT:x`     | `circuit = x`        |
pub fn parse_annotation(text: &str) -> Option<Annotation> {
    let text = text.trim();
    match text {
        "+" => return Some(Annotation::Polarity("+".into())),
        "-" | "\u{2212}" => return Some(Annotation::Polarity("-".into())),
        _ => {}
    }
    if let Some(v) = strip_prefix_ci(text, "ID:") {
        return Some(Annotation::TerminalId(v.to_string()));
    }
    if let Some(v) = strip_prefix_ci(text, "PH:") {
        let phase = v.to_ascii_uppercase();
        return matches!(phase.as_str(), "A" | "B" | "C").then_some(Annotation::Phase(phase));
    }
    if let Some(v) = strip_prefix_ci(text, "GND:") {
        return Some(Annotation::GroundType(v.to_string()));
    }
    if let Some(v) = strip_prefix_ci(text, "CKT:") {
        return Some(Annotation::Circuit(v.to_string()));
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attachment {
    pub nodes: Vec<ComponentNode>,
    /// Recognized annotations with no node in range.
    pub orphans: Vec<String>,
    /// Texts that follow no known convention.
    pub unrecognized: Vec<String>,
}

/// Map each recognized text onto the nearest eligible node within
/// `text_radius`. Junctions never take annotations and grounds never take
/// polarity. A terminal ID in range of more than one terminal also marks
/// the receiving node `label_ambiguous`.
pub fn attach_attributes(
    texts: &[Primitive],
    mut nodes: Vec<ComponentNode>,
    cfg: &BuilderConfig,
) -> Result<Attachment, BuildError> {
    let mut orphans = Vec::new();
    let mut unrecognized = Vec::new();
    for text in texts {
        let Geometry::Text { anchor, content, .. } = &text.geometry else {
            continue;
        };
        let Some(annotation) = parse_annotation(content) else {
            unrecognized.push(content.clone());
            continue;
        };
        let eligible = |n: &ComponentNode| {
            n.kind != NodeKind::Junction
                && !(n.kind == NodeKind::Ground && matches!(annotation, Annotation::Polarity(_)))
        };
        let target = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| eligible(n))
            .map(|(i, n)| (i, n.anchor.distance(*anchor)))
            .filter(|&(_, d)| d <= cfg.text_radius)
            .min_by(|x, y| x.1.total_cmp(&y.1));
        let Some((idx, _)) = target else {
            orphans.push(content.clone());
            continue;
        };
        let ambiguous = matches!(annotation, Annotation::TerminalId(_))
            && nodes
                .iter()
                .filter(|n| n.kind == NodeKind::Terminal)
                .filter(|n| n.anchor.distance(*anchor) <= cfg.text_radius)
                .count()
                > 1;
        let node = &mut nodes[idx];
        let (key, value) = (annotation.key(), annotation.value());
        match node.attributes.get(key) {
            Some(existing) if existing != value => {
                return Err(BuildError::ConflictingAttribute {
                    node: node.id,
                    key: key.to_string(),
                    existing: existing.clone(),
                    incoming: value.to_string(),
                })
            }
            _ => {
                node.attributes.insert(key.to_string(), value.to_string());
            }
        }
        if ambiguous {
            node.attributes
                .insert(attr::LABEL_AMBIGUOUS.to_string(), "true".to_string());
        }
    }
    Ok(Attachment {
        nodes,
        orphans,
        unrecognized,
    })
}
