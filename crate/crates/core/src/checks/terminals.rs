use std::collections::BTreeMap;

use super::{empty, CheckContext, CheckError, CheckOutcome, Evidence};
use crate::graph::{attr, ComponentNode, NodeKind, PropertyGraph};

const MISSING: &str = "check_terminal_ids_missing";
const DUPLICATE: &str = "check_terminal_ids_duplicate";
const ALIGNMENT: &str = "check_terminal_alignment";

/// Sort key that orders `X2` before `X10`: leading text, then the first
/// digit run as a number, then whatever follows.
pub fn natural_key(id: &str) -> (String, Option<u64>, String) {
    let split = id.find(|c: char| c.is_ascii_digit()).unwrap_or(id.len());
    let (prefix, rest) = id.split_at(split);
    let digits_end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
    let (digits, tail) = rest.split_at(digits_end);
    (prefix.to_string(), digits.parse().ok(), tail.to_string())
}

fn terminals<'g>(sub: &'g PropertyGraph, function_id: &str) -> Result<Vec<&'g ComponentNode>, CheckError> {
    let t: Vec<_> = sub.nodes.iter().filter(|n| n.kind == NodeKind::Terminal).collect();
    if t.is_empty() {
        return Err(empty(function_id, "no terminal"));
    }
    Ok(t)
}

fn terminal_id(n: &ComponentNode) -> Option<&str> {
    n.attr(attr::TERMINAL_ID).map(str::trim).filter(|s| !s.is_empty())
}

pub fn check_terminal_ids_missing(
    sub: &PropertyGraph,
    _ctx: &CheckContext,
) -> Result<CheckOutcome, CheckError> {
    let evidence = terminals(sub, MISSING)?
        .into_iter()
        .filter(|n| terminal_id(n).is_none())
        .map(|n| Evidence::new(vec![n.id], format!("terminal {} has no ID label", n.id)))
        .collect();
    Ok(CheckOutcome::from_evidence(MISSING, evidence))
}

pub fn check_terminal_ids_duplicate(
    sub: &PropertyGraph,
    _ctx: &CheckContext,
) -> Result<CheckOutcome, CheckError> {
    let mut by_id: BTreeMap<&str, Vec<_>> = BTreeMap::new();
    for n in terminals(sub, DUPLICATE)? {
        if let Some(id) = terminal_id(n) {
            by_id.entry(id).or_default().push(n.id);
        }
    }
    let evidence = by_id
        .into_iter()
        .filter(|(_, nodes)| nodes.len() > 1)
        .map(|(id, nodes)| {
            let msg = format!("terminal ID {id} used on {} terminals", nodes.len());
            Evidence::new(nodes, msg)
        })
        .collect();
    Ok(CheckOutcome::from_evidence(DUPLICATE, evidence))
}

/// Labels read along the terminal strip must follow the natural order of
/// their IDs (either direction). The strip axis runs between the two
/// farthest-apart terminals; every out-of-order pair is reported. A label
/// that reached more than one terminal is a failure by itself.
pub fn check_terminal_alignment(
    sub: &PropertyGraph,
    _ctx: &CheckContext,
) -> Result<CheckOutcome, CheckError> {
    let all = terminals(sub, ALIGNMENT)?;
    let mut evidence: Vec<Evidence> = all
        .iter()
        .filter(|n| n.attr(attr::LABEL_AMBIGUOUS) == Some("true"))
        .map(|n| {
            Evidence::new(
                vec![n.id],
                format!("label {} is within reach of more than one terminal", terminal_id(n).unwrap_or("?")),
            )
        })
        .collect();

    let labelled: Vec<(&ComponentNode, &str)> =
        all.iter().filter_map(|n| terminal_id(n).map(|id| (*n, id))).collect();
    let mut axis = None;
    let mut widest = 0.0;
    for (i, (a, _)) in labelled.iter().enumerate() {
        for (b, _) in &labelled[i + 1..] {
            let d = a.anchor.distance(b.anchor);
            if d > widest {
                widest = d;
                axis = Some(b.anchor.sub(a.anchor).scale(1.0 / d));
            }
        }
    }
    if let Some(axis) = axis {
        let mut strip: Vec<(f64, &ComponentNode, &str)> = labelled
            .iter()
            .map(|(n, id)| (n.anchor.dot(axis), *n, *id))
            .collect();
        strip.sort_by(|x, y| x.0.total_cmp(&y.0));
        let keys: Vec<_> = strip.iter().map(|s| natural_key(s.2)).collect();
        let mut ascending = Vec::new();
        let mut descending = Vec::new();
        for i in 0..keys.len() {
            for j in (i + 1)..keys.len() {
                if keys[i] > keys[j] {
                    ascending.push((i, j));
                } else if keys[i] < keys[j] {
                    descending.push((i, j));
                }
            }
        }
        let inversions = if descending.len() < ascending.len() {
            descending
        } else {
            ascending
        };
        for (i, j) in inversions {
            evidence.push(Evidence::new(
                vec![strip[i].1.id, strip[j].1.id],
                format!("labels {} and {} are out of strip order", strip[i].2, strip[j].2),
            ));
        }
    }
    Ok(CheckOutcome::from_evidence(ALIGNMENT, evidence))
}
