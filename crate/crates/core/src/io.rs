//! Text edge lists.
//!
//! ```text
//! #n 4
//! #model cm
//! 0 1 2
//! 1 1 1
//! 2 3 1
//! ```
//!
//! The `#n` header gives the vertex count; other `#key value` lines are kept
//! as metadata. Each edge line is `i j multiplicity` with 0-based ids; a loop
//! is `i i k`. A missing multiplicity means 1. Pairs are written sorted by
//! `(min, max)` so output is byte-stable.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::graphs::MultiGraph;

/// Largest vertex count accepted by the parser.
pub const MAX_VERTICES: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    pub graph: MultiGraph,
    pub metadata: BTreeMap<String, String>,
}

pub fn write_edge_list(g: &MultiGraph, metadata: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    writeln!(out, "#n {}", g.n()).unwrap();
    for (k, v) in metadata {
        if k != "n" {
            writeln!(out, "#{k} {v}").unwrap();
        }
    }
    for (i, j, m) in g.sorted_edges() {
        writeln!(out, "{i} {j} {m}").unwrap();
    }
    out
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_field<T: std::str::FromStr>(tok: &str, what: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| perr(line, format!("bad {what} '{tok}'")))
}

pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut n: Option<usize> = None;
    let mut metadata = BTreeMap::new();
    let mut g: Option<MultiGraph> = None;
    let mut seen: FxHashSet<(u32, u32)> = FxHashSet::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim_start();
            let (key, value) = match rest.split_once(char::is_whitespace) {
                Some((k, v)) => (k, v.trim()),
                None => (rest, ""),
            };
            if key == "n" {
                if n.is_some() {
                    return Err(perr(line_no, "repeated #n header"));
                }
                let count: usize = parse_field(value, "vertex count", line_no)?;
                if count > MAX_VERTICES {
                    return Err(perr(line_no, format!("vertex count {count} exceeds {MAX_VERTICES}")));
                }
                n = Some(count);
                g = Some(MultiGraph::new(count));
            } else if !key.is_empty() {
                metadata.insert(key.to_string(), value.to_string());
            }
            continue;
        }
        let graph = g.as_mut().ok_or_else(|| perr(line_no, "edge before #n header"))?;
        let count = n.unwrap_or(0);
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 2 || toks.len() > 3 {
            return Err(perr(line_no, format!("expected 'i j [multiplicity]', got {} fields", toks.len())));
        }
        let i: u32 = parse_field(toks[0], "vertex id", line_no)?;
        let j: u32 = parse_field(toks[1], "vertex id", line_no)?;
        let m: u32 = match toks.get(2) {
            Some(t) => parse_field(t, "multiplicity", line_no)?,
            None => 1,
        };
        if i as usize >= count || j as usize >= count {
            return Err(perr(line_no, format!("vertex id out of range for n = {count}")));
        }
        if m == 0 {
            return Err(perr(line_no, "multiplicity must be positive"));
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(perr(line_no, format!("duplicate pair ({i},{j})")));
        }
        graph.add_edges(i, j, m);
    }
    let graph = g.ok_or_else(|| perr(text.lines().count().max(1), "missing #n header"))?;
    Ok(EdgeList { graph, metadata })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = MultiGraph::from_edges(4, [(1, 0, 2), (1, 1, 1), (2, 3, 1)]).unwrap();
        let mut meta = BTreeMap::new();
        meta.insert("model".to_string(), "cm".to_string());
        let text = write_edge_list(&g, &meta);
        assert_eq!(text, "#n 4\n#model cm\n0 1 2\n1 1 1\n2 3 1\n");
        let back = parse_edge_list(&text).unwrap();
        assert_eq!(back.graph, g);
        assert_eq!(back.metadata, meta);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("0 1 1\n", 1),
            ("#n 3\n0 1 1\n0 x 1\n", 3),
            ("#n 3\n\n0 3 1\n", 3),
            ("#n 3\n0 1 0\n", 2),
            ("#n 3\n0 1\n1 0 2\n", 3),
            ("#n 3\n0 1 2 3\n", 2),
            ("#n 2\n#n 2\n", 2),
            ("#n -1\n", 1),
        ];
        for (text, line) in cases {
            match parse_edge_list(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(matches!(parse_edge_list(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn missing_multiplicity_defaults_to_one() {
        let e = parse_edge_list("#n 2\n# free comment\n1 0\n").unwrap();
        assert_eq!(e.graph.multiplicity(0, 1), 1);
        assert_eq!(e.metadata.get("free").map(String::as_str), Some("comment"));
    }
}
