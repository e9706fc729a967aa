//! Line-oriented text formats.
//!
//! Edge list: a header `n m` followed by `m` lines `u v`. Decomposition: a
//! header `paths k` followed by `k` lines of space-separated vertices. Lines
//! starting with `#` and blank lines are ignored in both.

use std::fmt::Write as _;

use crate::digraph::{Digraph, PathSeq, Vertex};
use crate::error::ParseError;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_usize(line: usize, tok: &str) -> Result<usize, ParseError> {
    tok.parse()
        .map_err(|_| ParseError::new(line, format!("expected a non-negative integer, found {tok:?}")))
}

/// Parses the edge-list format into a multidigraph.
pub fn parse_edge_list(text: &str) -> Result<Digraph, ParseError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| ParseError::new(1, "missing header"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(ParseError::new(hl, "header must be `n m`"));
    }
    let n = parse_usize(hl, toks[0])?;
    let m = parse_usize(hl, toks[1])?;
    let mut d = Digraph::new(n);
    let mut seen = 0;
    for (ln, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(ParseError::new(ln, "edge line must be `u v`"));
        }
        let u = parse_usize(ln, toks[0])?;
        let v = parse_usize(ln, toks[1])?;
        d.add_edge((u, v)).map_err(|e| ParseError::new(ln, e.to_string()))?;
        seen += 1;
    }
    if seen != m {
        return Err(ParseError::new(hl, format!("header declares {m} edges, found {seen}")));
    }
    Ok(d)
}

/// Writes live edges in insertion order.
pub fn write_edge_list(d: &Digraph) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", d.vertex_count(), d.edge_count()).unwrap();
    for (_, e) in d.edges() {
        writeln!(out, "{} {}", e.tail, e.head).unwrap();
    }
    out
}

/// Parses a decomposition file into raw vertex sequences. Validity as paths
/// is left to the verifier so that it can report what is wrong.
pub fn parse_paths(text: &str) -> Result<Vec<Vec<Vertex>>, ParseError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| ParseError::new(1, "missing header"))?;
    let k = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["paths", k] => parse_usize(hl, k)?,
        _ => return Err(ParseError::new(hl, "header must be `paths k`")),
    };
    let mut paths = Vec::with_capacity(k);
    for (ln, l) in lines {
        let seq = l
            .split_whitespace()
            .map(|t| parse_usize(ln, t))
            .collect::<Result<Vec<_>, _>>()?;
        paths.push(seq);
    }
    if paths.len() != k {
        return Err(ParseError::new(hl, format!("header declares {k} paths, found {}", paths.len())));
    }
    Ok(paths)
}

pub fn write_paths(paths: &[PathSeq]) -> String {
    let mut out = String::new();
    writeln!(out, "paths {}", paths.len()).unwrap();
    for p in paths {
        writeln!(out, "{p}").unwrap();
    }
    out
}
