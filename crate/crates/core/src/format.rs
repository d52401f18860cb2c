//! Plain-text topology format.
//!
//! ```text
//! # comment
//! hypergraph n=4
//! nodes 0 1 3          (optional; defaults to 0..n)
//! edge 0 1 -> 0 3
//! ```

use crate::error::{Error, Result};
use crate::hypergraph::{DirectedHypergraph, Hyperedge};
use crate::nodeset::{NodeSet, MAX_NODES};
use std::fmt::Write;

pub fn parse(text: &str) -> Result<DirectedHypergraph> {
    let mut graph: Option<DirectedHypergraph> = None;
    let mut seen_edge = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| Error::Parse { line: line_no, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let keyword = words.next().unwrap_or("");
        match (keyword, graph.as_mut()) {
            ("hypergraph", None) => {
                let arg = words.next().ok_or_else(|| err("expected `n=<int>`".into()))?;
                let n = arg
                    .strip_prefix("n=")
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| err(format!("expected `n=<int>`, found `{arg}`")))?;
                if let Some(extra) = words.next() {
                    return Err(err(format!("unexpected `{extra}` after header")));
                }
                if n > MAX_NODES {
                    return Err(err(format!("n = {n} exceeds the supported maximum of {MAX_NODES}")));
                }
                graph = Some(DirectedHypergraph::new(n).map_err(|e| err(e.to_string()))?);
            }
            ("hypergraph", Some(_)) => return Err(err("duplicate header".into())),
            (_, None) => return Err(err(format!("expected header `hypergraph n=<int>`, found `{keyword}`"))),
            ("nodes", Some(g)) => {
                if seen_edge {
                    return Err(err("`nodes` must precede all edges".into()));
                }
                let ids = words.map(|w| parse_id(w, line_no)).collect::<Result<Vec<_>>>()?;
                let nodes: NodeSet = ids.iter().filter(|&&v| v < MAX_NODES).collect();
                if nodes.len() != ids.len() {
                    return Err(err("repeated or oversized node id".into()));
                }
                *g = DirectedHypergraph::with_nodes(g.n(), nodes).map_err(|e| err(e.to_string()))?;
            }
            ("edge", Some(g)) => {
                seen_edge = true;
                let id = parse_id(words.next().ok_or_else(|| err("missing edge id".into()))?, line_no)?;
                let head = parse_id(words.next().ok_or_else(|| err("missing head".into()))?, line_no)?;
                match words.next() {
                    Some("->") => {}
                    other => return Err(err(format!("expected `->`, found `{}`", other.unwrap_or("end of line")))),
                }
                let tails = words.map(|w| parse_id(w, line_no)).collect::<Result<Vec<_>>>()?;
                if tails.iter().any(|&t| t >= g.n()) {
                    let bad = tails.iter().find(|&&t| t >= g.n()).copied().unwrap_or_default();
                    return Err(err(format!("tail {bad} out of range for n = {}", g.n())));
                }
                let tail_set: NodeSet = tails.iter().collect();
                if tail_set.len() != tails.len() {
                    return Err(err("repeated tail".into()));
                }
                g.insert_edge(Hyperedge { id, head, tails: tail_set }).map_err(|e| err(e.to_string()))?;
            }
            (other, Some(_)) => return Err(err(format!("unknown record `{other}`"))),
        }
    }
    graph.ok_or(Error::Parse { line: text.lines().count().max(1), message: "missing header `hypergraph n=<int>`".into() })
}

fn parse_id(word: &str, line: usize) -> Result<usize> {
    word.parse::<usize>().map_err(|_| Error::Parse { line, message: format!("expected a non-negative integer, found `{word}`") })
}

pub fn serialize(g: &DirectedHypergraph) -> String {
    let mut out = String::new();
    writeln!(out, "hypergraph n={}", g.n()).unwrap();
    if g.nodes() != NodeSet::full(g.n()) {
        out.push_str("nodes");
        for v in g.nodes() {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    for e in g.edges() {
        write!(out, "edge {} {} ->", e.id, e.head).unwrap();
        for t in e.tails {
            write!(out, " {t}").unwrap();
        }
        out.push('\n');
    }
    out
}
