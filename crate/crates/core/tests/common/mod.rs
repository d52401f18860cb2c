#![allow(dead_code)]

use hyperconsensus::conditions::{check_ab_hyper_with_parameter, propagates};
use hyperconsensus::hypergraph::SimpleDigraph;
use hyperconsensus::{DirectedHypergraph, NodeId, NodeSet};

/// Node sets (without `v`) of every simple path from `U` to `v` avoiding `excluded`.
fn path_masks(d: &SimpleDigraph, u: NodeSet, v: NodeId, excluded: NodeSet) -> Vec<NodeSet> {
    fn walk(d: &SimpleDigraph, x: NodeId, v: NodeId, blocked: NodeSet, used: NodeSet, out: &mut Vec<NodeSet>) {
        for y in d.out_neighbors(x) - blocked - used {
            if y == v {
                out.push(used);
            } else {
                let mut next = used;
                next.insert(y);
                walk(d, y, v, blocked, next, out);
            }
        }
    }
    let mut out = Vec::new();
    for s in u - excluded {
        walk(d, s, v, excluded, NodeSet::singleton(s), &mut out);
    }
    out
}

/// Largest number of pairwise node-disjoint `Uv`-paths, by exhaustive packing.
pub fn brute_force_disjoint(d: &SimpleDigraph, u: NodeSet, v: NodeId, excluded: NodeSet) -> usize {
    let mut masks = path_masks(d, u, v, excluded);
    masks.sort_by_key(|m| (m.len(), m.bits()));
    masks.dedup();
    fn best(masks: &[NodeSet], start: usize, used: NodeSet) -> usize {
        (start..masks.len()).filter(|&i| masks[i].is_disjoint(used)).map(|i| 1 + best(masks, i + 1, used | masks[i])).max().unwrap_or(0)
    }
    best(&masks, 0, NodeSet::empty())
}

/// The source-component facts every condition-passing graph satisfies for
/// every `F` with `|F| <= f`: a unique source component `S`, the subgraph
/// on `S ∪ N_in(F, S)` passes AB-hyper for that set, and `S` propagates to
/// the rest of `G - F`.
pub fn source_lemmas(g: &DirectedHypergraph, f: usize) -> Result<(), String> {
    for fs in g.nodes().subsets_up_to(f) {
        let minus = g.without(fs);
        let sources = minus.source_components();
        if sources.len() != 1 {
            return Err(format!("F = {fs}: {} source components", sources.len()));
        }
        let s = sources[0];
        let phi = g.in_neighborhood(fs, s).unwrap();
        let sub = g.induced(s | phi);
        if !check_ab_hyper_with_parameter(&sub, phi, f).unwrap().holds {
            return Err(format!("F = {fs}: G[S ∪ N_in(F, S)] fails AB-hyper for {phi}"));
        }
        let rest = g.nodes() - s - fs;
        if !propagates(&minus, s, rest, f, NodeSet::empty()).unwrap() {
            return Err(format!("F = {fs}: S = {s} does not propagate to {rest}"));
        }
    }
    Ok(())
}
