//! Node splits and the family `Λ_F(G)` of all split hypergraphs.

use crate::error::{Error, Result};
use crate::hypergraph::{DirectedHypergraph, EdgeId, Hyperedge, NodeId};
use crate::nodeset::{NodeSet, MAX_NODES};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Which of the two copies of a split node a hyperedge is assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum SplitCopy {
    Zero,
    One,
}

impl SplitCopy {
    pub fn index(self) -> usize {
        match self {
            SplitCopy::Zero => 0,
            SplitCopy::One => 1,
        }
    }
}

impl From<SplitCopy> for u8 {
    fn from(c: SplitCopy) -> u8 {
        c.index() as u8
    }
}

impl TryFrom<u8> for SplitCopy {
    type Error = String;

    fn try_from(b: u8) -> std::result::Result<Self, String> {
        match b {
            0 => Ok(SplitCopy::Zero),
            1 => Ok(SplitCopy::One),
            _ => Err(format!("copy index must be 0 or 1, got {b}")),
        }
    }
}

/// The nodes to split and the copy each of their hyperedges goes to.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplitSpec {
    pub split_set: NodeSet,
    pub assignment: BTreeMap<EdgeId, SplitCopy>,
}

impl SplitSpec {
    pub fn none() -> Self {
        SplitSpec::default()
    }

    /// Checks `split_set ⊆ f ⊆ V` and that the assignment covers exactly the
    /// hyperedges headed by `split_set`.
    pub fn validate(&self, g: &DirectedHypergraph, f: NodeSet) -> Result<()> {
        if !f.is_subset(g.nodes()) {
            return Err(Error::InvalidSplit(format!("F = {f} is not a subset of V = {}", g.nodes())));
        }
        if !self.split_set.is_subset(f) {
            return Err(Error::InvalidSplit(format!("X = {} is not a subset of F = {f}", self.split_set)));
        }
        let expected: Vec<EdgeId> = headed_by(g, self.split_set);
        let got: Vec<EdgeId> = self.assignment.keys().copied().collect();
        if expected != got {
            return Err(Error::InvalidSplit(format!(
                "assignment covers hyperedges {got:?} but X = {} heads {expected:?}",
                self.split_set
            )));
        }
        Ok(())
    }
}

fn headed_by(g: &DirectedHypergraph, x: NodeSet) -> Vec<EdgeId> {
    let mut ids: Vec<EdgeId> = g.edges().iter().filter(|e| x.contains(e.head)).map(|e| e.id).collect();
    ids.sort_unstable();
    ids
}

/// A hypergraph obtained from `G` by splitting some nodes of `F`.
///
/// Unsplit nodes keep their ids. The copies of the `r`-th split node (in
/// ascending id order) get ids `n + 2r` and `n + 2r + 1`; the split node's
/// own id leaves the node set. Hyperedge ids are unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitHypergraph {
    graph: DirectedHypergraph,
    origin: Vec<NodeId>,
    f_prime: NodeSet,
    fault_set: NodeSet,
    spec: SplitSpec,
    base_n: usize,
}

impl SplitHypergraph {
    /// `G` itself, seen as the trivial split.
    pub fn unsplit(g: &DirectedHypergraph, f: NodeSet) -> Self {
        SplitHypergraph {
            graph: g.clone(),
            origin: (0..g.n()).collect(),
            f_prime: f & g.nodes(),
            fault_set: f & g.nodes(),
            spec: SplitSpec::none(),
            base_n: g.n(),
        }
    }

    pub fn graph(&self) -> &DirectedHypergraph {
        &self.graph
    }

    /// The original node a node of `V'` stands for.
    pub fn origin(&self, v: NodeId) -> NodeId {
        self.origin[v]
    }

    /// Maps a set of `V'` nodes to the original nodes.
    pub fn project(&self, s: NodeSet) -> NodeSet {
        s.iter().map(|v| self.origin[v]).collect()
    }

    /// `(V' ∩ F) ∪ (V' − V)`.
    pub fn f_prime(&self) -> NodeSet {
        self.f_prime
    }

    pub fn fault_set(&self) -> NodeSet {
        self.fault_set
    }

    pub fn spec(&self) -> &SplitSpec {
        &self.spec
    }

    /// The `n` of the original hypergraph.
    pub fn base_n(&self) -> usize {
        self.base_n
    }

    pub fn copy_of(&self, v: NodeId, c: SplitCopy) -> Option<NodeId> {
        copy_id(self.base_n, self.spec.split_set, v, c)
    }

    /// The node standing for `v` in the given copy: `v` itself if unsplit.
    pub fn member(&self, v: NodeId, c: SplitCopy) -> NodeId {
        self.copy_of(v, c).unwrap_or(v)
    }

    /// One `node: edge→bit` line per split node.
    pub fn describe_spec(&self) -> String {
        describe_spec(&self.spec, |e| self.graph.edge(e).map(|x| self.origin[x.head]))
    }
}

/// Renders a split spec as `node: edge→bit` lines, given each edge's
/// original head.
pub fn describe_spec(spec: &SplitSpec, head_of: impl Fn(EdgeId) -> Option<NodeId>) -> String {
    let mut out = String::new();
    for v in spec.split_set {
        out.push_str(&format!("{v}:"));
        for (&e, c) in &spec.assignment {
            if head_of(e) == Some(v) {
                out.push_str(&format!(" {e}→{}", c.index()));
            }
        }
        out.push('\n');
    }
    out
}

fn copy_id(base_n: usize, x: NodeSet, v: NodeId, c: SplitCopy) -> Option<NodeId> {
    if !x.contains(v) {
        return None;
    }
    let rank = (x.bits() & ((1u64 << v) - 1)).count_ones() as usize;
    Some(base_n + 2 * rank + c.index())
}

/// Applies a split to `G` for candidate fault set `f`.
pub fn split(g: &DirectedHypergraph, f: NodeSet, spec: &SplitSpec) -> Result<SplitHypergraph> {
    spec.validate(g, f)?;
    let x = spec.split_set;
    let n = g.n();
    let universe = n + 2 * x.len();
    if universe > MAX_NODES {
        return Err(Error::TooManyNodes { n: universe, limit: MAX_NODES });
    }
    let both = |v: NodeId| {
        NodeSet::from_iter([copy_id(n, x, v, SplitCopy::Zero).unwrap(), copy_id(n, x, v, SplitCopy::One).unwrap()])
    };
    let mut copies = NodeSet::empty();
    let mut origin: Vec<NodeId> = (0..n).collect();
    for v in x {
        copies = copies | both(v);
        origin.extend([v, v]);
    }
    let nodes = (g.nodes() - x) | copies;
    let mut out = DirectedHypergraph::with_nodes(universe, nodes)?;
    for e in g.edges() {
        let head = match spec.assignment.get(&e.id) {
            Some(&c) => copy_id(n, x, e.head, c).expect("head is split"),
            None => e.head,
        };
        let mut tails = e.tails - x;
        for t in e.tails & x {
            tails = tails | both(t);
        }
        out.insert_edge(Hyperedge { id: e.id, head, tails })?;
    }
    Ok(SplitHypergraph {
        graph: out,
        origin,
        f_prime: (f - x) | copies,
        fault_set: f,
        spec: spec.clone(),
        base_n: n,
    })
}

/// Every split spec in `Λ_F(G)`: `X` ranges over subsets of `F` by subset
/// rank, and for each `X` the assignments follow a binary counter over the
/// sorted ids of the hyperedges headed by `X` (smallest id is the lowest
/// bit, a set bit means copy 1).
pub fn lambda_specs(g: &DirectedHypergraph, f: NodeSet) -> impl Iterator<Item = SplitSpec> + '_ {
    f.subsets().flat_map(move |x| {
        let edges = headed_by(g, x);
        assert!(edges.len() < 64, "too many hyperedges headed by {x} to enumerate splits");
        (0..(1u64 << edges.len())).map(move |mask| SplitSpec {
            split_set: x,
            assignment: edges
                .iter()
                .enumerate()
                .map(|(i, &e)| (e, if mask >> i & 1 == 1 { SplitCopy::One } else { SplitCopy::Zero }))
                .collect(),
        })
    })
}

/// Every hypergraph in `Λ_F(G)`, labeled (copy-swap duplicates are kept).
pub fn enumerate_lambda(g: &DirectedHypergraph, f: NodeSet) -> impl Iterator<Item = SplitHypergraph> + '_ {
    lambda_specs(g, f).map(move |spec| split(g, f, &spec).expect("enumerated specs are valid"))
}

/// `|Λ_F(G)| = Σ_{X ⊆ F} Π_{v ∈ X} 2^{|δ(v)|}`, saturating.
pub fn lambda_size(g: &DirectedHypergraph, f: NodeSet) -> u128 {
    f.subsets()
        .map(|x| {
            let k = headed_by(g, x).len() as u32;
            if k >= 127 {
                u128::MAX
            } else {
                1u128 << k
            }
        })
        .fold(0u128, |a, b| a.saturating_add(b))
}

/// Merges every copy pair back into its original node.
pub fn collapse(gp: &SplitHypergraph) -> DirectedHypergraph {
    let nodes = gp.project(gp.graph.nodes());
    let mut g = DirectedHypergraph::with_nodes(gp.base_n, nodes).expect("original universe");
    for e in gp.graph.edges() {
        g.insert_edge(Hyperedge { id: e.id, head: gp.origin(e.head), tails: gp.project(e.tails) })
            .expect("collapsed edge is valid");
    }
    g
}
