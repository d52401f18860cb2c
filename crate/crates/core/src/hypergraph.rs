//! Directed hypergraphs, their underlying digraphs, neighborhoods and
//! strongly connected decomposition.

use crate::error::{Error, Result};
use crate::nodeset::{NodeSet, MAX_NODES};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};

pub type NodeId = usize;
pub type EdgeId = usize;

/// A local multicast channel `(head, tails)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hyperedge {
    pub id: EdgeId,
    pub head: NodeId,
    pub tails: NodeSet,
}

/// A directed hypergraph over a node-id universe `0..n`.
///
/// The node set is usually all of `0..n`; sub-hypergraphs keep the original
/// ids and only shrink `nodes`. Hyperedge ids are unique but need not be
/// dense after restriction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawHypergraph", into = "RawHypergraph")]
pub struct DirectedHypergraph {
    n: usize,
    nodes: NodeSet,
    edges: Vec<Hyperedge>,
    index: Vec<Option<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawHypergraph {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nodes: Option<NodeSet>,
    edges: Vec<Hyperedge>,
}

impl TryFrom<RawHypergraph> for DirectedHypergraph {
    type Error = Error;

    fn try_from(raw: RawHypergraph) -> Result<Self> {
        let nodes = match raw.nodes {
            Some(nodes) => nodes,
            None if raw.n <= MAX_NODES => NodeSet::full(raw.n),
            None => return Err(Error::TooManyNodes { n: raw.n, limit: MAX_NODES }),
        };
        let mut g = DirectedHypergraph::with_nodes(raw.n, nodes)?;
        for e in raw.edges {
            g.insert_edge(e)?;
        }
        Ok(g)
    }
}

impl From<DirectedHypergraph> for RawHypergraph {
    fn from(g: DirectedHypergraph) -> Self {
        let nodes = (g.nodes != NodeSet::full(g.n)).then_some(g.nodes);
        RawHypergraph { n: g.n, nodes, edges: g.edges }
    }
}

/// The underlying simple digraph: arc `(u, v)` iff some hyperedge with head
/// `u` has `v` among its tails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleDigraph {
    n: usize,
    nodes: NodeSet,
    out: Vec<NodeSet>,
}

/// Structural classes of a hypergraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub single_tail: bool,
    pub single_channel: bool,
    pub bidirectional: bool,
    pub undirected: bool,
}

impl Classification {
    /// None of the specialized classes applies.
    pub fn is_general(&self) -> bool {
        !self.single_tail && !self.single_channel && !self.undirected
    }
}

fn check_universe(n: usize) -> Result<()> {
    if n > MAX_NODES {
        return Err(Error::TooManyNodes { n, limit: MAX_NODES });
    }
    Ok(())
}

impl DirectedHypergraph {
    /// An edgeless hypergraph on nodes `0..n`.
    pub fn new(n: usize) -> Result<Self> {
        check_universe(n)?;
        Self::with_nodes(n, NodeSet::full(n))
    }

    /// An edgeless hypergraph on an arbitrary node set inside `0..n`.
    pub fn with_nodes(n: usize, nodes: NodeSet) -> Result<Self> {
        check_universe(n)?;
        if let Some(bad) = (nodes - NodeSet::full(n)).min() {
            return Err(Error::NodeOutOfRange { node: bad, n });
        }
        Ok(DirectedHypergraph { n, nodes, edges: Vec::new(), index: Vec::new() })
    }

    /// Adds a hyperedge with the next free id and returns that id.
    pub fn add_edge<I: IntoIterator<Item = NodeId>>(&mut self, head: NodeId, tails: I) -> Result<EdgeId> {
        let id = self.index.len();
        self.insert_edge(Hyperedge { id, head, tails: tails.into_iter().collect() })?;
        Ok(id)
    }

    /// Adds a hyperedge with an explicit id.
    pub fn insert_edge(&mut self, e: Hyperedge) -> Result<()> {
        self.require_node(e.head)?;
        for t in e.tails {
            self.require_node(t)?;
        }
        if e.tails.is_empty() {
            return Err(Error::EmptyTails(e.id));
        }
        if e.tails.contains(e.head) {
            return Err(Error::HeadInTails { edge: e.id, head: e.head });
        }
        if self.edge(e.id).is_some() {
            return Err(Error::DuplicateEdge(e.id));
        }
        if self.index.len() <= e.id {
            self.index.resize(e.id + 1, None);
        }
        self.index[e.id] = Some(self.edges.len());
        self.edges.push(e);
        Ok(())
    }

    fn require_node(&self, v: NodeId) -> Result<()> {
        if v >= self.n {
            return Err(Error::NodeOutOfRange { node: v, n: self.n });
        }
        if !self.nodes.contains(v) {
            return Err(Error::UnknownNode(v));
        }
        Ok(())
    }

    /// Size of the id universe.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> NodeSet {
        self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Hyperedges in insertion order.
    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Hyperedge> {
        self.index.get(id).copied().flatten().map(|i| &self.edges[i])
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().map(|e| e.id)
    }

    /// Hyperedges headed by `u`, in insertion order.
    pub fn head_edges(&self, u: NodeId) -> Result<Vec<&Hyperedge>> {
        self.require_node(u)?;
        Ok(self.out_edges(u).collect())
    }

    pub(crate) fn out_edges(&self, u: NodeId) -> impl Iterator<Item = &Hyperedge> + '_ {
        self.edges.iter().filter(move |e| e.head == u)
    }

    pub fn underlying_graph(&self) -> SimpleDigraph {
        let mut out = vec![NodeSet::empty(); self.n];
        for e in &self.edges {
            out[e.head] = out[e.head] | e.tails;
        }
        SimpleDigraph { n: self.n, nodes: self.nodes, out }
    }

    /// Heads of hyperedges that reach `b`, without any disjointness check.
    pub(crate) fn heads_into(&self, b: NodeSet) -> NodeSet {
        let mut heads = NodeSet::empty();
        for e in &self.edges {
            if !e.tails.is_disjoint(b) {
                heads.insert(e.head);
            }
        }
        heads
    }

    /// Nodes of `a` heading a hyperedge with a tail in `b`.
    pub fn in_neighborhood(&self, a: NodeSet, b: NodeSet) -> Result<NodeSet> {
        if !a.is_disjoint(b) {
            return Err(Error::Overlap(format!("A = {a} and B = {b}")));
        }
        Ok(self.heads_into(b) & a)
    }

    /// `B` is empty or has at least `f + 1` in-neighbors in `A`.
    pub fn adjacent(&self, a: NodeSet, b: NodeSet, f: usize) -> Result<bool> {
        Ok(b.is_empty() || self.in_neighborhood(a, b)?.len() > f)
    }

    /// The sub-hypergraph induced by `u`; hyperedges keep their ids.
    pub fn induced(&self, u: NodeSet) -> DirectedHypergraph {
        let nodes = u & self.nodes;
        let mut g = DirectedHypergraph { n: self.n, nodes, edges: Vec::new(), index: Vec::new() };
        for e in &self.edges {
            let tails = e.tails & nodes;
            if nodes.contains(e.head) && !tails.is_empty() {
                g.insert_edge(Hyperedge { id: e.id, head: e.head, tails }).expect("restriction of a valid edge");
            }
        }
        g
    }

    /// The sub-hypergraph induced by `u` together with the full hyperedges
    /// `d`, whose endpoints join the node set.
    pub fn induced_with_edges(&self, u: NodeSet, d: &[EdgeId]) -> Result<DirectedHypergraph> {
        let mut extra = Vec::with_capacity(d.len());
        let mut nodes = u & self.nodes;
        for &id in d {
            let e = self.edge(id).ok_or(Error::UnknownEdge(id))?;
            nodes = nodes | e.tails | NodeSet::singleton(e.head);
            extra.push(e.clone());
        }
        let base = self.induced(u);
        let mut g = DirectedHypergraph { n: self.n, nodes, edges: Vec::new(), index: Vec::new() };
        // Keep G's edge order so the result does not depend on how D was listed.
        for e in &self.edges {
            if let Some(x) = extra.iter().find(|x| x.id == e.id) {
                g.insert_edge(x.clone())?;
            } else if let Some(r) = base.edge(e.id) {
                g.insert_edge(r.clone())?;
            }
        }
        Ok(g)
    }

    /// `G - x`.
    pub fn without(&self, x: NodeSet) -> DirectedHypergraph {
        self.induced(self.nodes - x)
    }

    /// Strongly connected components of the underlying digraph, sorted by
    /// smallest member.
    pub fn directed_decomposition(&self) -> Vec<NodeSet> {
        self.underlying_graph().strongly_connected_components()
    }

    /// Components without in-neighbors outside themselves.
    pub fn source_components(&self) -> Vec<NodeSet> {
        let comps = self.directed_decomposition();
        comps.into_iter().filter(|&h| (self.heads_into(h) - h).is_empty()).collect()
    }

    pub fn classify(&self) -> Classification {
        let single_tail = self.edges.iter().all(|e| e.tails.len() == 1);
        let single_channel = self.nodes.iter().all(|u| self.out_edges(u).count() == 1);
        let bidirectional = self.underlying_graph().is_symmetric();
        let shapes: HashSet<(NodeId, NodeSet)> = self.edges.iter().map(|e| (e.head, e.tails)).collect();
        let undirected = self.edges.iter().all(|e| {
            e.tails.iter().all(|v| {
                let mut rotated = e.tails;
                rotated.remove(v);
                rotated.insert(e.head);
                shapes.contains(&(v, rotated))
            })
        });
        Classification { single_tail, single_channel, bidirectional, undirected }
    }

    /// The undirected hyperedges `{u} ∪ S`, one per orbit, sorted.
    pub fn undirected_hyperedges(&self) -> Result<Vec<NodeSet>> {
        if !self.classify().undirected {
            return Err(Error::NotUndirected("some hyperedge orbit is incomplete".into()));
        }
        let set: BTreeSet<NodeSet> = self.edges.iter().map(|e| e.tails | NodeSet::singleton(e.head)).collect();
        Ok(set.into_iter().collect())
    }

    /// A single-tail hypergraph with one hyperedge per arc of `d`.
    pub fn point_to_point(d: &SimpleDigraph) -> Result<DirectedHypergraph> {
        let mut g = DirectedHypergraph::with_nodes(d.n, d.nodes)?;
        for (u, v) in d.arcs() {
            g.add_edge(u, [v])?;
        }
        Ok(g)
    }

    /// A local broadcast hypergraph: every node with out-neighbors heads one
    /// hyperedge reaching all of them.
    pub fn local_broadcast(d: &SimpleDigraph) -> Result<DirectedHypergraph> {
        let mut g = DirectedHypergraph::with_nodes(d.n, d.nodes)?;
        for u in d.nodes {
            if !d.out[u].is_empty() {
                g.add_edge(u, d.out[u])?;
            }
        }
        Ok(g)
    }

    /// An undirected hypergraph: each set of at least two nodes becomes one
    /// hyperedge per member acting as head.
    pub fn undirected(n: usize, hyperedges: &[NodeSet]) -> Result<DirectedHypergraph> {
        let mut g = DirectedHypergraph::new(n)?;
        for &h in hyperedges {
            if h.len() < 2 {
                return Err(Error::InvalidArgument(format!("undirected hyperedge {h} needs at least two nodes")));
            }
            for u in h {
                g.add_edge(u, h - NodeSet::singleton(u))?;
            }
        }
        Ok(g)
    }
}

impl SimpleDigraph {
    pub fn new(n: usize) -> Result<Self> {
        check_universe(n)?;
        Ok(SimpleDigraph { n, nodes: NodeSet::full(n), out: vec![NodeSet::empty(); n] })
    }

    pub fn from_arcs<I: IntoIterator<Item = (NodeId, NodeId)>>(n: usize, arcs: I) -> Result<Self> {
        let mut d = SimpleDigraph::new(n)?;
        for (u, v) in arcs {
            d.add_arc(u, v)?;
        }
        Ok(d)
    }

    /// Adds `u -> v`; duplicates collapse.
    pub fn add_arc(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        for x in [u, v] {
            if x >= self.n {
                return Err(Error::NodeOutOfRange { node: x, n: self.n });
            }
        }
        if u == v {
            return Err(Error::InvalidArgument(format!("self-loop on {u}")));
        }
        self.out[u].insert(v);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> NodeSet {
        self.nodes
    }

    pub fn out_neighbors(&self, u: NodeId) -> NodeSet {
        self.out.get(u).copied().unwrap_or_default() & self.nodes
    }

    pub fn in_neighbors(&self, v: NodeId) -> NodeSet {
        self.nodes.iter().filter(|&u| self.out[u].contains(v)).collect()
    }

    pub fn has_arc(&self, u: NodeId, v: NodeId) -> bool {
        self.out_neighbors(u).contains(v)
    }

    /// Arcs in lexicographic order.
    pub fn arcs(&self) -> Vec<(NodeId, NodeId)> {
        self.nodes.iter().flat_map(|u| self.out_neighbors(u).iter().map(move |v| (u, v))).collect()
    }

    pub fn arc_count(&self) -> usize {
        self.nodes.iter().map(|u| self.out_neighbors(u).len()).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.arcs().into_iter().all(|(u, v)| self.has_arc(v, u))
    }

    /// `true` if every ordered pair of distinct nodes is an arc.
    pub fn is_complete(&self) -> bool {
        self.nodes.iter().all(|u| self.out_neighbors(u) == self.nodes - NodeSet::singleton(u))
    }

    pub(crate) fn out_sets(&self) -> &[NodeSet] {
        &self.out
    }

    /// Nodes reachable from `u`, including `u`.
    pub fn reachable_from(&self, u: NodeId) -> NodeSet {
        let mut seen = NodeSet::singleton(u);
        let mut frontier = seen;
        while !frontier.is_empty() {
            let mut next = NodeSet::empty();
            for x in frontier {
                next = next | self.out_neighbors(x);
            }
            frontier = next - seen;
            seen = seen | next;
        }
        seen
    }

    pub fn strongly_connected_components(&self) -> Vec<NodeSet> {
        let reach: Vec<NodeSet> =
            (0..self.n).map(|u| if self.nodes.contains(u) { self.reachable_from(u) } else { NodeSet::empty() }).collect();
        let mut left = self.nodes;
        let mut comps = Vec::new();
        while let Some(u) = left.min() {
            let comp: NodeSet = reach[u].iter().filter(|&w| reach[w].contains(u)).collect();
            comps.push(comp);
            left = left - comp;
        }
        comps
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn set(ids: &[NodeId]) -> NodeSet {
        ids.iter().collect()
    }

    #[test]
    fn figure1a_head_edges_and_arcs() {
        let g = fixtures::figure1a();
        let v = fixtures::FIG1A_V;
        let heads: Vec<(NodeId, NodeSet)> = g.head_edges(v).unwrap().iter().map(|e| (e.head, e.tails)).collect();
        let (u, w, z) = (fixtures::FIG1A_U, fixtures::FIG1A_W, fixtures::FIG1A_Z);
        assert_eq!(heads, vec![(v, set(&[u, w])), (v, set(&[w, z]))]);
        assert_eq!(g.underlying_graph().out_neighbors(v), set(&[u, w, z]));
        assert_eq!(g.in_neighborhood(set(&[v]), set(&[z])).unwrap(), set(&[v]));
        assert!(g.head_edges(u).unwrap().is_empty());
        assert!(matches!(g.head_edges(9), Err(Error::NodeOutOfRange { .. })));
    }

    #[test]
    fn duplicate_arcs_collapse() {
        let mut g = DirectedHypergraph::new(3).unwrap();
        g.add_edge(0, [1]).unwrap();
        g.add_edge(0, [1, 2]).unwrap();
        assert_eq!(g.underlying_graph().arcs(), vec![(0, 1), (0, 2)]);
        assert!(DirectedHypergraph::new(3).unwrap().underlying_graph().arcs().is_empty());
    }

    #[test]
    fn edge_validation() {
        let mut g = DirectedHypergraph::new(3).unwrap();
        assert_eq!(g.add_edge(0, []), Err(Error::EmptyTails(0)));
        assert_eq!(g.add_edge(0, [0, 1]), Err(Error::HeadInTails { edge: 0, head: 0 }));
        assert!(matches!(g.add_edge(0, [3]), Err(Error::NodeOutOfRange { .. })));
        assert!(matches!(DirectedHypergraph::new(65), Err(Error::TooManyNodes { .. })));
    }

    #[test]
    fn in_neighborhood_and_adjacent() {
        let path = DirectedHypergraph::point_to_point(&SimpleDigraph::from_arcs(3, [(0, 1), (1, 2)]).unwrap()).unwrap();
        assert_eq!(path.in_neighborhood(set(&[0]), set(&[2])).unwrap(), NodeSet::empty());
        assert_eq!(path.in_neighborhood(set(&[0]), NodeSet::empty()).unwrap(), NodeSet::empty());
        assert!(path.in_neighborhood(set(&[0, 1]), set(&[1])).is_err());
        assert!(path.adjacent(set(&[0]), NodeSet::empty(), 3).unwrap());
        assert!(!path.adjacent(set(&[0]), set(&[1]), 1).unwrap());
        let k4 = fixtures::complete_p2p(4).unwrap();
        assert!(k4.adjacent(set(&[0, 1, 2]), set(&[3]), 1).unwrap());
    }

    #[test]
    fn induced_restricts_tails_and_keeps_ids() {
        let g = fixtures::figure1a();
        let (v, w) = (fixtures::FIG1A_V, fixtures::FIG1A_W);
        let h = g.induced(set(&[v, w]));
        let got: Vec<(EdgeId, NodeId, NodeSet)> = h.edges().iter().map(|e| (e.id, e.head, e.tails)).collect();
        assert_eq!(got, vec![(0, v, set(&[w])), (1, v, set(&[w]))]);
        assert_eq!(g.induced(g.nodes()), g);
        assert!(g.induced(NodeSet::empty()).edges().is_empty());
    }

    #[test]
    fn induced_with_edges_adds_endpoints() {
        let g = fixtures::figure1a();
        let (u, v, w, z) = (fixtures::FIG1A_U, fixtures::FIG1A_V, fixtures::FIG1A_W, fixtures::FIG1A_Z);
        let h = g.induced_with_edges(set(&[u, w, z]), &[0]).unwrap();
        assert_eq!(h.nodes(), set(&[u, v, w, z]));
        assert_eq!(h.edge_ids().collect::<Vec<_>>(), vec![0]);
        let lone = g.induced_with_edges(NodeSet::empty(), &[0]).unwrap();
        assert_eq!(lone.nodes(), set(&[u, v, w]));
        assert_eq!(g.induced_with_edges(set(&[v, w]), &[]).unwrap(), g.induced(set(&[v, w])));
    }

    #[test]
    fn decomposition_and_sources() {
        let arc = DirectedHypergraph::point_to_point(&SimpleDigraph::from_arcs(2, [(0, 1)]).unwrap()).unwrap();
        assert_eq!(arc.directed_decomposition(), vec![set(&[0]), set(&[1])]);
        assert_eq!(arc.source_components(), vec![set(&[0])]);
        let fig = fixtures::figure1b();
        assert_eq!(fig.directed_decomposition(), vec![NodeSet::full(4)]);
        let blobs = DirectedHypergraph::point_to_point(
            &SimpleDigraph::from_arcs(4, [(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap(),
        )
        .unwrap();
        assert_eq!(blobs.source_components(), vec![set(&[0, 1]), set(&[2, 3])]);
    }

    #[test]
    fn classification_examples() {
        let k4 = fixtures::complete_p2p(4).unwrap().classify();
        assert!(k4.single_tail && k4.bidirectional && !k4.single_channel);
        let tri = DirectedHypergraph::undirected(3, &[NodeSet::full(3)]).unwrap().classify();
        assert!(tri.undirected && tri.bidirectional && tri.single_channel);
        let fig = fixtures::figure1b().classify();
        assert!(fig.is_general());
        assert!(!fig.bidirectional);
    }

    #[test]
    fn serde_round_trip_validates() {
        let g = fixtures::figure1b();
        let json = serde_json::to_string(&g).unwrap();
        let back: DirectedHypergraph = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        let bad = r#"{"n":2,"edges":[{"id":0,"head":0,"tails":[0]}]}"#;
        assert!(serde_json::from_str::<DirectedHypergraph>(bad).is_err());
    }
}
