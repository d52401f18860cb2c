//! Topology generators used by the CLI and the tests.

use crate::error::{Error, Result};
use crate::hypergraph::{DirectedHypergraph, EdgeId, NodeId, SimpleDigraph};
use crate::nodeset::NodeSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FIG1A_U: NodeId = 0;
pub const FIG1A_V: NodeId = 1;
pub const FIG1A_W: NodeId = 2;
pub const FIG1A_Z: NodeId = 3;
/// `(v, {u, w})`.
pub const FIG1A_BLUE: EdgeId = 0;
/// `(v, {w, z})`.
pub const FIG1A_RED: EdgeId = 1;

/// Four nodes where `v` heads `(v, {u, w})` and `(v, {w, z})`.
pub fn figure1a() -> DirectedHypergraph {
    let mut g = DirectedHypergraph::new(4).expect("4 nodes");
    g.add_edge(FIG1A_V, [FIG1A_U, FIG1A_W]).expect("valid edge");
    g.add_edge(FIG1A_V, [FIG1A_W, FIG1A_Z]).expect("valid edge");
    g
}

pub const FIG1B_U: NodeId = 0;
pub const FIG1B_V: NodeId = 1;
pub const FIG1B_W: NodeId = 2;
pub const FIG1B_Z: NodeId = 3;
/// `(u, {v, w})`.
pub const FIG1B_RED: EdgeId = 0;
/// `(u, {w, z})`.
pub const FIG1B_BLUE: EdgeId = 1;
/// `(v, {u, z})`.
pub const FIG1B_CYAN: EdgeId = 2;
/// `(v, {z, w})`.
pub const FIG1B_VIOLET: EdgeId = 3;

/// The four-node example with two multi-channel nodes `u` and `v`.
pub fn figure1b() -> DirectedHypergraph {
    let (u, v, w, z) = (FIG1B_U, FIG1B_V, FIG1B_W, FIG1B_Z);
    let mut g = DirectedHypergraph::new(4).expect("4 nodes");
    for (head, tails) in [(u, vec![v, w]), (u, vec![w, z]), (v, vec![u, z]), (v, vec![z, w]), (w, vec![u]), (z, vec![v])] {
        g.add_edge(head, tails).expect("valid edge");
    }
    g
}

/// `K_n` with one single-tail hyperedge per ordered pair.
pub fn complete_p2p(n: usize) -> Result<DirectedHypergraph> {
    let d = SimpleDigraph::from_arcs(n, (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))))?;
    DirectedHypergraph::point_to_point(&d)
}

/// The undirected cycle `C_n` under local broadcast: node `i` heads one
/// hyperedge reaching `i - 1` and `i + 1`.
pub fn cycle_local_broadcast(n: usize) -> Result<DirectedHypergraph> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("a cycle needs at least 3 nodes, got {n}")));
    }
    DirectedHypergraph::local_broadcast(&undirected_cycle(n)?)
}

/// The undirected path `P_n` under local broadcast.
pub fn path_local_broadcast(n: usize) -> Result<DirectedHypergraph> {
    let d = SimpleDigraph::from_arcs(n, (1..n).flat_map(|i| [(i - 1, i), (i, i - 1)]))?;
    DirectedHypergraph::local_broadcast(&d)
}

fn undirected_cycle(n: usize) -> Result<SimpleDigraph> {
    SimpleDigraph::from_arcs(n, (0..n).flat_map(|i| [(i, (i + 1) % n), ((i + 1) % n, i)]))
}

/// The channels of both inputs on a common node set; hyperedges of `a` come
/// first and ids are reassigned densely.
pub fn union(a: &DirectedHypergraph, b: &DirectedHypergraph) -> Result<DirectedHypergraph> {
    if a.n() != b.n() || a.nodes() != b.nodes() {
        return Err(Error::InvalidArgument(format!(
            "union needs node-aligned inputs (n = {} vs n = {})",
            a.n(),
            b.n()
        )));
    }
    let mut g = DirectedHypergraph::with_nodes(a.n(), a.nodes())?;
    for e in a.edges().iter().chain(b.edges()) {
        g.add_edge(e.head, e.tails)?;
    }
    Ok(g)
}

/// `edges` hyperedges with uniformly random heads and non-empty tail sets.
pub fn random(n: usize, edges: usize, seed: u64) -> Result<DirectedHypergraph> {
    if n < 2 && edges > 0 {
        return Err(Error::InvalidArgument("random hyperedges need at least 2 nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = DirectedHypergraph::new(n)?;
    for _ in 0..edges {
        let head = rng.gen_range(0..n);
        let others = NodeSet::full(n) - NodeSet::singleton(head);
        let tails = loop {
            let pick: NodeSet = others.iter().filter(|_| rng.gen_bool(0.5)).collect();
            if !pick.is_empty() {
                break pick;
            }
        };
        g.add_edge(head, tails)?;
    }
    Ok(g)
}
