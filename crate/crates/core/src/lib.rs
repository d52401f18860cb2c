//! Byzantine consensus over local multicast channels.
//!
//! A network is a directed hypergraph: every hyperedge `(u, S)` is a channel
//! on which `u` reaches all of `S` with a single, identical transmission.
//! The crate provides the two tight feasibility conditions (the LCR and AB
//! forms) with witness extraction, reductions to the classical
//! point-to-point, local broadcast and undirected-hypergraph models, and a
//! deterministic synchronous simulator that runs the flooding-based
//! consensus algorithm against a library of Byzantine adversaries.

pub mod conditions;
mod error;
pub mod fixtures;
mod flow;
pub mod format;
pub mod hypergraph;
mod nodeset;
pub mod protocol;
pub mod reductions;
pub mod splitting;

pub use error::{Error, Result};
pub use hypergraph::{Classification, DirectedHypergraph, EdgeId, Hyperedge, NodeId, SimpleDigraph};
pub use nodeset::{NodeSet, MAX_NODES};

/// A binary consensus value.
pub type Bit = u8;
