use crate::hypergraph::NodeId;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{BitAnd, BitOr, Not, Sub};

/// Largest node id universe a [`NodeSet`] can hold.
pub const MAX_NODES: usize = 64;

/// A set of node ids below [`MAX_NODES`], stored as a bitmask.
///
/// Iteration is always in ascending id order, which is what every
/// enumeration in the crate relies on for determinism.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(u64);

impl NodeSet {
    pub const fn empty() -> Self {
        NodeSet(0)
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_NODES, "node universe {n} exceeds {MAX_NODES}");
        if n == MAX_NODES {
            NodeSet(u64::MAX)
        } else {
            NodeSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(v: NodeId) -> Self {
        let mut s = NodeSet::empty();
        s.insert(v);
        s
    }

    pub const fn from_bits(bits: u64) -> Self {
        NodeSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn insert(&mut self, v: NodeId) {
        assert!(v < MAX_NODES, "node id {v} exceeds {MAX_NODES}");
        self.0 |= 1u64 << v;
    }

    pub fn remove(&mut self, v: NodeId) {
        if v < MAX_NODES {
            self.0 &= !(1u64 << v);
        }
    }

    pub fn contains(self, v: NodeId) -> bool {
        v < MAX_NODES && self.0 & (1u64 << v) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: NodeSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn min(self) -> Option<NodeId> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as NodeId)
    }

    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    pub fn to_vec(self) -> Vec<NodeId> {
        self.iter().collect()
    }

    /// All subsets of `self`, in increasing order of their bitmask.
    pub fn subsets(self) -> Subsets {
        Subsets { universe: self.0, next: Some(0) }
    }

    /// All subsets of size at most `k`, ordered by cardinality and then
    /// lexicographically by their sorted member lists.
    pub fn subsets_up_to(self, k: usize) -> Vec<NodeSet> {
        let members = self.to_vec();
        let mut out = Vec::new();
        for size in 0..=k.min(members.len()) {
            combinations(&members, size, &mut |c| out.push(c.iter().copied().collect()));
        }
        out
    }

    /// All subsets of size exactly `k`, in lexicographic order.
    pub fn subsets_of_size(self, k: usize) -> Vec<NodeSet> {
        let members = self.to_vec();
        let mut out = Vec::new();
        if k <= members.len() {
            combinations(&members, k, &mut |c| out.push(c.iter().copied().collect()));
        }
        out
    }
}

fn combinations(items: &[NodeId], k: usize, emit: &mut dyn FnMut(&[NodeId])) {
    fn go(items: &[NodeId], k: usize, start: usize, cur: &mut Vec<NodeId>, emit: &mut dyn FnMut(&[NodeId])) {
        if cur.len() == k {
            emit(cur);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            go(items, k, i + 1, cur, emit);
            cur.pop();
        }
    }
    go(items, k, 0, &mut Vec::with_capacity(k), emit);
}

pub struct Iter(u64);

impl Iterator for Iter {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        if self.0 == 0 {
            return None;
        }
        let v = self.0.trailing_zeros() as NodeId;
        self.0 &= self.0 - 1;
        Some(v)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

pub struct Subsets {
    universe: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = NodeSet;

    fn next(&mut self) -> Option<NodeSet> {
        let cur = self.next?;
        // Standard submask walk in increasing order.
        let succ = (cur | !self.universe).wrapping_add(1) & self.universe;
        self.next = (succ != 0).then_some(succ);
        Some(NodeSet(cur))
    }
}

impl IntoIterator for NodeSet {
    type Item = NodeId;
    type IntoIter = Iter;

    fn into_iter(self) -> Iter {
        self.iter()
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        let mut s = NodeSet::empty();
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl<'a> FromIterator<&'a NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = &'a NodeId>>(iter: I) -> Self {
        iter.into_iter().copied().collect()
    }
}

impl BitOr for NodeSet {
    type Output = NodeSet;
    fn bitor(self, rhs: NodeSet) -> NodeSet {
        NodeSet(self.0 | rhs.0)
    }
}

impl BitAnd for NodeSet {
    type Output = NodeSet;
    fn bitand(self, rhs: NodeSet) -> NodeSet {
        NodeSet(self.0 & rhs.0)
    }
}

impl Sub for NodeSet {
    type Output = NodeSet;
    fn sub(self, rhs: NodeSet) -> NodeSet {
        NodeSet(self.0 & !rhs.0)
    }
}

impl Not for NodeSet {
    type Output = NodeSet;
    fn not(self) -> NodeSet {
        NodeSet(!self.0)
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for NodeSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for NodeSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let ids = Vec::<NodeId>::deserialize(d)?;
        if let Some(&bad) = ids.iter().find(|&&v| v >= MAX_NODES) {
            return Err(serde::de::Error::custom(format!("node id {bad} exceeds {MAX_NODES}")));
        }
        Ok(ids.into_iter().collect())
    }
}
