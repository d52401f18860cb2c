//! Unit vertex-capacity maximum flow for counting node-disjoint paths.

use crate::hypergraph::NodeId;
use crate::nodeset::NodeSet;
use std::collections::VecDeque;

enum Entry {
    /// A super-source feeding every node of the set through its own
    /// unit vertex capacity.
    Set(NodeSet),
    /// An uncapacitated single source.
    Node(NodeId),
}

struct Network {
    size: usize,
    cap: Vec<i32>,
}

impl Network {
    fn new(size: usize) -> Self {
        Network { size, cap: vec![0; size * size] }
    }

    fn add(&mut self, a: usize, b: usize, c: i32) {
        self.cap[a * self.size + b] += c;
    }

    fn max_flow(&mut self, s: usize, t: usize, limit: usize) -> usize {
        let mut flow = 0;
        let mut prev = vec![usize::MAX; self.size];
        while flow < limit {
            prev.iter_mut().for_each(|p| *p = usize::MAX);
            prev[s] = s;
            let mut queue = VecDeque::from([s]);
            while let Some(a) = queue.pop_front() {
                if a == t {
                    break;
                }
                let row = &self.cap[a * self.size..(a + 1) * self.size];
                for (b, p) in prev.iter_mut().enumerate() {
                    if *p == usize::MAX && row[b] > 0 {
                        *p = a;
                        queue.push_back(b);
                    }
                }
            }
            if prev[t] == usize::MAX {
                break;
            }
            let mut b = t;
            while b != s {
                let a = prev[b];
                self.cap[a * self.size + b] -= 1;
                self.cap[b * self.size + a] += 1;
                b = a;
            }
            flow += 1;
        }
        flow
    }
}

fn run(out: &[NodeSet], present: NodeSet, entry: Entry, target: NodeId, limit: usize) -> usize {
    let n = out.len();
    let (vin, vout) = (|x: usize| 2 * x, |x: usize| 2 * x + 1);
    let source = 2 * n;
    let mut net = Network::new(2 * n + 1);
    for x in present {
        if x != target {
            net.add(vin(x), vout(x), 1);
            for y in out[x] & present {
                net.add(vout(x), vin(y), 1);
            }
        }
    }
    match entry {
        Entry::Set(sources) => {
            for u in sources & present {
                net.add(source, vin(u), 1);
            }
        }
        Entry::Node(s) => net.add(source, vout(s), limit.min(n) as i32),
    }
    net.max_flow(source, vin(target), limit)
}

/// Maximum number of paths from `sources` to `target` that pairwise share
/// only `target`, using nodes of `present` only; stops counting at `limit`.
pub(crate) fn disjoint_paths_into(out: &[NodeSet], present: NodeSet, sources: NodeSet, target: NodeId, limit: usize) -> usize {
    if !present.contains(target) || sources.contains(target) {
        return 0;
    }
    run(out, present, Entry::Set(sources), target, limit)
}

/// Maximum number of internally node-disjoint `s`-`t` paths; stops at `limit`.
pub(crate) fn internally_disjoint(out: &[NodeSet], present: NodeSet, s: NodeId, t: NodeId, limit: usize) -> usize {
    if s == t || !present.contains(s) || !present.contains(t) {
        return 0;
    }
    run(out, present, Entry::Node(s), t, limit)
}
