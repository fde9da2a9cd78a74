use super::graph::StreetGraph;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Edges treated as absent while simulating a closure.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureMask {
    pub bridge: Option<usize>,
    blocked: Vec<usize>,
}

impl ClosureMask {
    pub fn new(bridge: Option<usize>, edges: impl IntoIterator<Item = usize>) -> Self {
        let mut blocked: Vec<usize> = edges.into_iter().collect();
        blocked.sort_unstable();
        blocked.dedup();
        Self { bridge, blocked }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_edges(edges: impl IntoIterator<Item = usize>) -> Self {
        Self::new(None, edges)
    }

    #[inline]
    pub fn contains(&self, edge: usize) -> bool {
        self.blocked.binary_search(&edge).is_ok()
    }

    pub fn blocked(&self) -> &[usize] {
        &self.blocked
    }

    pub fn len(&self) -> usize {
        self.blocked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocked.is_empty()
    }

    pub fn is_subset_of(&self, other: &ClosureMask) -> bool {
        self.blocked.iter().all(|e| other.contains(*e))
    }

    /// True when any edge of the sorted slice `edges` is blocked.
    pub fn intersects_sorted(&self, edges: &[usize]) -> bool {
        let (small, large) = if self.blocked.len() <= edges.len() {
            (&self.blocked[..], edges)
        } else {
            (edges, &self.blocked[..])
        };
        small.iter().any(|e| large.binary_search(e).is_ok())
    }
}

#[inline]
fn is_blocked(mask: Option<&ClosureMask>, e: usize) -> bool {
    mask.is_some_and(|m| m.contains(e))
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NO_EDGE: usize = usize::MAX;

/// Reusable Dijkstra state. Buffers are reset lazily, so repeated queries on
/// a large graph cost only what they touch.
pub struct Dijkstra {
    dist: Vec<f64>,
    pred: Vec<usize>,
    settled: Vec<bool>,
    target_stamp: Vec<u32>,
    stamp: u32,
    touched: Vec<usize>,
    heap: BinaryHeap<HeapItem>,
}

impl Dijkstra {
    pub fn new(n: usize) -> Self {
        Self {
            dist: vec![f64::INFINITY; n],
            pred: vec![NO_EDGE; n],
            settled: vec![false; n],
            target_stamp: vec![0; n],
            stamp: 0,
            touched: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.dist[v] = f64::INFINITY;
            self.pred[v] = NO_EDGE;
            self.settled[v] = false;
        }
        self.touched.clear();
        self.heap.clear();
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.target_stamp.iter_mut().for_each(|s| *s = 0);
            self.stamp = 1;
        }
    }

    /// Distances from `source` to each of `targets` (aligned), stopping once
    /// every target is settled. Unreachable targets get infinity. An empty
    /// target list explores the whole reachable component.
    pub fn run(
        &mut self,
        g: &StreetGraph,
        source: usize,
        targets: &[usize],
        mask: Option<&ClosureMask>,
    ) -> Vec<f64> {
        self.reset();
        let mut remaining = 0usize;
        for &t in targets {
            if self.target_stamp[t] != self.stamp {
                self.target_stamp[t] = self.stamp;
                remaining += 1;
            }
        }
        let explore_all = targets.is_empty();
        self.dist[source] = 0.0;
        self.touched.push(source);
        self.heap.push(HeapItem { dist: 0.0, node: source });
        while let Some(HeapItem { dist: d, node: u }) = self.heap.pop() {
            if self.settled[u] {
                continue;
            }
            self.settled[u] = true;
            if self.target_stamp[u] == self.stamp {
                remaining -= 1;
                if remaining == 0 && !explore_all {
                    break;
                }
            }
            for &(v, e) in g.neighbors(u) {
                if self.settled[v] || is_blocked(mask, e) {
                    continue;
                }
                let nd = d + g.edges[e].length;
                if nd < self.dist[v] {
                    if self.dist[v] == f64::INFINITY {
                        self.touched.push(v);
                    }
                    self.dist[v] = nd;
                    self.pred[v] = e;
                    self.heap.push(HeapItem { dist: nd, node: v });
                }
            }
        }
        targets
            .iter()
            .map(|&t| if self.settled[t] { self.dist[t] } else { f64::INFINITY })
            .collect()
    }

    /// Settled distance of `v` after the last run (infinity if not settled).
    pub fn distance(&self, v: usize) -> f64 {
        if self.settled[v] {
            self.dist[v]
        } else {
            f64::INFINITY
        }
    }

    /// Edge indices on the shortest-path-tree path to a settled `target`.
    pub fn path_edges(&self, g: &StreetGraph, target: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.settled[target] {
            return out;
        }
        let mut v = target;
        while self.pred[v] != NO_EDGE {
            let e = self.pred[v];
            out.push(e);
            v = g.edges[e].other(v);
        }
        out.reverse();
        out
    }
}

/// One-shot multi-target shortest path.
pub fn shortest_path(
    g: &StreetGraph,
    source: usize,
    targets: &[usize],
    mask: Option<&ClosureMask>,
) -> Vec<f64> {
    Dijkstra::new(g.node_count()).run(g, source, targets, mask)
}

/// Component id per node. Ids are assigned in order of each component's
/// smallest node index.
pub fn connected_components(g: &StreetGraph, mask: Option<&ClosureMask>) -> Vec<usize> {
    let n = g.node_count();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &(v, e) in g.neighbors(u) {
                if comp[v] == usize::MAX && !is_blocked(mask, e) {
                    comp[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    comp
}

pub fn component_count(components: &[usize]) -> usize {
    components.iter().max().map_or(0, |m| m + 1)
}

/// Nodes reachable from any of `sources` with masked edges removed.
pub fn reachable_from(g: &StreetGraph, sources: &[usize], mask: Option<&ClosureMask>) -> Vec<bool> {
    let mut seen = vec![false; g.node_count()];
    let mut stack: Vec<usize> = Vec::new();
    for &s in sources {
        if !seen[s] {
            seen[s] = true;
            stack.push(s);
        }
    }
    while let Some(u) = stack.pop() {
        for &(v, e) in g.neighbors(u) {
            if !seen[v] && !is_blocked(mask, e) {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Number of nodes within `hops` edges of `source`, excluding `source`.
/// Nodes with index `>= node_limit` are neither counted nor traversed.
pub fn hop_neighborhood(g: &StreetGraph, source: usize, hops: usize, node_limit: usize) -> usize {
    let mut level = vec![source];
    let mut seen = std::collections::HashSet::from([source]);
    for _ in 0..hops {
        let mut next = Vec::new();
        for &u in &level {
            for &(v, _) in g.neighbors(u) {
                if v < node_limit && seen.insert(v) {
                    next.push(v);
                }
            }
        }
        level = next;
    }
    seen.len() - 1
}
