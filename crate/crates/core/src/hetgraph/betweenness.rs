//! Length-weighted Brandes betweenness with optional source sampling.

use super::graph::StreetGraph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Sources per parallel work unit. Partial sums are combined in chunk order,
/// so results do not depend on the thread count.
const CHUNK: usize = 16;

#[derive(Clone, Copy, PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

fn accumulate(g: &StreetGraph, s: usize, delta_out: &mut [f64]) {
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut sigma = vec![0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::new();
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    sigma[s] = 1.0;
    heap.push(Item(0.0, s));
    while let Some(Item(d, u)) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        order.push(u);
        for &(v, e) in g.neighbors(u) {
            let nd = d + g.edges[e].length;
            if nd < dist[v] {
                dist[v] = nd;
                sigma[v] = sigma[u];
                preds[v].clear();
                preds[v].push(u);
                heap.push(Item(nd, v));
            } else if nd == dist[v] && !done[v] {
                sigma[v] += sigma[u];
                preds[v].push(u);
            }
        }
    }
    let mut delta = vec![0f64; n];
    for &w in order.iter().rev() {
        for &v in &preds[w] {
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
        }
        if w != s {
            delta_out[w] += delta[w];
        }
    }
}

/// Sources used for a graph of `n` nodes: all nodes when `sample >= n`,
/// otherwise a seeded uniform sample without replacement, sorted.
pub fn betweenness_sources(n: usize, sample: usize, seed: u64) -> Vec<usize> {
    if sample >= n {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = rand::seq::index::sample(&mut rng, n, sample).into_vec();
    v.sort_unstable();
    v
}

/// Normalized betweenness in [0, 1] for an undirected graph. With all nodes
/// as sources the result is exact.
pub fn betweenness(g: &StreetGraph, sample_sources: usize, seed: u64) -> Vec<f64> {
    assert!(sample_sources >= 1, "sample_sources must be >= 1");
    let n = g.node_count();
    if n < 3 {
        return vec![0.0; n];
    }
    let sources = betweenness_sources(n, sample_sources, seed);
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0f64; n];
            for &s in chunk {
                accumulate(g, s, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0f64; n];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    let scale = n as f64 / sources.len() as f64;
    // Every unordered pair is visited from both ends, hence the extra half.
    let pairs = (n - 1) as f64 * (n - 2) as f64 / 2.0;
    total
        .into_iter()
        .map(|b| (b * scale / 2.0 / pairs).clamp(0.0, 1.0))
        .collect()
}
