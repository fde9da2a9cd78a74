use super::umap::euclidean;
use serde::{Deserialize, Serialize};

/// Floor on merge distances before inverting to λ.
const MIN_DISTANCE: f64 = 1e-12;

pub const NOISE: i64 = -1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HdbscanParams {
    pub min_cluster_size: usize,
    pub min_samples: usize,
}

impl Default for HdbscanParams {
    fn default() -> Self {
        Self { min_cluster_size: 20, min_samples: 10 }
    }
}

impl HdbscanParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.min_cluster_size < 2 {
            return Err(format!("hdbscan.min_cluster_size must be >= 2, got {}", self.min_cluster_size));
        }
        if self.min_samples < 1 {
            return Err("hdbscan.min_samples must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    /// Dense cluster label per point, or [`NOISE`].
    pub labels: Vec<i64>,
    /// Stability of each selected cluster, indexed by label.
    pub stability: Vec<f64>,
}

impl ClusterAssignment {
    pub fn n_clusters(&self) -> usize {
        self.stability.len()
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_clusters()];
        for &l in &self.labels {
            if l >= 0 {
                s[l as usize] += 1;
            }
        }
        s
    }
}

/// Distance to the `k`-th nearest other point (`k` clamped to `n - 1`).
pub fn core_distances(x: &[Vec<f64>], k: usize) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let k = k.clamp(1, n - 1);
    (0..n)
        .map(|i| {
            let mut d: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| euclidean(&x[i], &x[j])).collect();
            d.select_nth_unstable_by(k - 1, f64::total_cmp);
            d[k - 1]
        })
        .collect()
}

pub fn mutual_reachability(x: &[Vec<f64>], core: &[f64], a: usize, b: usize) -> f64 {
    core[a].max(core[b]).max(euclidean(&x[a], &x[b]))
}

/// Minimum spanning tree of the mutual-reachability graph (dense Prim),
/// sorted by `(weight, u, v)` with `u < v`.
pub fn mst(x: &[Vec<f64>], core: &[f64]) -> Vec<(usize, usize, f64)> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut cur = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let d = mutual_reachability(x, core, cur, v);
            if d < best[v] {
                best[v] = d;
                from[v] = cur;
            }
            if next == usize::MAX || best[v] < best[next] {
                next = v;
            }
        }
        in_tree[next] = true;
        edges.push((from[next].min(next), from[next].max(next), best[next]));
        cur = next;
    }
    edges.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    edges
}

/// One row of the condensed tree. Children below `n` are points; others
/// are clusters numbered from `n` (root is `n`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondensedEntry {
    pub parent: usize,
    pub child: usize,
    pub lambda: f64,
    pub size: usize,
}

fn lambda_of(d: f64) -> f64 {
    1.0 / d.max(MIN_DISTANCE)
}

/// Single-linkage dendrogram from sorted MST edges: `(left, right, dist, size)`
/// for merge nodes `n..2n-1`.
fn single_linkage(n: usize, mst: &[(usize, usize, f64)]) -> Vec<(usize, usize, f64, usize)> {
    let mut parent: Vec<usize> = (0..2 * n).collect();
    let mut size = vec![1usize; 2 * n];
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for (i, &(u, v, d)) in mst.iter().enumerate() {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        let node = n + i;
        parent[ru] = node;
        parent[rv] = node;
        size[node] = size[ru] + size[rv];
        out.push((ru, rv, d, size[node]));
    }
    out
}

pub fn condense_tree(n: usize, mst: &[(usize, usize, f64)], min_cluster_size: usize) -> Vec<CondensedEntry> {
    let links = single_linkage(n, mst);
    if links.is_empty() {
        return Vec::new();
    }
    let node_size = |v: usize| if v < n { 1 } else { links[v - n].3 };
    let leaves = |v: usize| -> Vec<usize> {
        let mut stack = vec![v];
        let mut out = Vec::new();
        while let Some(x) = stack.pop() {
            if x < n {
                out.push(x);
            } else {
                stack.push(links[x - n].0);
                stack.push(links[x - n].1);
            }
        }
        out
    };
    let root = n + links.len() - 1;
    let mut next_label = n + 1;
    let mut entries = Vec::new();
    // (dendrogram node, condensed cluster label)
    let mut queue = std::collections::VecDeque::from([(root, n)]);
    while let Some((node, label)) = queue.pop_front() {
        if node < n {
            continue;
        }
        let d = links[node - n].2;
        let lambda = lambda_of(d);
        // Merges at exactly this height split together, so the result does
        // not depend on the order tied MST edges were joined.
        let mut parts = Vec::new();
        let mut stack = vec![links[node - n].0, links[node - n].1];
        while let Some(v) = stack.pop() {
            if v >= n && links[v - n].2 == d {
                stack.push(links[v - n].0);
                stack.push(links[v - n].1);
            } else {
                parts.push(v);
            }
        }
        parts.sort_unstable();
        let (big, small): (Vec<usize>, Vec<usize>) = parts.into_iter().partition(|&v| node_size(v) >= min_cluster_size);
        for v in small {
            for p in leaves(v) {
                entries.push(CondensedEntry { parent: label, child: p, lambda, size: 1 });
            }
        }
        match big.len() {
            0 => {}
            1 => queue.push_front((big[0], label)),
            _ => {
                for v in big {
                    entries.push(CondensedEntry { parent: label, child: next_label, lambda, size: node_size(v) });
                    queue.push_back((v, next_label));
                    next_label += 1;
                }
            }
        }
    }
    entries
}

/// Sum over members of `(λ_leave − λ_birth)` weighted by size, per cluster
/// label `n..`.
pub fn stabilities(n: usize, tree: &[CondensedEntry]) -> Vec<f64> {
    let n_labels = tree.iter().map(|e| e.parent.max(e.child)).max().map_or(1, |m| m + 1 - n);
    let mut birth = vec![0.0; n_labels];
    for e in tree.iter().filter(|e| e.child >= n) {
        birth[e.child - n] = e.lambda;
    }
    let mut s = vec![0.0; n_labels];
    for e in tree {
        s[e.parent - n] += (e.lambda - birth[e.parent - n]) * e.size as f64;
    }
    s
}

pub fn hdbscan(x: &[Vec<f64>], p: &HdbscanParams) -> ClusterAssignment {
    let n = x.len();
    if n < p.min_cluster_size || n < 2 {
        return ClusterAssignment { labels: vec![NOISE; n], stability: Vec::new() };
    }
    let core = core_distances(x, p.min_samples);
    let tree = condense_tree(n, &mst(x, &core), p.min_cluster_size);
    let mut stab = stabilities(n, &tree);
    let n_labels = stab.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n_labels];
    let mut parent_of = vec![usize::MAX; n_labels];
    for e in tree.iter().filter(|e| e.child >= n) {
        children[e.parent - n].push(e.child - n);
        parent_of[e.child - n] = e.parent - n;
    }
    // Excess of mass, leaves first; children always carry larger labels.
    let mut selected = vec![false; n_labels];
    for c in (1..n_labels).rev() {
        let sub: f64 = children[c].iter().map(|&k| stab[k]).sum();
        if children[c].is_empty() || stab[c] >= sub {
            selected[c] = true;
            let mut stack = children[c].clone();
            while let Some(k) = stack.pop() {
                selected[k] = false;
                stack.extend(children[k].iter().copied());
            }
        } else {
            stab[c] = sub;
        }
    }
    // Each point belongs to the selected ancestor of the cluster it left.
    let mut owner = vec![usize::MAX; n];
    for e in tree.iter().filter(|e| e.child < n) {
        let mut c = e.parent - n;
        while c != 0 && !selected[c] {
            c = parent_of[c];
        }
        if c != 0 {
            owner[e.child] = c;
        }
    }
    let mut dense = vec![NOISE; n_labels];
    let mut next = 0i64;
    let mut stability = Vec::new();
    let orig = stabilities(n, &tree);
    let mut labels = vec![NOISE; n];
    for i in 0..n {
        let c = owner[i];
        if c == usize::MAX {
            continue;
        }
        if dense[c] == NOISE {
            dense[c] = next;
            stability.push(orig[c]);
            next += 1;
        }
        labels[i] = dense[c];
    }
    ClusterAssignment { labels, stability }
}
