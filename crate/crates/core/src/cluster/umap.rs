use super::ClusterError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const SIGMA_ITERATIONS: usize = 64;
const SIGMA_TOLERANCE: f64 = 1e-5;
const SIGMA_FLOOR: f64 = 1e-8;
const GRADIENT_CLIP: f64 = 4.0;
const KERNEL_FIT_POINTS: usize = 300;
/// Initial coordinates are scaled so the largest |coordinate| is this.
const INIT_EXTENT: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UmapParams {
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub n_components: usize,
    pub n_epochs: usize,
    pub learning_rate: f64,
    pub negative_samples: usize,
    /// Falls back to the run seed when unset.
    pub seed: Option<u64>,
}

impl Default for UmapParams {
    fn default() -> Self {
        Self {
            n_neighbors: 15,
            min_dist: 0.1,
            n_components: 2,
            n_epochs: 200,
            learning_rate: 1.0,
            negative_samples: 5,
            seed: None,
        }
    }
}

impl UmapParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_neighbors < 2 {
            return Err(format!("umap.n_neighbors must be >= 2, got {}", self.n_neighbors));
        }
        if !(self.min_dist >= 0.0 && self.min_dist.is_finite()) {
            return Err(format!("umap.min_dist must be >= 0, got {}", self.min_dist));
        }
        if self.n_components != 2 {
            return Err(format!("umap.n_components must be 2, got {}", self.n_components));
        }
        if self.n_epochs == 0 {
            return Err("umap.n_epochs must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(format!("umap.learning_rate must be positive, got {}", self.learning_rate));
        }
        Ok(())
    }
}

/// Weighted kNN graph with per-point bandwidths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyGraph {
    pub n: usize,
    /// Per point: neighbors (excluding itself) with distances, ascending.
    pub knn: Vec<Vec<(usize, f64)>>,
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Directed membership strengths, parallel to `knn`.
    pub directed: Vec<Vec<f64>>,
    /// Symmetrized weights for `i < j`, sorted by `(i, j)`.
    pub edges: Vec<(usize, usize, f64)>,
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Exact kNN of every point, self excluded; ties broken by index.
pub fn exact_knn(x: &[Vec<f64>], k: usize) -> Vec<Vec<(usize, f64)>> {
    (0..x.len())
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<(usize, f64)> =
                (0..x.len()).filter(|&j| j != i).map(|j| (j, euclidean(&x[i], &x[j]))).collect();
            d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            d.truncate(k);
            d
        })
        .collect()
}

pub fn membership(d: f64, rho: f64, sigma: f64) -> f64 {
    (-(d - rho).max(0.0) / sigma).exp()
}

/// Bandwidth such that the memberships of `dists` sum to `target`.
pub fn solve_sigma(dists: &[f64], rho: f64, target: f64) -> f64 {
    let (mut lo, mut hi, mut mid) = (0.0f64, f64::INFINITY, 1.0f64);
    for _ in 0..SIGMA_ITERATIONS {
        let psum: f64 = dists.iter().map(|&d| membership(d, rho, mid)).sum();
        if (psum - target).abs() < SIGMA_TOLERANCE {
            break;
        }
        if psum > target {
            hi = mid;
            mid = (lo + hi) / 2.0;
        } else {
            lo = mid;
            mid = if hi.is_infinite() { mid * 2.0 } else { (lo + hi) / 2.0 };
        }
    }
    mid.max(SIGMA_FLOOR)
}

pub fn fuzzy_graph(x: &[Vec<f64>], p: &UmapParams) -> Result<FuzzyGraph, ClusterError> {
    let n = x.len();
    if n < p.n_neighbors + 1 {
        return Err(ClusterError::TooFewPoints { n, needed: p.n_neighbors + 1 });
    }
    let knn = exact_knn(x, p.n_neighbors);
    let target = (p.n_neighbors as f64).log2();
    let (rho, sigma): (Vec<f64>, Vec<f64>) = knn
        .par_iter()
        .map(|nb| {
            let rho = nb[0].1;
            let d: Vec<f64> = nb.iter().map(|e| e.1).collect();
            (rho, solve_sigma(&d, rho, target))
        })
        .unzip();
    let directed: Vec<Vec<f64>> = knn
        .iter()
        .enumerate()
        .map(|(i, nb)| nb.iter().map(|&(_, d)| membership(d, rho[i], sigma[i])).collect())
        .collect();
    let mut pairs: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    for (i, nb) in knn.iter().enumerate() {
        for (&(j, _), &w) in nb.iter().zip(&directed[i]) {
            let e = pairs.entry((i.min(j), i.max(j))).or_insert((0.0, 0.0));
            if i < j {
                e.0 = w;
            } else {
                e.1 = w;
            }
        }
    }
    let edges = pairs
        .into_iter()
        .map(|((i, j), (a, b))| (i, j, a + b - a * b))
        .filter(|e| e.2 > 0.0)
        .collect();
    Ok(FuzzyGraph { n, knn, rho, sigma, directed, edges })
}

/// Low-dimensional similarity `1 / (1 + a·d^(2b))` for squared distance `d2`.
pub fn kernel(d2: f64, a: f64, b: f64) -> f64 {
    1.0 / (1.0 + a * d2.powf(b))
}

/// Least-squares fit of `(a, b)` so the kernel tracks the curve that is 1
/// below `min_dist` and decays as `exp(-(d - min_dist))` beyond it.
pub fn fit_ab(min_dist: f64) -> (f64, f64) {
    let spread = 1.0;
    let xs: Vec<f64> = (0..KERNEL_FIT_POINTS)
        .map(|i| 3.0 * spread * i as f64 / (KERNEL_FIT_POINTS - 1) as f64)
        .collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| if x < min_dist { 1.0 } else { (-(x - min_dist) / spread).exp() })
        .collect();
    let sse = |a: f64, b: f64| -> f64 {
        xs.iter().zip(&ys).map(|(&x, &y)| (1.0 / (1.0 + a * x.powf(2.0 * b)) - y).powi(2)).sum()
    };
    // Levenberg-Marquardt on two parameters.
    let (mut a, mut b, mut lambda) = (1.0f64, 1.0f64, 1e-3f64);
    let mut cost = sse(a, b);
    for _ in 0..500 {
        let (mut jtj, mut jtr) = ([[0.0f64; 2]; 2], [0.0f64; 2]);
        for (&x, &y) in xs.iter().zip(&ys) {
            if x == 0.0 {
                continue;
            }
            let p = x.powf(2.0 * b);
            let den = 1.0 + a * p;
            let r = 1.0 / den - y;
            let ja = -p / (den * den);
            let jb = -a * p * 2.0 * x.ln() / (den * den);
            jtj[0][0] += ja * ja;
            jtj[0][1] += ja * jb;
            jtj[1][1] += jb * jb;
            jtr[0] += ja * r;
            jtr[1] += jb * r;
        }
        jtj[1][0] = jtj[0][1];
        let mut improved = false;
        for _ in 0..30 {
            let m00 = jtj[0][0] * (1.0 + lambda);
            let m11 = jtj[1][1] * (1.0 + lambda);
            let det = m00 * m11 - jtj[0][1] * jtj[1][0];
            if det == 0.0 {
                lambda *= 10.0;
                continue;
            }
            let da = -(m11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
            let db = -(m00 * jtr[1] - jtj[1][0] * jtr[0]) / det;
            let (na, nb) = (a + da, b + db);
            let c = if na > 0.0 && nb > 0.0 { sse(na, nb) } else { f64::INFINITY };
            if c < cost {
                let done = (cost - c) <= 1e-15 * cost.max(1e-300);
                a = na;
                b = nb;
                cost = c;
                lambda = (lambda / 10.0).max(1e-12);
                improved = !done;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (a, b)
}

/// Top-two principal component scores, scaled to [`INIT_EXTENT`].
pub fn pca_init(x: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let n = x.len();
    let d = x.first().map_or(0, Vec::len);
    let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let centered: Vec<Vec<f64>> = x.iter().map(|r| r.iter().zip(&mean).map(|(v, m)| v - m).collect()).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in &centered {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += r[i] * r[j];
            }
        }
    }
    let mut comps: Vec<Vec<f64>> = Vec::new();
    for c in 0..2 {
        // Deterministic start vector, orthogonalized against found components.
        let mut v: Vec<f64> = (0..d).map(|i| 1.0 + ((i + c) % 3) as f64 * 0.1).collect();
        for _ in 0..300 {
            for u in &comps {
                let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
            }
            let mut w: Vec<f64> = (0..d).map(|i| (0..d).map(|j| cov[i][j] * v[j]).sum()).collect();
            for u in &comps {
                let dot: f64 = w.iter().zip(u).map(|(a, b)| a * b).sum();
                w.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
            }
            let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm < 1e-300 {
                break;
            }
            v = w.into_iter().map(|a| a / norm).collect();
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|a| *a /= norm);
        }
        let pivot = v.iter().copied().fold(0.0f64, |m, a| if a.abs() > m.abs() { a } else { m });
        if pivot < 0.0 {
            v.iter_mut().for_each(|a| *a = -*a);
        }
        comps.push(v);
    }
    let mut out: Vec<[f64; 2]> = centered
        .iter()
        .map(|r| {
            let p = |u: &Vec<f64>| r.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
            [p(&comps[0]), p(&comps[1])]
        })
        .collect();
    let extent = out.iter().flat_map(|p| [p[0].abs(), p[1].abs()]).fold(0.0, f64::max);
    if extent > 0.0 {
        for p in &mut out {
            p[0] *= INIT_EXTENT / extent;
            p[1] *= INIT_EXTENT / extent;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub coords: Vec<[f64; 2]>,
    pub a: f64,
    pub b: f64,
    /// Sampled cross-entropy after the first and the final epoch.
    pub loss_first_epoch: f64,
    pub loss_final: f64,
}

fn clip(v: f64) -> f64 {
    v.clamp(-GRADIENT_CLIP, GRADIENT_CLIP)
}

fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Negative-sampling surrogate of the fuzzy cross-entropy: every edge
/// `(i, j, w)` contributes `-w ln v_ij` plus `-w ln(1 - v_ik)` for each of
/// `negatives` uniformly drawn `k`. This is the objective the SGD below
/// descends; the sample is fixed by `seed` so values are comparable across
/// epochs.
pub fn sampled_cross_entropy(fg: &FuzzyGraph, y: &[[f64; 2]], a: f64, b: f64, negatives: usize, seed: u64) -> f64 {
    let eps = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut loss = 0.0;
    for &(i, j, w) in &fg.edges {
        let v = kernel(dist2(&y[i], &y[j]), a, b).clamp(eps, 1.0 - eps);
        loss -= w * v.ln();
        for _ in 0..negatives {
            let k = rng.gen_range(0..fg.n);
            if k == i || k == j {
                continue;
            }
            let v = kernel(dist2(&y[i], &y[k]), a, b).clamp(eps, 1.0 - eps);
            loss -= w * (1.0 - v).ln();
        }
    }
    loss
}

/// Stochastic gradient descent with negative sampling. Single-threaded so a
/// fixed seed gives a bit-identical layout.
pub fn optimize_embedding(fg: &FuzzyGraph, init: Vec<[f64; 2]>, p: &UmapParams, seed: u64) -> Embedding {
    let (a, b) = fit_ab(p.min_dist);
    let n_epochs = p.n_epochs;
    let w_max = fg.edges.iter().map(|e| e.2).fold(0.0, f64::max);
    // Both directions of every edge, dropping those too weak to be sampled.
    let mut heads = Vec::new();
    let mut tails = Vec::new();
    let mut eps = Vec::new();
    for &(i, j, w) in &fg.edges {
        if w < w_max / n_epochs as f64 {
            continue;
        }
        let e = w_max / w;
        heads.extend([i, j]);
        tails.extend([j, i]);
        eps.extend([e, e]);
    }
    let neg_rate = p.negative_samples as f64;
    let eps_neg: Vec<f64> = eps.iter().map(|e| e / neg_rate).collect();
    let mut next = eps.clone();
    let mut next_neg = eps_neg.clone();
    let mut y = init;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let loss_seed = seed ^ 0x5eed_1055;
    let mut loss_first_epoch = f64::NAN;

    for epoch in 0..n_epochs {
        let alpha = p.learning_rate * (1.0 - epoch as f64 / n_epochs as f64);
        let n = epoch as f64;
        for e in 0..heads.len() {
            if next[e] > n {
                continue;
            }
            let (j, k) = (heads[e], tails[e]);
            let d2 = dist2(&y[j], &y[k]);
            let coeff = if d2 > 0.0 {
                -2.0 * a * b * d2.powf(b - 1.0) / (a * d2.powf(b) + 1.0)
            } else {
                0.0
            };
            for c in 0..2 {
                let g = clip(coeff * (y[j][c] - y[k][c]));
                y[j][c] += g * alpha;
                y[k][c] -= g * alpha;
            }
            next[e] += eps[e];

            let n_neg = if neg_rate > 0.0 { ((n - next_neg[e]) / eps_neg[e]).max(0.0) as usize } else { 0 };
            for _ in 0..n_neg {
                let k = rng.gen_range(0..fg.n);
                if k == j {
                    continue;
                }
                let d2 = dist2(&y[j], &y[k]);
                let coeff = if d2 > 0.0 { 2.0 * b / ((0.001 + d2) * (a * d2.powf(b) + 1.0)) } else { 0.0 };
                for c in 0..2 {
                    let g = if coeff > 0.0 { clip(coeff * (y[j][c] - y[k][c])) } else { GRADIENT_CLIP };
                    y[j][c] += g * alpha;
                }
            }
            next_neg[e] += n_neg as f64 * eps_neg[e];
        }
        if epoch == 0 {
            loss_first_epoch = sampled_cross_entropy(fg, &y, a, b, p.negative_samples, loss_seed);
        }
    }
    let loss_final = sampled_cross_entropy(fg, &y, a, b, p.negative_samples, loss_seed);
    Embedding { coords: y, a, b, loss_first_epoch, loss_final }
}

/// Full UMAP: fuzzy graph, PCA initialization, then SGD.
pub fn umap(x: &[Vec<f64>], p: &UmapParams, default_seed: u64) -> Result<Embedding, ClusterError> {
    p.validate().map_err(ClusterError::Params)?;
    let fg = fuzzy_graph(x, p)?;
    Ok(optimize_embedding(&fg, pca_init(x), p, p.seed.unwrap_or(default_seed)))
}

/// Fraction-like score in [0, 1]: 1 when every embedding neighbor is also an
/// input-space neighbor.
pub fn trustworthiness(x: &[Vec<f64>], y: &[[f64; 2]], k: usize) -> f64 {
    let n = x.len();
    assert!(n > 2 * k + 1, "trustworthiness needs n > 2k + 1");
    let yv: Vec<Vec<f64>> = y.iter().map(|p| p.to_vec()).collect();
    let penalty: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            // Rank of every j in input space, 1-based, ties by index.
            let mut order: Vec<(usize, f64)> =
                (0..n).filter(|&j| j != i).map(|j| (j, euclidean(&x[i], &x[j]))).collect();
            order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            let mut rank = vec![0usize; n];
            for (r, &(j, _)) in order.iter().enumerate() {
                rank[j] = r + 1;
            }
            exact_knn_row(&yv, i, k)
                .into_iter()
                .filter(|&j| rank[j] > k)
                .map(|j| (rank[j] - k) as f64)
                .sum::<f64>()
        })
        .sum();
    let (n, k) = (n as f64, k as f64);
    1.0 - 2.0 / (n * k * (2.0 * n - 3.0 * k - 1.0)) * penalty
}

fn exact_knn_row(x: &[Vec<f64>], i: usize, k: usize) -> Vec<usize> {
    let mut d: Vec<(usize, f64)> = (0..x.len()).filter(|&j| j != i).map(|j| (j, euclidean(&x[i], &x[j]))).collect();
    d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    d.into_iter().take(k).map(|e| e.0).collect()
}
