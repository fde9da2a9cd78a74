//! Acceptance criteria. Each prints one PASS/FAIL line; any failure exits
//! nonzero.

mod common;

use bridgegraph_core::cluster::{
    core_distances, exact_knn, hdbscan, mst, mutual_reachability, trustworthiness, umap, HdbscanParams, UmapParams,
    NOISE,
};
use bridgegraph_core::features::{flag_outliers, zscore_normalize, FeatureMatrix, OUTLIER_Z};
use bridgegraph_core::hetgraph::{shortest_path, ClosureMask, StreetGraph};
use bridgegraph_core::interpret::{
    generate_report, generate_reports, mock_reply, quality_from_lengths, quality_metrics, HttpBackend, LlmConfig,
};
use bridgegraph_core::pipeline::fixtures::{FixtureCity, NAMED_BRIDGES};
use bridgegraph_core::pipeline::{CLUSTER_STATS_FILE, MANIFEST_FILE};
use bridgegraph_core::scoring::{
    composite_score, green_space_score, hospital_access_score, isolation_risk_score, supply_chain_score,
    transit_desert_score, IndicatorParams, ScoringContext, WeightVector,
};
use bridgegraph_core::{run, PlanarCoord, RunManifest, RunOptions, SpatialIndex};
use common::{blobs, deterministic_outputs, files_under, fixture_config, mock_llm, oracle, toy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::atomic::Ordering;
use std::time::{Duration, Instant};

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Check {
    ensure(elapsed.as_secs_f64() < limit_s, || format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64()))
}

fn spatial_oracle() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for inst in 0..50 {
        let n = rng.gen_range(1..=2000);
        // Integer coordinates on a small grid force distance ties.
        let side = rng.gen_range(5..60) as f64;
        let pts: Vec<PlanarCoord> = (0..n)
            .map(|_| PlanarCoord::new(rng.gen_range(0.0..side).floor(), rng.gen_range(0.0..side).floor()))
            .collect();
        let idx = SpatialIndex::with_leaf_capacity(pts.clone(), rng.gen_range(1..20));
        for _ in 0..20 {
            let q = PlanarCoord::new(rng.gen_range(-5.0..side + 5.0).floor(), rng.gen_range(-5.0..side + 5.0).floor());
            for k in [1, 3, 5] {
                let got: Vec<usize> = idx.knn(q, k).into_iter().map(|nb| nb.index).collect();
                let want = oracle::brute_knn(&pts, q, k);
                ensure(got == want, || format!("instance {inst}: knn k={k} {got:?} vs {want:?}"))?;
            }
            let r = rng.gen_range(0..10) as f64;
            let got = idx.radius(q, r);
            let want = oracle::brute_radius(&pts, q, r);
            ensure(got == want, || format!("instance {inst}: radius {r} differs"))?;
        }
    }
    within(t.elapsed(), 10.0)
}

fn path_oracle() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for inst in 0..100 {
        let n = rng.gen_range(2..=200);
        let m = rng.gen_range(n - 1..=3 * n);
        // Integer weights keep every path sum exact.
        let raw: Vec<(usize, usize, f64)> = (0..m)
            .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(1..100) as f64))
            .filter(|e| e.0 != e.1)
            .collect();
        let g = StreetGraph::from_weighted(n, &raw);
        let edges: Vec<(usize, usize, f64)> = g.edges.iter().map(|e| (e.u, e.v, e.length)).collect();
        let blocked: Vec<usize> = (0..edges.len()).filter(|_| rng.gen_bool(0.15)).collect();
        let mask = ClosureMask::from_edges(blocked);
        let kept: Vec<(usize, usize, f64)> =
            edges.iter().enumerate().filter(|(i, _)| !mask.contains(*i)).map(|(_, e)| *e).collect();
        let deleted = StreetGraph::from_weighted(n, &kept);
        let all: Vec<usize> = (0..n).collect();
        for _ in 0..3 {
            let s = rng.gen_range(0..n);
            let open = shortest_path(&g, s, &all, None);
            let closed = shortest_path(&g, s, &all, Some(&mask));
            let copy = shortest_path(&deleted, s, &all, None);
            ensure(open == oracle::bellman_ford(n, &edges, s), || format!("graph {inst}: unmasked differs"))?;
            ensure(closed == oracle::bellman_ford(n, &kept, s), || format!("graph {inst}: masked differs"))?;
            ensure(closed == copy, || format!("graph {inst}: masked vs deleted copy differs"))?;
        }
    }
    within(t.elapsed(), 30.0)
}

fn indicator_fixtures() -> Check {
    let p = IndicatorParams::default();
    let seed = 42;
    let close = |got: f64, want: f64, name: &str| ensure((got - want).abs() < 1e-9, || format!("{name}: {got} vs {want}"));
    close(transit_desert_score(&toy::transit_toy(), 0, &p, seed), 0.2, "transit")?;
    close(hospital_access_score(&toy::hospital_toy(), 0, &p, seed), 40.0, "hospital")?;
    close(isolation_risk_score(&toy::isolation_toy(), 0, &p, seed), 10.0, "isolation")?;
    close(supply_chain_score(&toy::supply_toy("supermarket"), 0, &p, seed), 30.0, "supply food")?;
    close(supply_chain_score(&toy::supply_toy("clothes"), 0, &p, seed), 20.0, "supply other")?;
    close(green_space_score(&toy::green_toy(), 0, &p, seed), 20.0, "green")?;
    let c = composite_score([8.72, 4.38, 17.24, 0.65, 4.19], &WeightVector::equal());
    ensure((c - 7.036).abs() <= 0.005, || format!("composite {c}"))?;
    ensure((c - 7.04).abs() < 0.005, || format!("composite {c} does not round to 7.04"))
}

fn monotonicity() -> Check {
    let p = oracle::small_params();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut pairs = 0;
    let mut violations = Vec::new();
    while pairs < 1000 {
        let n = rng.gen_range(3..30);
        let h = oracle::random_hetero(&mut rng, n);
        let ctx = ScoringContext::new(&h, &p, 4);
        for _ in 0..10 {
            let (p1, p2) = (rng.gen_range(0.0..0.3), rng.gen_range(0.0..0.3));
            let small = oracle::random_mask(&mut rng, &h, p1);
            let extra = oracle::random_mask(&mut rng, &h, p2);
            let m = ClosureMask::from_edges(small.clone());
            let m2 = ClosureMask::from_edges(small.into_iter().chain(extra));
            let b = rng.gen_range(0..h.bridges.len());
            let (lo, hi) = (ctx.indicators(b, &m), ctx.indicators(b, &m2));
            for i in 0..5 {
                if hi[i] < lo[i] {
                    violations.push(format!("pair {pairs} indicator {i}: {} then {}", lo[i], hi[i]));
                }
            }
            pairs += 1;
        }
    }
    ensure(violations.is_empty(), || format!("{} violations, first: {}", violations.len(), violations[0]))
}

fn matrix(rows: Vec<Vec<f64>>) -> FeatureMatrix {
    let n = rows.len();
    let m = rows[0].len();
    FeatureMatrix::new((0..n as i64).collect(), vec!["c".into(); n], (0..m).map(|j| format!("f{j}")).collect(), rows)
        .unwrap()
}

fn normalization() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let n = rng.gen_range(2..200);
        let m = rng.gen_range(1..20);
        let scale: Vec<f64> = (0..m).map(|_| 10f64.powf(rng.gen_range(-3.0..4.0))).collect();
        let rows: Vec<Vec<f64>> =
            (0..n).map(|_| scale.iter().map(|s| s * rng.gen_range(-1.0..1.0) + s).collect()).collect();
        let z = zscore_normalize(&matrix(rows));
        for j in 0..z.n_cols() {
            let col = z.column(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            let sd = (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
            ensure(mean.abs() < 1e-9, || format!("column mean {mean}"))?;
            ensure((sd - 1.0).abs() < 1e-9, || format!("column sd {sd}"))?;
        }
    }
    let z = zscore_normalize(&matrix(vec![vec![1.0], vec![2.0], vec![3.0]]));
    let want = 1.5f64.sqrt();
    let got = z.column(0);
    ensure(
        (got[0] + want).abs() < 1e-9 && got[1].abs() < 1e-12 && (got[2] - want).abs() < 1e-9,
        || format!("[1,2,3] -> {got:?}"),
    )?;
    ensure((want - 1.2247).abs() < 1e-4, || format!("{want}"))?;
    let hi = OUTLIER_Z + 0.5;
    let three = vec![hi, -hi, hi, 0.0, OUTLIER_Z];
    let four = vec![hi, -hi, hi, -hi, OUTLIER_Z];
    let flags = flag_outliers(&matrix(vec![three, four]));
    ensure(flags == vec![false, true], || format!("outlier flags {flags:?}"))
}

/// Trustworthiness from neighbor ranks counted pairwise, with no sorting.
fn trustworthiness_oracle(x: &[Vec<f64>], y: &[[f64; 2]], k: usize) -> f64 {
    let n = x.len();
    let dx = |i: usize, j: usize| x[i].iter().zip(&x[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    let dy = |i: usize, j: usize| (y[i][0] - y[j][0]).powi(2) + (y[i][1] - y[j][1]).powi(2);
    let before = |d: &dyn Fn(usize, usize) -> f64, i: usize, l: usize, j: usize| {
        let (a, b) = (d(i, l), d(i, j));
        a < b || (a == b && l < j)
    };
    let mut penalty = 0.0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let y_rank = 1 + (0..n).filter(|&l| l != i && l != j && before(&dy, i, l, j)).count();
            if y_rank > k {
                continue;
            }
            let x_rank = 1 + (0..n).filter(|&l| l != i && l != j && before(&dx, i, l, j)).count();
            if x_rank > k {
                penalty += (x_rank - k) as f64;
            }
        }
    }
    let (n, k) = (n as f64, k as f64);
    1.0 - 2.0 / (n * k * (2.0 * n - 3.0 * k - 1.0)) * penalty
}

fn umap_criteria() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let centers: Vec<Vec<f64>> = (0..3).map(|c| (0..10).map(|d| if d == c { 10.0 } else { 0.0 }).collect()).collect();
    let (x, _) = blobs(&centers, 100, 1.0, &mut rng);
    let p = UmapParams { n_neighbors: 15, ..Default::default() };
    let a = umap(&x, &p, 7).map_err(|e| e.to_string())?;
    let b = umap(&x, &p, 7).map_err(|e| e.to_string())?;
    let bits = |e: &[[f64; 2]]| e.iter().flat_map(|c| [c[0].to_bits(), c[1].to_bits()]).collect::<Vec<_>>();
    ensure(bits(&a.coords) == bits(&b.coords), || "same seed gave different layouts".into())?;
    let tw = trustworthiness_oracle(&x, &a.coords, 15);
    let tw_lib = trustworthiness(&x, &a.coords, 15);
    ensure((tw - tw_lib).abs() < 1e-12, || format!("trustworthiness {tw_lib} vs oracle {tw}"))?;
    ensure(tw >= 0.90, || format!("trustworthiness {tw}"))?;
    let mut decreased = 0;
    let mut losses = Vec::new();
    for seed in 0..5 {
        let e = if seed == 0 { a.clone() } else { umap(&x, &p, 100 + seed).map_err(|e| e.to_string())? };
        losses.push((e.loss_first_epoch, e.loss_final));
        decreased += (e.loss_final < e.loss_first_epoch) as usize;
    }
    ensure(decreased >= 4, || format!("loss decreased in {decreased}/5 seeds: {losses:?}"))?;
    within(t.elapsed(), 60.0)
}

fn kruskal_weight(x: &[Vec<f64>], core: &[f64]) -> f64 {
    let n = x.len();
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let d = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            edges.push((d.max(core[i]).max(core[j]), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    let mut total = 0.0;
    for (w, i, j) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a] = b;
            total += w;
        }
    }
    total
}

fn hdbscan_criteria() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = HdbscanParams { min_cluster_size: 20, ..Default::default() };
    // Blob spread 1, centers 10 spreads apart.
    let (x, truth) = blobs(&[vec![0.0, 0.0], vec![10.0, 0.0]], 25, 1.0, &mut rng);
    let a = hdbscan(&x, &p);
    ensure(a.n_clusters() == 2 && a.noise_count() == 0, || {
        format!("{} clusters, {} noise", a.n_clusters(), a.noise_count())
    })?;
    let same = |i: usize, j: usize| (a.labels[i] == a.labels[j]) == (truth[i] == truth[j]);
    ensure((0..50).all(|i| (0..50).all(|j| same(i, j))), || "clusters do not match blobs".into())?;

    let tiny: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, (i * i) as f64]).collect();
    let t = hdbscan(&tiny, &p);
    ensure(t.labels.iter().all(|&l| l == NOISE), || format!("10 points: {:?}", t.labels))?;

    let pair = vec![vec![0.0], vec![1.0]];
    let d = mutual_reachability(&pair, &[10.0, 9.0], 0, 1);
    ensure(d == 10.0, || format!("mutual reachability {d}"))?;

    for (n, dim) in [(30, 2), (200, 3), (500, 5)] {
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(0.0..10.0)).collect()).collect();
        let core = core_distances(&x, 5);
        let tree = mst(&x, &core);
        ensure(tree.len() == n - 1, || format!("n={n}: {} tree edges", tree.len()))?;
        let w: f64 = tree.iter().map(|e| e.2).sum();
        let want = kruskal_weight(&x, &core);
        ensure((w - want).abs() <= 1e-9 * want.max(1.0), || format!("n={n}: MST weight {w} vs Kruskal {want}"))?;
    }
    // Core distance is the k-th neighbor excluding the point itself.
    let knn = exact_knn(&tiny, 5);
    let core = core_distances(&tiny, 5);
    ensure((0..10).all(|i| core[i] == knn[i][4].1), || "core distance is not the 5th neighbor".into())
}

fn interpret_criteria() -> Check {
    let prompt = |id: i64| {
        format!("Cluster ID: {id}\nNumber of bridges: 10\nCity composition: synthetic-small 10\nKey features (z-score):\n- degree: 1.10\n- elevation: -0.40\n")
    };
    let good = mock_llm::serve(|_, p| mock_reply(p, None));
    let cfg = LlmConfig { endpoint: good.url.clone(), timeout_s: 10.0, max_in_flight: 4, ..Default::default() };
    let prompts: Vec<(i64, String)> = (0..19).map(|i| (i, prompt(i))).collect();
    let reports = generate_reports(&HttpBackend::new(&cfg), &cfg, &prompts, 0.3);
    let q = quality_metrics(&reports, 0.3).map_err(|e| e.to_string())?;
    ensure(q.valid == 19 && q.attempted == 19, || format!("completeness {}/{}", q.valid, q.attempted))?;

    let four = mock_llm::serve(|_, p| mock_reply(p, Some(3)));
    let cfg = LlmConfig { endpoint: four.url.clone(), timeout_s: 10.0, ..Default::default() };
    let r = generate_report(&HttpBackend::new(&cfg), &cfg, 0, &prompt(0), 0.3);
    let calls = four.requests.load(Ordering::SeqCst);
    ensure(!r.is_valid() && r.attempts == 2 && calls == 2, || {
        format!("valid={} attempts={} requests={calls}", r.is_valid(), r.attempts)
    })?;

    let q = quality_from_lengths(&[101, 672], 2, 0.3).map_err(|e| e.to_string())?;
    ensure((q.length_variance_ratio - 6.65).abs() <= 0.01, || format!("ratio {}", q.length_variance_ratio))
}

const ARTIFACTS: &[&str] = &[
    "ingest.json",
    "graph.json",
    "scores.json",
    "bridges_scored.csv",
    "bridges.geojson",
];
const SHARED: &[&str] = &[
    "features.csv",
    "feature_stats.csv",
    "outliers.csv",
    "umap_embedding.csv",
    "cluster_statistics.csv",
    "quality_metrics.csv",
    "plots/umap_clusters.svg",
    "plots/umap_cities.svg",
    "plots/cluster_sizes.svg",
    "plots/radar.svg",
    MANIFEST_FILE,
];

fn check_artifacts(out: &std::path::Path, city: &str) -> Check {
    for f in ARTIFACTS {
        let p = out.join("cities").join(city).join(f);
        ensure(p.exists(), || format!("missing {}", p.display()))?;
    }
    for f in SHARED {
        ensure(out.join(f).exists(), || format!("missing {f}"))?;
    }
    let files = files_under(out);
    ensure(files.keys().filter(|k| k.starts_with(&format!("plots/score_map_{city}_"))).count() == 6, || {
        "score maps missing".into()
    })?;
    ensure(files.keys().any(|k| k.starts_with("reports/cluster_")), || "no reports".into())?;
    let m = RunManifest::load(&out.join(MANIFEST_FILE)).ok_or("manifest unreadable")?;
    let listed: std::collections::BTreeSet<&str> = m.outputs().collect();
    for f in files.keys().filter(|k| k.as_str() != MANIFEST_FILE) {
        ensure(listed.contains(f.as_str()), || format!("{f} not in manifest"))?;
    }
    let rows = std::fs::read_to_string(out.join("cities").join(city).join("bridges_scored.csv")).map_err(|e| e.to_string())?;
    ensure(rows.lines().count() == NAMED_BRIDGES + 1, || format!("{} scored rows", rows.lines().count() - 1))
}

fn end_to_end() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = fixture_config(FixtureCity::SyntheticSmall, dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let opts = |out: &std::path::Path| RunOptions { out: Some(out.to_path_buf()), ..Default::default() };
    let t = Instant::now();
    run(&[cfg.clone()], &opts(&a)).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    check_artifacts(&a, "synthetic-small")?;
    let graph = std::fs::read_to_string(a.join("cities/synthetic-small/graph.json")).map_err(|e| e.to_string())?;
    let v: serde_json::Value = serde_json::from_str(&graph).map_err(|e| e.to_string())?;
    let n_street = v["hetero"]["n_street"].as_u64().unwrap_or(0);
    ensure((400..=700).contains(&n_street), || format!("{n_street} street nodes"))?;
    run(&[cfg], &opts(&b)).map_err(|e| e.to_string())?;
    let (x, y) = (deterministic_outputs(&a), deterministic_outputs(&b));
    ensure(x.keys().eq(y.keys()), || "re-run wrote a different file set".into())?;
    for (k, bytes) in &x {
        ensure(&y[k] == bytes, || format!("{k} differs between runs"))?;
    }
    within(elapsed, 60.0)
}

fn config_transfer() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let small = bridgegraph_core::pipeline::fixtures::write_fixture(FixtureCity::SyntheticSmall, &dir.path().join("s"))
        .map_err(|e| e.to_string())?;
    let second = bridgegraph_core::pipeline::fixtures::write_fixture(FixtureCity::SyntheticSecond, &dir.path().join("t"))
        .map_err(|e| e.to_string())?;
    let read = |p: &std::path::Path| std::fs::read_to_string(p).unwrap_or_default();
    let (a, b) = (read(&small), read(&second));
    let keys: Vec<&str> = a
        .lines()
        .zip(b.lines())
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.split(':').next().unwrap_or("").trim())
        .collect();
    ensure(a.lines().count() == b.lines().count(), || "config shapes differ".into())?;
    ensure(keys.iter().all(|k| ["city", "bbox", "projection"].contains(k)), || format!("configs differ in {keys:?}"))?;
    let cfg = bridgegraph_core::load_config(&second).map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    run(&[cfg], &RunOptions { out: Some(out.clone()), ..Default::default() }).map_err(|e| e.to_string())?;
    check_artifacts(&out, "synthetic-second")?;
    ensure(out.join(CLUSTER_STATS_FILE).exists(), || "no clusters".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("spatial_oracle_equivalence", spatial_oracle),
        ("path_oracle_equivalence", path_oracle),
        ("indicator_fixtures", indicator_fixtures),
        ("monotonicity_fuzz", monotonicity),
        ("normalization_properties", normalization),
        ("umap", umap_criteria),
        ("hdbscan", hdbscan_criteria),
        ("interpret_mock_server", interpret_criteria),
        ("end_to_end_synthetic", end_to_end),
        ("config_only_transfer", config_transfer),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(()) => println!("PASS {:>2} {name} ({secs:.2} s)", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2} s): {e}", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
