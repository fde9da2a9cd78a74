//! Inputs shared by the criterion benches.

use bridgegraph_core::hetgraph::HeteroGraph;
use bridgegraph_core::ingest::{ingest, ElevationRaster};
use bridgegraph_core::pipeline::fixtures::{write_fixture, FixtureCity};
use bridgegraph_core::{load_config, PipelineConfig, PlanarCoord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fixture city built through the real ingest path from a warm cache in a
/// scratch directory.
pub fn fixture_graph(city: FixtureCity) -> (PipelineConfig, HeteroGraph) {
    let dir = std::env::temp_dir().join(format!("bridgegraph-bench-{}-{}", city.name(), std::process::id()));
    let path = write_fixture(city, &dir).expect("write fixture");
    let cfg = load_config(&path).expect("fixture config");
    let data = ingest(&cfg).expect("cached ingest");
    let raster = cfg.elevation_path.as_ref().map(|p| ElevationRaster::load(p).expect("raster"));
    let h = HeteroGraph::build(&data, &cfg.projection, raster.as_ref(), &cfg.indicator_params.snap);
    let _ = std::fs::remove_dir_all(&dir);
    (cfg, h)
}

pub fn random_points(n: usize, extent: f64, seed: u64) -> Vec<PlanarCoord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| PlanarCoord::new(rng.gen_range(0.0..extent), rng.gen_range(0.0..extent)))
        .collect()
}

/// `k` well-separated uniform blobs in `dim` dimensions, `per` points each.
pub fn blobs(k: usize, per: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k * per)
        .map(|i| {
            let c = i / per;
            (0..dim)
                .map(|d| if d == c % dim { 10.0 * (1 + c / dim) as f64 } else { 0.0 } + rng.gen_range(-1.0..1.0))
                .collect()
        })
        .collect()
}
