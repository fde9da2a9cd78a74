#![allow(dead_code)]

pub mod mock_llm;
pub mod oracle;
pub mod toy;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Standard normal draw (Box-Muller).
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Isotropic Gaussian blobs around `centers`, `per` points each.
pub fn blobs(centers: &[Vec<f64>], per: usize, sd: f64, rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per {
            x.push(center.iter().map(|m| m + sd * gaussian(rng)).collect());
            y.push(c);
        }
    }
    (x, y)
}

use bridgegraph_core::pipeline::fixtures::{write_fixture, FixtureCity};
use bridgegraph_core::{load_config, PipelineConfig};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Writes a fixture city under `dir` and loads its config.
pub fn fixture_config(city: FixtureCity, dir: &Path) -> PipelineConfig {
    let path = write_fixture(city, dir).expect("write fixture");
    load_config(&path).expect("fixture config loads")
}

/// Every regular file under `root`, keyed by relative path.
pub fn files_under(root: &Path) -> BTreeMap<String, PathBuf> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, PathBuf>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, p);
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Files whose bytes must not depend on wall-clock time.
pub fn deterministic_outputs(root: &Path) -> BTreeMap<String, Vec<u8>> {
    files_under(root)
        .into_iter()
        .filter(|(k, _)| k.ends_with(".csv") || k.ends_with(".svg") || k.ends_with(".geojson"))
        .map(|(k, p)| (k, std::fs::read(p).unwrap()))
        .collect()
}
