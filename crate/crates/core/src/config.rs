//! Pipeline configuration file.
//!
//! A YAML document. Only `bbox` and `projection` are required; everything
//! else has a default. Relative paths resolve against the directory holding
//! the config file, so a city directory can be moved as a unit.

use crate::cluster::{HdbscanParams, UmapParams};
use crate::features::FeatureConfig;
use crate::interpret::LlmConfig;
use crate::scoring::{IndicatorParams, WeightVector};
use crate::spatial::{GeoCoord, ProjectionParams};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const DEFAULT_OVERPASS_URL: &str = "https://overpass-api.de/api/interpreter";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_yaml::Error),
    #[error("invalid config: {0}")]
    Validation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl BoundingBox {
    pub fn contains(&self, g: GeoCoord) -> bool {
        g.lat >= self.min_lat && g.lat <= self.max_lat && g.lon >= self.min_lon && g.lon <= self.max_lon
    }

    pub fn center(&self) -> GeoCoord {
        GeoCoord::new(
            (self.min_lat + self.max_lat) / 2.0,
            (self.min_lon + self.max_lon) / 2.0,
        )
    }

    /// Overpass `(south,west,north,east)` filter.
    pub fn overpass_filter(&self) -> String {
        format!(
            "({},{},{},{})",
            self.min_lat, self.min_lon, self.max_lat, self.max_lon
        )
    }

    pub fn validate(&self) -> Result<(), String> {
        let corners = [
            GeoCoord::new(self.min_lat, self.min_lon),
            GeoCoord::new(self.max_lat, self.max_lon),
        ];
        if corners.iter().any(|c| !c.is_valid()) {
            return Err(format!("bbox corners out of range: {self:?}"));
        }
        if !(self.min_lat < self.max_lat) {
            return Err(format!(
                "bbox.min_lat ({}) must be < bbox.max_lat ({})",
                self.min_lat, self.max_lat
            ));
        }
        if !(self.min_lon < self.max_lon) {
            return Err(format!(
                "bbox.min_lon ({}) must be < bbox.max_lon ({})",
                self.min_lon, self.max_lon
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    city: Option<String>,
    bbox: BoundingBox,
    projection: ProjectionParams,
    elevation_path: Option<PathBuf>,
    overpass_url: Option<String>,
    cache_dir: Option<PathBuf>,
    output_dir: Option<PathBuf>,
    rng_seed: Option<u64>,
    weights: Option<WeightVector>,
    #[serde(default)]
    indicator_params: IndicatorParams,
    #[serde(default)]
    llm: LlmConfig,
    #[serde(default)]
    umap: UmapParams,
    #[serde(default)]
    hdbscan: HdbscanParams,
    #[serde(default)]
    features: FeatureConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    /// Provenance label attached to every bridge from this config.
    pub city: String,
    pub bbox: BoundingBox,
    pub projection: ProjectionParams,
    pub elevation_path: Option<PathBuf>,
    pub overpass_url: String,
    pub cache_dir: PathBuf,
    pub output_dir: PathBuf,
    pub rng_seed: u64,
    pub weights: WeightVector,
    pub indicator_params: IndicatorParams,
    pub llm: LlmConfig,
    pub umap: UmapParams,
    pub hdbscan: HdbscanParams,
    pub features: FeatureConfig,
}

pub fn load_config(path: &Path) -> Result<PipelineConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let base = if base.as_os_str().is_empty() { Path::new(".") } else { base };
    let default_city = std::fs::canonicalize(base)
        .ok()
        .and_then(|p| p.file_name().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "city".to_string());
    PipelineConfig::from_yaml_str(&text, base, &default_city)
}

impl PipelineConfig {
    pub fn from_yaml_str(
        text: &str,
        base_dir: &Path,
        default_city: &str,
    ) -> Result<Self, ConfigError> {
        let raw: RawConfig = serde_yaml::from_str(text)?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base_dir.join(p) };
        let cfg = PipelineConfig {
            city: raw
                .city
                .map(|c| c.trim().to_string())
                .filter(|c| !c.is_empty())
                .unwrap_or_else(|| default_city.to_string()),
            bbox: raw.bbox,
            projection: raw.projection,
            elevation_path: raw.elevation_path.map(resolve),
            overpass_url: raw
                .overpass_url
                .unwrap_or_else(|| DEFAULT_OVERPASS_URL.to_string()),
            cache_dir: resolve(raw.cache_dir.unwrap_or_else(|| PathBuf::from("cache"))),
            output_dir: resolve(raw.output_dir.unwrap_or_else(|| PathBuf::from("output"))),
            rng_seed: raw.rng_seed.unwrap_or(42),
            weights: raw.weights.unwrap_or_default(),
            indicator_params: raw.indicator_params,
            llm: raw.llm,
            umap: raw.umap,
            hdbscan: raw.hdbscan,
            features: raw.features,
        };
        cfg.validate().map_err(ConfigError::Validation)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.bbox.validate()?;
        self.projection.validate()?;
        self.weights.validate()?;
        self.indicator_params.validate()?;
        self.llm.validate()?;
        self.umap.validate()?;
        self.hdbscan.validate()?;
        self.features.validate()?;
        if self.city.contains(['/', '\\', ',']) {
            return Err(format!("city label {:?} may not contain '/', '\\' or ','", self.city));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
bbox: {min_lat: 35.6, min_lon: 139.4, max_lat: 35.7, max_lon: 139.5}
projection: {lat0: 36.0, lon0: 139.8333333333, k0: 0.9999}
";

    fn parse(extra: &str) -> Result<PipelineConfig, ConfigError> {
        PipelineConfig::from_yaml_str(&format!("{MINIMAL}{extra}"), Path::new("/tmp/x"), "tama")
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg.weights.as_array(), [0.2; 5]);
        assert_eq!(cfg.city, "tama");
        assert_eq!(cfg.cache_dir, PathBuf::from("/tmp/x/cache"));
        assert_eq!(cfg.indicator_params.transit.theta_m, 500.0);
        assert_eq!(cfg.llm.temperature, 0.3);
        assert_eq!(cfg.umap.n_neighbors, 15);
        assert_eq!(cfg.hdbscan.min_cluster_size, 20);
    }

    #[test]
    fn hospital_emphasis_weights_accepted() {
        let cfg = parse(
            "weights: {transit: 0.15, hospital: 0.4, isolation: 0.15, supply: 0.15, green: 0.15}\n",
        )
        .unwrap();
        let sum: f64 = cfg.weights.as_array().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn weights_not_summing_to_one_rejected() {
        let err = parse("weights: {transit: 0.5, hospital: 0.5, isolation: 0.5, supply: 0, green: 0}\n")
            .unwrap_err();
        assert!(matches!(err, ConfigError::Validation(_)), "{err}");
    }

    #[test]
    fn inverted_bbox_rejected() {
        let text = "
bbox: {min_lat: 35.7, min_lon: 139.4, max_lat: 35.6, max_lon: 139.5}
projection: {lat0: 36.0, lon0: 139.83, k0: 0.9999}
";
        let err = PipelineConfig::from_yaml_str(text, Path::new("."), "c").unwrap_err();
        assert!(err.to_string().contains("min_lat"), "{err}");
    }

    #[test]
    fn malformed_yaml_is_parse_error() {
        let err = PipelineConfig::from_yaml_str("bbox: [1, 2", Path::new("."), "c").unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
        let err = parse("unknown_key: 3\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
    }

    #[test]
    fn nested_indicator_override() {
        let cfg = parse("indicator_params:\n  transit: {n_norm: 300}\n  supply: {food_weight: 2.0}\n").unwrap();
        assert_eq!(cfg.indicator_params.transit.n_norm, 300.0);
        assert_eq!(cfg.indicator_params.transit.sample_cap, 300);
        assert_eq!(cfg.indicator_params.supply.food_weight, 2.0);
        let err = parse("indicator_params:\n  transit: {theta_m: -1}\n").unwrap_err();
        assert!(matches!(err, ConfigError::Validation(_)));
    }
}
