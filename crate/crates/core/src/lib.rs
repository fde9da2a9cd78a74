//! Bridge closure impact scoring and archetype discovery over OpenStreetMap
//! data.
//!
//! Stages: [`ingest`] fetches and caches OSM data, [`hetgraph`] builds the
//! routing graph, [`scoring`] simulates closures, [`features`] assembles
//! per-bridge vectors, [`cluster`] embeds and clusters them, [`interpret`]
//! asks an LLM to describe each cluster and [`pipeline`] ties it together.

pub mod cluster;
pub mod config;
pub mod features;
pub mod hetgraph;
pub mod ingest;
pub mod interpret;
pub mod pipeline;
pub mod scoring;
pub mod spatial;

pub use config::{load_config, BoundingBox, ConfigError, PipelineConfig};
pub use spatial::{GeoCoord, PlanarCoord, ProjectionParams, SpatialIndex};
pub use pipeline::{run, PipelineError, RunManifest, RunOptions, Stage};
