//! UMAP embedding, HDBSCAN clustering and cluster profiles.

mod hdbscan;
mod profile;
mod umap;

pub use hdbscan::*;
pub use profile::*;
pub use umap::*;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("need at least {needed} points, got {n}")]
    TooFewPoints { n: usize, needed: usize },
    #[error("invalid parameters: {0}")]
    Params(String),
}
