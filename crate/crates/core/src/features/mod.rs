//! Per-bridge feature vectors: extraction, variance filtering, z-scores and
//! outlier flags.

mod extract;
mod matrix;
mod registry;

pub use extract::*;
pub use matrix::*;
pub use registry::*;
