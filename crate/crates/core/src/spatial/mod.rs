//! Planar projection and exact nearest-neighbour queries.

mod kdtree;
mod projection;

pub use kdtree::{Neighbor, SpatialIndex, DEFAULT_LEAF_CAPACITY};
pub use projection::{haversine_m, ProjectionError, ProjectionParams, GRS80_A, GRS80_INV_F};

use serde::{Deserialize, Serialize};

/// WGS84 / JGD2011 geographic coordinate in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoCoord {
    pub lat: f64,
    pub lon: f64,
}

impl GeoCoord {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon)
    }
}

/// Projected coordinate in meters (x = easting, y = northing).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarCoord {
    pub x: f64,
    pub y: f64,
}

impl PlanarCoord {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Squared Euclidean distance. All neighbour ordering is done on this
    /// quantity so that index queries and linear scans agree bit for bit.
    #[inline]
    pub fn distance_sq(&self, other: &PlanarCoord) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn distance(&self, other: &PlanarCoord) -> f64 {
        self.distance_sq(other).sqrt()
    }

    #[inline]
    pub(crate) fn axis(&self, dim: usize) -> f64 {
        if dim == 0 {
            self.x
        } else {
            self.y
        }
    }
}
