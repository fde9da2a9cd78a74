//! Transverse Mercator on the GRS80 ellipsoid.
//!
//! Forward and inverse mappings use the 6th-order Krüger series in the third
//! flattening `n`. Inside one plane-rectangular zone (a few degrees wide) the
//! series error is well below a millimetre.

use super::{GeoCoord, PlanarCoord};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const GRS80_A: f64 = 6_378_137.0;
pub const GRS80_INV_F: f64 = 298.257_222_101;

/// Mean earth radius used by the haversine helper.
const MEAN_EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Longitudes farther than this from the central meridian are rejected.
const MAX_LON_OFFSET_DEG: f64 = 4.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error("longitude {lon} is {offset:.3} degrees from the central meridian {lon0} (limit {MAX_LON_OFFSET_DEG})")]
    OutOfDomain { lon: f64, lon0: f64, offset: f64 },
    #[error("invalid geographic coordinate ({lat}, {lon})")]
    InvalidCoord { lat: f64, lon: f64 },
}

/// Natural origin, scale and false origin of a Transverse Mercator zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionParams {
    pub lat0: f64,
    pub lon0: f64,
    pub k0: f64,
    #[serde(default)]
    pub false_easting: f64,
    #[serde(default)]
    pub false_northing: f64,
}

impl ProjectionParams {
    /// JGD2011 plane rectangular zone IX (EPSG:6677).
    pub fn jgd2011_zone9() -> Self {
        Self {
            lat0: 36.0,
            lon0: 139.0 + 50.0 / 60.0,
            k0: 0.9999,
            false_easting: 0.0,
            false_northing: 0.0,
        }
    }

    /// JGD2011 plane rectangular zone X (EPSG:6678).
    pub fn jgd2011_zone10() -> Self {
        Self {
            lat0: 40.0,
            lon0: 140.0 + 50.0 / 60.0,
            k0: 0.9999,
            false_easting: 0.0,
            false_northing: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.k0 > 0.9 && self.k0 < 1.1) {
            return Err(format!("projection.k0 = {} outside (0.9, 1.1)", self.k0));
        }
        let origin = GeoCoord::new(self.lat0, self.lon0);
        if !origin.is_valid() {
            return Err(format!("projection origin ({}, {}) invalid", self.lat0, self.lon0));
        }
        if !self.false_easting.is_finite() || !self.false_northing.is_finite() {
            return Err("projection false origin must be finite".into());
        }
        Ok(())
    }

    /// Forward projection: geographic degrees to planar meters.
    pub fn project(&self, g: GeoCoord) -> Result<PlanarCoord, ProjectionError> {
        if !g.is_valid() {
            return Err(ProjectionError::InvalidCoord { lat: g.lat, lon: g.lon });
        }
        let dlon = wrap_degrees(g.lon - self.lon0);
        if dlon.abs() > MAX_LON_OFFSET_DEG {
            return Err(ProjectionError::OutOfDomain {
                lon: g.lon,
                lon0: self.lon0,
                offset: dlon.abs(),
            });
        }
        let s = Series::grs80();
        let chi = s.conformal_lat(g.lat.to_radians());
        let lam = dlon.to_radians();
        let xi_p = chi.tan().atan2(lam.cos());
        let eta_p = (lam.sin() / (chi.tan().powi(2) + lam.cos().powi(2)).sqrt()).asinh();
        let (xi, eta) = s.forward(xi_p, eta_p);
        let xi0 = s.meridian_xi(self.lat0.to_radians());
        Ok(PlanarCoord {
            x: self.false_easting + self.k0 * s.rect_radius * eta,
            y: self.false_northing + self.k0 * s.rect_radius * (xi - xi0),
        })
    }

    /// Inverse projection: planar meters back to geographic degrees.
    pub fn unproject(&self, p: PlanarCoord) -> GeoCoord {
        let s = Series::grs80();
        let xi0 = s.meridian_xi(self.lat0.to_radians());
        let xi = (p.y - self.false_northing) / (self.k0 * s.rect_radius) + xi0;
        let eta = (p.x - self.false_easting) / (self.k0 * s.rect_radius);
        let (xi_p, eta_p) = s.inverse(xi, eta);
        let chi = (xi_p.sin() / eta_p.cosh()).asin();
        let lam = eta_p.sinh().atan2(xi_p.cos());
        let phi = s.geodetic_lat(chi);
        GeoCoord {
            lat: phi.to_degrees(),
            lon: self.lon0 + lam.to_degrees(),
        }
    }
}

fn wrap_degrees(d: f64) -> f64 {
    let mut v = d % 360.0;
    if v > 180.0 {
        v -= 360.0;
    } else if v < -180.0 {
        v += 360.0;
    }
    v
}

struct Series {
    e: f64,
    rect_radius: f64,
    alpha: [f64; 6],
    beta: [f64; 6],
}

impl Series {
    fn grs80() -> Self {
        let f = 1.0 / GRS80_INV_F;
        let e = (f * (2.0 - f)).sqrt();
        let n = f / (2.0 - f);
        let n2 = n * n;
        let n3 = n2 * n;
        let n4 = n3 * n;
        let n5 = n4 * n;
        let n6 = n5 * n;
        let rect_radius = GRS80_A / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
        let alpha = [
            n / 2.0 - 2.0 * n2 / 3.0 + 5.0 * n3 / 16.0 + 41.0 * n4 / 180.0 - 127.0 * n5 / 288.0
                + 7891.0 * n6 / 37800.0,
            13.0 * n2 / 48.0 - 3.0 * n3 / 5.0 + 557.0 * n4 / 1440.0 + 281.0 * n5 / 630.0
                - 1_983_433.0 * n6 / 1_935_360.0,
            61.0 * n3 / 240.0 - 103.0 * n4 / 140.0 + 15061.0 * n5 / 26880.0
                + 167_603.0 * n6 / 181_440.0,
            49561.0 * n4 / 161_280.0 - 179.0 * n5 / 168.0 + 6_601_661.0 * n6 / 7_257_600.0,
            34729.0 * n5 / 80640.0 - 3_418_889.0 * n6 / 1_995_840.0,
            212_378_941.0 * n6 / 319_334_400.0,
        ];
        let beta = [
            n / 2.0 - 2.0 * n2 / 3.0 + 37.0 * n3 / 96.0 - n4 / 360.0 - 81.0 * n5 / 512.0
                + 96199.0 * n6 / 604_800.0,
            n2 / 48.0 + n3 / 15.0 - 437.0 * n4 / 1440.0 + 46.0 * n5 / 105.0
                - 1_118_711.0 * n6 / 3_870_720.0,
            17.0 * n3 / 480.0 - 37.0 * n4 / 840.0 - 209.0 * n5 / 4480.0 + 5569.0 * n6 / 90720.0,
            4397.0 * n4 / 161_280.0 - 11.0 * n5 / 504.0 - 830_251.0 * n6 / 7_257_600.0,
            4583.0 * n5 / 161_280.0 - 108_847.0 * n6 / 3_991_680.0,
            20_648_693.0 * n6 / 638_668_800.0,
        ];
        Self {
            e,
            rect_radius,
            alpha,
            beta,
        }
    }

    fn conformal_lat(&self, phi: f64) -> f64 {
        let s = phi.sin();
        (s.atanh() - self.e * (self.e * s).atanh()).sinh().atan()
    }

    /// Inverts `conformal_lat` by fixed-point iteration.
    fn geodetic_lat(&self, chi: f64) -> f64 {
        let t = (std::f64::consts::FRAC_PI_4 + chi / 2.0).tan();
        let mut phi = chi;
        for _ in 0..30 {
            let es = self.e * phi.sin();
            let next = 2.0 * (t * ((1.0 + es) / (1.0 - es)).powf(self.e / 2.0)).atan()
                - std::f64::consts::FRAC_PI_2;
            if (next - phi).abs() < 1e-15 {
                return next;
            }
            phi = next;
        }
        phi
    }

    fn meridian_xi(&self, phi: f64) -> f64 {
        let chi = self.conformal_lat(phi);
        self.forward(chi, 0.0).0
    }

    fn forward(&self, xi_p: f64, eta_p: f64) -> (f64, f64) {
        let mut xi = xi_p;
        let mut eta = eta_p;
        for (j, a) in self.alpha.iter().enumerate() {
            let k = 2.0 * (j as f64 + 1.0);
            xi += a * (k * xi_p).sin() * (k * eta_p).cosh();
            eta += a * (k * xi_p).cos() * (k * eta_p).sinh();
        }
        (xi, eta)
    }

    fn inverse(&self, xi: f64, eta: f64) -> (f64, f64) {
        let mut xi_p = xi;
        let mut eta_p = eta;
        for (j, b) in self.beta.iter().enumerate() {
            let k = 2.0 * (j as f64 + 1.0);
            xi_p -= b * (k * xi).sin() * (k * eta).cosh();
            eta_p -= b * (k * xi).cos() * (k * eta).sinh();
        }
        (xi_p, eta_p)
    }
}

/// Great-circle distance on a sphere of mean earth radius.
pub fn haversine_m(a: GeoCoord, b: GeoCoord) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * MEAN_EARTH_RADIUS_M * h.sqrt().asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn origin_maps_to_false_origin() {
        let p = ProjectionParams {
            false_easting: 500.0,
            false_northing: -1200.0,
            ..ProjectionParams::jgd2011_zone9()
        };
        let xy = p.project(GeoCoord::new(p.lat0, p.lon0)).unwrap();
        assert!((xy.x - 500.0).abs() < 1e-9, "{xy:?}");
        assert!((xy.y + 1200.0).abs() < 1e-9, "{xy:?}");
    }

    #[test]
    fn hundredth_degree_of_latitude_matches_haversine() {
        let p = ProjectionParams::jgd2011_zone9();
        let a = GeoCoord::new(p.lat0, p.lon0 + 0.1);
        let b = GeoCoord::new(p.lat0 + 0.01, p.lon0 + 0.1);
        let d = p.project(a).unwrap().distance(&p.project(b).unwrap());
        let oracle = haversine_m(a, b);
        assert!((oracle - 1112.0).abs() < 5.0, "haversine {oracle}");
        assert!((d - oracle).abs() < 5.0, "projected {d} vs haversine {oracle}");
    }

    #[test]
    fn far_longitude_rejected() {
        let p = ProjectionParams::jgd2011_zone9();
        let err = p.project(GeoCoord::new(36.0, p.lon0 + 4.5)).unwrap_err();
        assert!(matches!(err, ProjectionError::OutOfDomain { .. }));
    }

    #[test]
    fn meridian_arc_at_known_latitude() {
        // Quadrature of the GRS80 meridian radius of curvature from 0 to 36N.
        let p = ProjectionParams {
            lat0: 0.0,
            lon0: 139.0,
            k0: 1.0,
            false_easting: 0.0,
            false_northing: 0.0,
        };
        let xy = p.project(GeoCoord::new(36.0, 139.0)).unwrap();
        assert!((xy.y - 3_985_542.670_296_252).abs() < 1e-3, "{}", xy.y);
        assert!(xy.x.abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn round_trip_within_two_degrees(dlat in -2.0f64..2.0, dlon in -2.0f64..2.0) {
            let p = ProjectionParams::jgd2011_zone9();
            let g = GeoCoord::new(p.lat0 + dlat, p.lon0 + dlon);
            let back = p.unproject(p.project(g).unwrap());
            prop_assert!((back.lat - g.lat).abs() < 1e-9, "{:?} -> {:?}", g, back);
            prop_assert!((back.lon - g.lon).abs() < 1e-9, "{:?} -> {:?}", g, back);
        }
    }
}
