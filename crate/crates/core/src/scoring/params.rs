use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransitParams {
    pub impact_radius_m: f64,
    pub k_bus: usize,
    pub theta_m: f64,
    pub n_norm: f64,
    pub sample_cap: usize,
}

impl Default for TransitParams {
    fn default() -> Self {
        Self {
            impact_radius_m: 5000.0,
            k_bus: 5,
            theta_m: 500.0,
            n_norm: 500.0,
            sample_cap: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HospitalParams {
    pub k_hosp: usize,
    pub d_norm_m: f64,
    pub influence_radius_m: f64,
}

impl Default for HospitalParams {
    fn default() -> Self {
        Self {
            k_hosp: 3,
            d_norm_m: 1000.0,
            influence_radius_m: 5000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IsolationParams {
    pub elev_threshold_m: f64,
    pub radius_m: f64,
    /// Persons assigned to each residential building.
    pub population_per_building: f64,
}

impl Default for IsolationParams {
    fn default() -> Self {
        Self {
            elev_threshold_m: 100.0,
            radius_m: 3000.0,
            population_per_building: 2.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SupplyParams {
    pub k_highway: usize,
    pub d_norm_m: f64,
    pub food_weight: f64,
    pub base_weight: f64,
    pub influence_radius_m: f64,
}

impl Default for SupplyParams {
    fn default() -> Self {
        Self {
            k_highway: 3,
            d_norm_m: 1000.0,
            food_weight: 1.5,
            base_weight: 1.0,
            influence_radius_m: 5000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreenParams {
    pub k_park: usize,
    pub d_norm_m: f64,
}

impl Default for GreenParams {
    fn default() -> Self {
        Self {
            k_park: 3,
            d_norm_m: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnapParams {
    pub k: usize,
    pub max_distance_m: f64,
}

impl Default for SnapParams {
    fn default() -> Self {
        Self {
            k: 3,
            max_distance_m: 30.0,
        }
    }
}

/// Every tunable constant used by graph construction and the five indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndicatorParams {
    pub transit: TransitParams,
    pub hospital: HospitalParams,
    pub isolation: IsolationParams,
    pub supply: SupplyParams,
    pub green: GreenParams,
    pub snap: SnapParams,
    /// Sampled Brandes sources; graphs smaller than `betweenness_exact_below`
    /// nodes use every node as a source.
    pub betweenness_sources: usize,
    pub betweenness_exact_below: usize,
}

impl Default for IndicatorParams {
    fn default() -> Self {
        Self {
            transit: TransitParams::default(),
            hospital: HospitalParams::default(),
            isolation: IsolationParams::default(),
            supply: SupplyParams::default(),
            green: GreenParams::default(),
            snap: SnapParams::default(),
            betweenness_sources: 256,
            betweenness_exact_below: 2000,
        }
    }
}

impl IndicatorParams {
    /// Distance substituted for a post-closure distance of infinity in the
    /// weighted-detour indicators.
    pub fn disconnect_cap_m(&self) -> f64 {
        self.transit.impact_radius_m * 10.0
    }

    pub fn validate(&self) -> Result<(), String> {
        let counts = [
            ("transit.k_bus", self.transit.k_bus),
            ("transit.sample_cap", self.transit.sample_cap),
            ("hospital.k_hosp", self.hospital.k_hosp),
            ("supply.k_highway", self.supply.k_highway),
            ("green.k_park", self.green.k_park),
            ("snap.k", self.snap.k),
            ("betweenness_sources", self.betweenness_sources),
        ];
        for (name, v) in counts {
            if v < 1 {
                return Err(format!("indicator_params.{name} must be >= 1"));
            }
        }
        let positive = [
            ("transit.impact_radius_m", self.transit.impact_radius_m),
            ("transit.theta_m", self.transit.theta_m),
            ("transit.n_norm", self.transit.n_norm),
            ("hospital.d_norm_m", self.hospital.d_norm_m),
            ("hospital.influence_radius_m", self.hospital.influence_radius_m),
            ("isolation.elev_threshold_m", self.isolation.elev_threshold_m),
            ("isolation.radius_m", self.isolation.radius_m),
            ("supply.d_norm_m", self.supply.d_norm_m),
            ("supply.influence_radius_m", self.supply.influence_radius_m),
            ("supply.base_weight", self.supply.base_weight),
            ("green.d_norm_m", self.green.d_norm_m),
            ("snap.max_distance_m", self.snap.max_distance_m),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("indicator_params.{name} must be finite and > 0 (got {v})"));
            }
        }
        if !(self.isolation.population_per_building >= 0.0) {
            return Err("indicator_params.isolation.population_per_building must be >= 0".into());
        }
        if !(self.supply.food_weight >= self.supply.base_weight) {
            return Err("indicator_params.supply.food_weight must be >= base_weight".into());
        }
        Ok(())
    }
}

/// Composite weights, one per indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightVector {
    pub transit: f64,
    pub hospital: f64,
    pub isolation: f64,
    pub supply: f64,
    pub green: f64,
}

impl Default for WeightVector {
    fn default() -> Self {
        Self::equal()
    }
}

impl WeightVector {
    pub fn equal() -> Self {
        Self {
            transit: 0.2,
            hospital: 0.2,
            isolation: 0.2,
            supply: 0.2,
            green: 0.2,
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.transit, self.hospital, self.isolation, self.supply, self.green]
    }

    pub fn validate(&self) -> Result<(), String> {
        let w = self.as_array();
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(format!("weights must be finite and >= 0: {w:?}"));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(format!("weights must sum to 1 (got {sum})"));
        }
        Ok(())
    }
}
