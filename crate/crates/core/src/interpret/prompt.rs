use super::sections::SECTION_TITLES;
use crate::cluster::{ClusterProfile, ClusterProfileTable};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Features listed per cluster, by descending |z|.
pub const TOP_FEATURES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretationRequest {
    pub cluster_id: i64,
    pub bridge_count: usize,
    /// `(city, percent)`; percentages sum to 100.
    pub city_pct: Vec<(String, f64)>,
    /// `(feature, z)` by descending |z|.
    pub top_features: Vec<(String, f64)>,
}

impl InterpretationRequest {
    /// `None` for an empty cluster.
    pub fn from_profile(table: &ClusterProfileTable, c: &ClusterProfile) -> Option<Self> {
        if c.size == 0 {
            return None;
        }
        Some(Self {
            cluster_id: c.cluster_id,
            bridge_count: c.size,
            city_pct: table.cities.iter().cloned().zip(c.city_pct.iter().copied()).collect(),
            top_features: c
                .top_features(TOP_FEATURES)
                .into_iter()
                .map(|j| (table.feature_names[j].clone(), c.features[j].z))
                .collect(),
        })
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.bridge_count == 0 {
            return Err(format!("cluster {} has no bridges", self.cluster_id));
        }
        let total: f64 = self.city_pct.iter().map(|c| c.1).sum();
        if (total - 100.0).abs() > 0.1 {
            return Err(format!("city percentages of cluster {} sum to {total}", self.cluster_id));
        }
        Ok(())
    }
}

pub fn render_prompt(req: &InterpretationRequest) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Please interpret the following cluster of bridges.");
    let _ = writeln!(s);
    let _ = writeln!(s, "Cluster ID: {}", req.cluster_id);
    let _ = writeln!(s, "Number of bridges: {}", req.bridge_count);
    let comp: Vec<String> = req.city_pct.iter().map(|(c, p)| format!("{c} {p:.1}%")).collect();
    let _ = writeln!(s, "City composition: {}", comp.join(", "));
    let _ = writeln!(s);
    let _ = writeln!(s, "Key features (z-scores):");
    for (name, z) in &req.top_features {
        let _ = writeln!(s, "- {name}: {z:.2}");
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Output in the following 5 sections, using these headers in this order:");
    for (i, t) in SECTION_TITLES.iter().enumerate() {
        let _ = writeln!(s, "{}. {t}", i + 1);
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Base every statement on the statistics above and do not speculate.");
    s
}
