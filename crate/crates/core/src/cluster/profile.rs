use super::hdbscan::ClusterAssignment;
use crate::features::{column_stats, FeatureMatrix};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureProfile {
    pub mean: f64,
    pub std: f64,
    /// Cluster mean in units of the global population σ.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub cluster_id: i64,
    pub size: usize,
    /// Percent of members per city, aligned with [`ClusterProfileTable::cities`].
    pub city_pct: Vec<f64>,
    pub features: Vec<FeatureProfile>,
}

impl ClusterProfile {
    /// Up to `k` feature indices by descending |z|, ties by index.
    pub fn top_features(&self, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.features.len()).collect();
        idx.sort_by(|&a, &b| self.features[b].z.abs().total_cmp(&self.features[a].z.abs()).then(a.cmp(&b)));
        idx.truncate(k);
        idx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfileTable {
    pub feature_names: Vec<String>,
    /// Sorted city labels.
    pub cities: Vec<String>,
    pub clusters: Vec<ClusterProfile>,
}

/// Per-cluster statistics over the raw values of the retained columns of `m`.
pub fn profile_clusters(assign: &ClusterAssignment, m: &FeatureMatrix) -> ClusterProfileTable {
    assert_eq!(assign.labels.len(), m.n_rows(), "assignment and matrix must be row-aligned");
    let m = m.retained_only();
    let mut cities = m.cities.clone();
    cities.sort();
    cities.dedup();
    let global: Vec<_> = (0..m.n_cols()).map(|j| column_stats(&m.column(j))).collect();
    let clusters = (0..assign.n_clusters() as i64)
        .map(|c| {
            let rows: Vec<usize> = (0..m.n_rows()).filter(|&i| assign.labels[i] == c).collect();
            let size = rows.len();
            let city_pct = cities
                .iter()
                .map(|city| 100.0 * rows.iter().filter(|&&i| &m.cities[i] == city).count() as f64 / size as f64)
                .collect();
            let features = (0..m.n_cols())
                .map(|j| {
                    let s = column_stats(&rows.iter().map(|&i| m.values[i][j]).collect::<Vec<_>>());
                    let g = global[j];
                    let z = if g.std > 0.0 { (s.mean - g.mean) / g.std } else { 0.0 };
                    FeatureProfile { mean: s.mean, std: s.std, z }
                })
                .collect();
            ClusterProfile { cluster_id: c, size, city_pct, features }
        })
        .collect();
    ClusterProfileTable { feature_names: m.names.clone(), cities, clusters }
}

impl ClusterProfileTable {
    /// `cluster_statistics.csv`: id, size, `<city>_pct` per city, then
    /// `<feature>_mean`, `<feature>_std`, `<feature>_z` per feature.
    pub fn write_csv(&self, path: &Path) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["cluster_id".to_string(), "size".to_string()];
        header.extend(self.cities.iter().map(|c| format!("{c}_pct")));
        for f in &self.feature_names {
            header.extend([format!("{f}_mean"), format!("{f}_std"), format!("{f}_z")]);
        }
        w.write_record(&header)?;
        for c in &self.clusters {
            let mut rec = vec![c.cluster_id.to_string(), c.size.to_string()];
            rec.extend(c.city_pct.iter().map(|p| format!("{p:?}")));
            for f in &c.features {
                rec.extend([format!("{:?}", f.mean), format!("{:?}", f.std), format!("{:?}", f.z)]);
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
