use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Columns with population variance at or below this are dropped.
pub const VARIANCE_EPSILON: f64 = 1e-6;
/// |z| above this counts as an exceedance.
pub const OUTLIER_Z: f64 = 3.0;
/// A row is an outlier when its exceedance count is above this.
pub const OUTLIER_MIN_EXCEEDANCES: usize = 3;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("registry: {0}")]
    Registry(String),
    #[error("input mismatch: {0}")]
    Mismatch(String),
    #[error("every feature has zero variance; nothing to cluster")]
    AllDropped,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed feature table: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    /// Population standard deviation (divide by N).
    pub std: f64,
}

/// Population mean and standard deviation, two-pass.
pub fn column_stats(col: &[f64]) -> ColumnStats {
    let n = col.len() as f64;
    if col.is_empty() {
        return ColumnStats { mean: 0.0, std: 0.0 };
    }
    let mean = col.iter().sum::<f64>() / n;
    let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    ColumnStats { mean, std: var.sqrt() }
}

/// Bridges × features, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub bridge_ids: Vec<i64>,
    pub cities: Vec<String>,
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub retained: Vec<bool>,
    pub stats: Vec<ColumnStats>,
}

impl FeatureMatrix {
    pub fn new(
        bridge_ids: Vec<i64>,
        cities: Vec<String>,
        names: Vec<String>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self, FeatureError> {
        if bridge_ids.len() != values.len() || cities.len() != values.len() {
            return Err(FeatureError::Mismatch(format!(
                "{} ids, {} cities, {} rows",
                bridge_ids.len(),
                cities.len(),
                values.len()
            )));
        }
        if let Some((i, r)) = values.iter().enumerate().find(|(_, r)| r.len() != names.len()) {
            return Err(FeatureError::Mismatch(format!(
                "row {i} has {} values for {} features",
                r.len(),
                names.len()
            )));
        }
        let m = names.len();
        let mut out = Self {
            bridge_ids,
            cities,
            names,
            values,
            retained: vec![true; m],
            stats: Vec::new(),
        };
        out.stats = (0..m).map(|j| column_stats(&out.column(j))).collect();
        Ok(out)
    }

    pub fn n_rows(&self) -> usize {
        self.values.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Appends rows of `other`, which must have identical columns.
    pub fn concat(parts: Vec<FeatureMatrix>) -> Result<Self, FeatureError> {
        let mut it = parts.into_iter();
        let Some(first) = it.next() else {
            return Err(FeatureError::Mismatch("no matrices to concatenate".into()));
        };
        let (mut ids, mut cities, names, mut values) =
            (first.bridge_ids, first.cities, first.names, first.values);
        for p in it {
            if p.names != names {
                return Err(FeatureError::Mismatch("feature columns differ between cities".into()));
            }
            ids.extend(p.bridge_ids);
            cities.extend(p.cities);
            values.extend(p.values);
        }
        Self::new(ids, cities, names, values)
    }

    /// Keeps only the columns flagged in `retained`.
    pub fn retained_only(&self) -> Self {
        let keep: Vec<usize> = (0..self.n_cols()).filter(|&j| self.retained[j]).collect();
        Self {
            bridge_ids: self.bridge_ids.clone(),
            cities: self.cities.clone(),
            names: keep.iter().map(|&j| self.names[j].clone()).collect(),
            values: self.values.iter().map(|r| keep.iter().map(|&j| r[j]).collect()).collect(),
            retained: vec![true; keep.len()],
            stats: keep.iter().map(|&j| self.stats[j]).collect(),
        }
    }

    /// `features.csv`: `bridge_id,city,<retained feature names>` with raw
    /// values in shortest round-trip form.
    pub fn write_csv(&self, path: &Path) -> Result<(), FeatureError> {
        let r = self.retained_only();
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["bridge_id".to_string(), "city".to_string()];
        header.extend(r.names.iter().cloned());
        w.write_record(&header)?;
        for ((id, city), row) in r.bridge_ids.iter().zip(&r.cities).zip(&r.values) {
            let mut rec = vec![id.to_string(), city.clone()];
            rec.extend(row.iter().map(|v| format!("{v:?}")));
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self, FeatureError> {
        let mut rd = csv::Reader::from_path(path)?;
        let header = rd.headers()?.clone();
        if header.len() < 2 || &header[0] != "bridge_id" || &header[1] != "city" {
            return Err(FeatureError::Format("header must start with bridge_id,city".into()));
        }
        let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let (mut ids, mut cities, mut values) = (Vec::new(), Vec::new(), Vec::new());
        for rec in rd.records() {
            let rec = rec?;
            let bad = |what: &str| FeatureError::Format(format!("{what} in row {:?}", rec.position()));
            ids.push(rec[0].parse().map_err(|_| bad("bad bridge_id"))?);
            cities.push(rec[1].to_string());
            values.push(
                rec.iter()
                    .skip(2)
                    .map(|v| v.parse::<f64>().map_err(|_| bad("bad value")))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
        Self::new(ids, cities, names, values)
    }

    /// `feature_stats.csv`: name, mean, std, retained for every column.
    pub fn write_stats_csv(&self, path: &Path) -> Result<(), FeatureError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["name", "mean", "std", "retained"])?;
        for ((n, s), r) in self.names.iter().zip(&self.stats).zip(&self.retained) {
            w.write_record([n.clone(), format!("{:?}", s.mean), format!("{:?}", s.std), r.to_string()])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Marks columns whose population variance is at most [`VARIANCE_EPSILON`].
pub fn drop_zero_variance(mut m: FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
    for j in 0..m.n_cols() {
        let s = column_stats(&m.column(j));
        m.stats[j] = s;
        m.retained[j] = s.std * s.std > VARIANCE_EPSILON;
    }
    if !m.retained.iter().any(|&r| r) {
        return Err(FeatureError::AllDropped);
    }
    Ok(m)
}

/// Z-scores of the retained columns; dropped columns are removed. `stats`
/// of the result hold the raw-scale mean and population std per column.
pub fn zscore_normalize(m: &FeatureMatrix) -> FeatureMatrix {
    let mut r = m.retained_only();
    for j in 0..r.n_cols() {
        let s = column_stats(&r.column(j));
        r.stats[j] = s;
        for row in &mut r.values {
            row[j] = if s.std > 0.0 { (row[j] - s.mean) / s.std } else { 0.0 };
        }
    }
    r
}

pub fn exceedances(row: &[f64]) -> usize {
    row.iter().filter(|z| z.abs() > OUTLIER_Z).count()
}

/// Outlier flag per row of a normalized matrix.
pub fn flag_outliers(z: &FeatureMatrix) -> Vec<bool> {
    z.values
        .iter()
        .map(|r| exceedances(r) > OUTLIER_MIN_EXCEEDANCES)
        .collect()
}
