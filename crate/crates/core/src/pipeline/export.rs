use crate::cluster::{ClusterAssignment, ClusterProfile, ClusterProfileTable, FeatureProfile, NOISE};
use crate::features::FeatureMatrix;
use crate::hetgraph::HeteroGraph;
use crate::scoring::ScoreCard;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::Path;
use thiserror::Error;

pub const SCORED_HEADER: [&str; 11] = [
    "bridge_id",
    "name",
    "lat",
    "lon",
    "transit_desert",
    "hospital_access",
    "isolation_risk",
    "supply_chain",
    "green_space",
    "composite",
    "snap_failed",
];

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

fn format_err(path: &Path, message: impl Into<String>) -> ExportError {
    ExportError::Format { path: path.display().to_string(), message: message.into() }
}

/// One row of `bridges_scored.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRow {
    pub bridge_id: i64,
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    /// Five indicators then composite, rounded to 4 decimals.
    pub scores: [f64; 6],
    pub snap_failed: bool,
}

fn round4(v: f64) -> f64 {
    let r: f64 = format!("{v:.4}").parse().expect("formatted float parses");
    // Adding +0.0 turns -0.0 into 0.0.
    r + 0.0
}

pub fn scored_rows(h: &HeteroGraph, cards: &[ScoreCard]) -> Vec<ScoredRow> {
    h.bridges
        .iter()
        .zip(cards)
        .map(|(b, c)| {
            let i = c.indicators();
            ScoredRow {
                bridge_id: c.bridge_id,
                name: b.record.name.clone(),
                lat: b.record.centroid.lat,
                lon: b.record.centroid.lon,
                scores: [i[0], i[1], i[2], i[3], i[4], c.composite].map(round4),
                snap_failed: c.snap_failed,
            }
        })
        .collect()
}

pub fn write_scored_csv(rows: &[ScoredRow], path: &Path) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SCORED_HEADER)?;
    for r in rows {
        let mut rec = vec![r.bridge_id.to_string(), r.name.clone(), format!("{:.7}", r.lat), format!("{:.7}", r.lon)];
        rec.extend(r.scores.iter().map(|s| format!("{s:.4}")));
        rec.push(r.snap_failed.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scored_csv(path: &Path) -> Result<Vec<ScoredRow>, ExportError> {
    let mut rd = csv::Reader::from_path(path)?;
    if rd.headers()?.iter().ne(SCORED_HEADER) {
        return Err(format_err(path, "unexpected header"));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| format_err(path, format!("bad number {:?}", &rec[i])));
        let mut scores = [0.0; 6];
        for (k, s) in scores.iter_mut().enumerate() {
            *s = num(4 + k)?;
        }
        out.push(ScoredRow {
            bridge_id: rec[0].parse().map_err(|_| format_err(path, "bad bridge_id"))?,
            name: rec[1].to_string(),
            lat: num(2)?,
            lon: num(3)?,
            scores,
            snap_failed: rec[10].parse().map_err(|_| format_err(path, "bad snap_failed"))?,
        });
    }
    Ok(out)
}

/// Point features with the same properties as `bridges_scored.csv`.
pub fn geojson(rows: &[ScoredRow]) -> Value {
    let features: Vec<Value> = rows
        .iter()
        .map(|r| {
            let mut props = serde_json::Map::new();
            props.insert("bridge_id".into(), json!(r.bridge_id));
            props.insert("name".into(), json!(r.name));
            props.insert("lat".into(), json!(r.lat));
            props.insert("lon".into(), json!(r.lon));
            for (k, s) in SCORED_HEADER[4..10].iter().zip(r.scores) {
                props.insert(k.to_string(), json!(s));
            }
            props.insert("snap_failed".into(), json!(r.snap_failed));
            json!({
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [r.lon, r.lat]},
                "properties": props,
            })
        })
        .collect();
    json!({"type": "FeatureCollection", "features": features})
}

pub fn write_geojson(rows: &[ScoredRow], path: &Path) -> Result<(), ExportError> {
    std::fs::write(path, serde_json::to_string_pretty(&geojson(rows))? + "\n")?;
    Ok(())
}

pub fn read_geojson(path: &Path) -> Result<Vec<ScoredRow>, ExportError> {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let feats = v["features"].as_array().ok_or_else(|| format_err(path, "no features array"))?;
    feats
        .iter()
        .map(|f| {
            let p = &f["properties"];
            let num = |k: &str| p[k].as_f64().ok_or_else(|| format_err(path, format!("missing {k}")));
            let mut scores = [0.0; 6];
            for (s, k) in scores.iter_mut().zip(&SCORED_HEADER[4..10]) {
                *s = num(k)?;
            }
            Ok(ScoredRow {
                bridge_id: p["bridge_id"].as_i64().ok_or_else(|| format_err(path, "missing bridge_id"))?,
                name: p["name"].as_str().unwrap_or_default().to_string(),
                lat: num("lat")?,
                lon: num("lon")?,
                scores,
                snap_failed: p["snap_failed"].as_bool().ok_or_else(|| format_err(path, "missing snap_failed"))?,
            })
        })
        .collect()
}

/// `umap_embedding.csv`: one row per bridge in feature-matrix order.
pub fn write_embedding_csv(
    ids: &[i64],
    coords: &[[f64; 2]],
    assign: &ClusterAssignment,
    path: &Path,
) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bridge_id", "x", "y", "cluster"])?;
    for ((id, c), l) in ids.iter().zip(coords).zip(&assign.labels) {
        w.write_record([id.to_string(), format!("{:?}", c[0]), format!("{:?}", c[1]), l.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRow {
    pub bridge_id: i64,
    pub x: f64,
    pub y: f64,
    pub cluster: i64,
}

pub fn read_embedding_csv(path: &Path) -> Result<Vec<EmbeddingRow>, ExportError> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let bad = || format_err(path, "malformed row");
        out.push(EmbeddingRow {
            bridge_id: rec[0].parse().map_err(|_| bad())?,
            x: rec[1].parse().map_err(|_| bad())?,
            y: rec[2].parse().map_err(|_| bad())?,
            cluster: rec[3].parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}

/// `outliers.csv`: exceedance count and flag per bridge.
pub fn write_outliers_csv(z: &FeatureMatrix, flags: &[bool], path: &Path) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bridge_id", "city", "exceedances", "outlier"])?;
    for (i, f) in flags.iter().enumerate() {
        w.write_record([
            z.bridge_ids[i].to_string(),
            z.cities[i].clone(),
            crate::features::exceedances(&z.values[i]).to_string(),
            f.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`ClusterProfileTable::write_csv`].
pub fn read_cluster_statistics(path: &Path) -> Result<ClusterProfileTable, ExportError> {
    let mut rd = csv::Reader::from_path(path)?;
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header.len() < 2 || header[0] != "cluster_id" || header[1] != "size" {
        return Err(format_err(path, "header must start with cluster_id,size"));
    }
    let n_cities = header[2..].iter().take_while(|h| h.ends_with("_pct")).count();
    let cities: Vec<String> = header[2..2 + n_cities].iter().map(|h| h.trim_end_matches("_pct").to_string()).collect();
    let rest = &header[2 + n_cities..];
    if rest.len() % 3 != 0 {
        return Err(format_err(path, "feature columns must come in mean/std/z triples"));
    }
    let mut names = Vec::new();
    for t in rest.chunks(3) {
        let name = t[0].strip_suffix("_mean").ok_or_else(|| format_err(path, format!("expected _mean column, got {}", t[0])))?;
        if t[1] != format!("{name}_std") || t[2] != format!("{name}_z") {
            return Err(format_err(path, format!("bad columns for feature {name}")));
        }
        names.push(name.to_string());
    }
    let mut clusters = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let v: Vec<f64> = rec
            .iter()
            .skip(2)
            .map(|s| s.parse::<f64>().map_err(|_| format_err(path, format!("bad number {s:?}"))))
            .collect::<Result<_, _>>()?;
        clusters.push(ClusterProfile {
            cluster_id: rec[0].parse().map_err(|_| format_err(path, "bad cluster_id"))?,
            size: rec[1].parse().map_err(|_| format_err(path, "bad size"))?,
            city_pct: v[..n_cities].to_vec(),
            features: v[n_cities..].chunks(3).map(|t| FeatureProfile { mean: t[0], std: t[1], z: t[2] }).collect(),
        });
    }
    Ok(ClusterProfileTable { feature_names: names, cities, clusters })
}

/// Rebuilds an assignment from embedding rows.
pub fn assignment_from_rows(rows: &[EmbeddingRow]) -> ClusterAssignment {
    let n = rows.iter().map(|r| r.cluster).max().map_or(0, |m| (m + 1).max(0) as usize);
    ClusterAssignment {
        labels: rows.iter().map(|r| if r.cluster < 0 { NOISE } else { r.cluster }).collect(),
        stability: vec![f64::NAN; n],
    }
}
