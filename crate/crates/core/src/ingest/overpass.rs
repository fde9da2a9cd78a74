//! Overpass API client with a content-addressed response cache.
//!
//! Response bodies are stored verbatim under `overpass_<sha256(query)>.json`.
//! The query text embeds the bbox, so the hash covers both.

use super::osm::{ElementKind, RawOsmElement, RelationMember, Tags};
use crate::config::BoundingBox;
use crate::spatial::GeoCoord;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("network failure for {url}: {message}")]
    Network { url: String, message: String },
    #[error("overpass returned HTTP {status}")]
    Http { status: u16 },
    #[error("malformed overpass response: {0}")]
    Malformed(String),
    #[error("cache I/O at {path}: {source}")]
    Cache {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// The fixed set of queries the pipeline issues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OverpassQuerySpec {
    /// Standalone `man_made=bridge` structures.
    ManMadeBridge,
    /// Road and rail segments carrying a `bridge` tag.
    BridgeTag,
    /// Drivable street ways with node references.
    Streets,
    Facilities,
    Buildings,
    Waterways,
}

impl OverpassQuerySpec {
    pub const ALL: [OverpassQuerySpec; 6] = [
        OverpassQuerySpec::ManMadeBridge,
        OverpassQuerySpec::BridgeTag,
        OverpassQuerySpec::Streets,
        OverpassQuerySpec::Facilities,
        OverpassQuerySpec::Buildings,
        OverpassQuerySpec::Waterways,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            OverpassQuerySpec::ManMadeBridge => "man_made_bridge",
            OverpassQuerySpec::BridgeTag => "bridge_tag",
            OverpassQuerySpec::Streets => "streets",
            OverpassQuerySpec::Facilities => "facilities",
            OverpassQuerySpec::Buildings => "buildings",
            OverpassQuerySpec::Waterways => "waterways",
        }
    }

    /// Overpass QL body for this query inside `bbox`.
    pub fn query_text(&self, bbox: &BoundingBox) -> String {
        let b = bbox.overpass_filter();
        let body = match self {
            OverpassQuerySpec::ManMadeBridge => format!(
                "(\n  way[\"man_made\"=\"bridge\"]{b};\n  relation[\"man_made\"=\"bridge\"]{b};\n  node[\"man_made\"=\"bridge\"]{b};\n);"
            ),
            OverpassQuerySpec::BridgeTag => format!(
                "(\n  way[\"bridge\"][\"bridge\"!=\"no\"][\"highway\"]{b};\n  way[\"bridge\"][\"bridge\"!=\"no\"][\"railway\"]{b};\n);"
            ),
            OverpassQuerySpec::Streets => format!(
                "(\n  way[\"highway\"~\"^(motorway|trunk|primary|secondary|tertiary|unclassified|residential|living_street|service|motorway_link|trunk_link|primary_link|secondary_link|tertiary_link)$\"]{b};\n);"
            ),
            OverpassQuerySpec::Facilities => format!(
                "(\n  nwr[\"amenity\"=\"hospital\"]{b};\n  node[\"highway\"=\"bus_stop\"]{b};\n  nwr[\"leisure\"~\"^(park|nature_reserve)$\"]{b};\n  nwr[\"shop\"]{b};\n);"
            ),
            OverpassQuerySpec::Buildings => format!(
                "(\n  way[\"building\"]{b};\n  relation[\"building\"][\"type\"=\"multipolygon\"]{b};\n);"
            ),
            OverpassQuerySpec::Waterways => format!(
                "(\n  way[\"waterway\"~\"^(river|stream|canal)$\"]{b};\n  way[\"natural\"=\"coastline\"]{b};\n);"
            ),
        };
        format!("[out:json][timeout:180];\n{body}\nout body geom;\n")
    }
}

pub fn cache_key(query_text: &str) -> String {
    hex::encode(Sha256::digest(query_text.as_bytes()))
}

pub struct OverpassClient {
    url: String,
    cache_dir: PathBuf,
    timeout: Duration,
}

impl OverpassClient {
    pub fn new(url: impl Into<String>, cache_dir: impl Into<PathBuf>) -> Self {
        Self {
            url: url.into(),
            cache_dir: cache_dir.into(),
            timeout: Duration::from_secs(300),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn cache_path(&self, query_text: &str) -> PathBuf {
        self.cache_dir
            .join(format!("overpass_{}.json", cache_key(query_text)))
    }

    /// Raw response body, served from cache when present.
    pub fn fetch_raw(&self, query_text: &str) -> Result<(String, bool), FetchError> {
        let path = self.cache_path(query_text);
        if path.exists() {
            let body = std::fs::read_to_string(&path)
                .map_err(|source| FetchError::Cache { path: path.clone(), source })?;
            return Ok((body, true));
        }
        log::info!("overpass POST {} ({} bytes)", self.url, query_text.len());
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build()
            .into();
        let mut resp = agent
            .post(&self.url)
            .header("Content-Type", "text/plain; charset=utf-8")
            .send(query_text)
            .map_err(|e| match e {
                ureq::Error::StatusCode(status) => FetchError::Http { status },
                other => FetchError::Network {
                    url: self.url.clone(),
                    message: other.to_string(),
                },
            })?;
        let body = resp
            .body_mut()
            .with_config()
            .limit(1 << 31)
            .read_to_string()
            .map_err(|e| FetchError::Network {
                url: self.url.clone(),
                message: e.to_string(),
            })?;
        // Refuse to cache anything that does not parse.
        parse_overpass_json(&body)?;
        write_atomic(&path, body.as_bytes())
            .map_err(|source| FetchError::Cache { path: path.clone(), source })?;
        Ok((body, false))
    }

    pub fn fetch(
        &self,
        bbox: &BoundingBox,
        spec: OverpassQuerySpec,
    ) -> Result<Vec<RawOsmElement>, FetchError> {
        let (body, _) = self.fetch_raw(&spec.query_text(bbox))?;
        parse_overpass_json(&body)
    }
}

/// Writes to a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!(
        "tmp.{}.{:?}",
        std::process::id(),
        std::thread::current().id()
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

#[derive(Deserialize)]
struct Envelope {
    elements: Vec<WireElement>,
}

#[derive(Deserialize)]
struct WirePoint {
    lat: f64,
    lon: f64,
}

#[derive(Deserialize)]
struct WireMember {
    #[serde(default)]
    role: String,
    #[serde(default)]
    geometry: Vec<Option<WirePoint>>,
}

#[derive(Deserialize)]
struct WireElement {
    #[serde(rename = "type")]
    kind: String,
    id: i64,
    lat: Option<f64>,
    lon: Option<f64>,
    #[serde(default)]
    tags: Tags,
    #[serde(default)]
    nodes: Vec<i64>,
    #[serde(default)]
    geometry: Vec<Option<WirePoint>>,
    #[serde(default)]
    members: Vec<WireMember>,
}

fn points(g: Vec<Option<WirePoint>>) -> Vec<GeoCoord> {
    g.into_iter()
        .flatten()
        .map(|p| GeoCoord::new(p.lat, p.lon))
        .collect()
}

/// Parses an `out body geom` JSON body. Ways with fewer than two resolved
/// geometry points are dropped.
pub fn parse_overpass_json(body: &str) -> Result<Vec<RawOsmElement>, FetchError> {
    let env: Envelope =
        serde_json::from_str(body).map_err(|e| FetchError::Malformed(e.to_string()))?;
    let mut out = Vec::with_capacity(env.elements.len());
    let mut dropped = 0usize;
    for w in env.elements {
        let el = match w.kind.as_str() {
            "node" => {
                let (Some(lat), Some(lon)) = (w.lat, w.lon) else {
                    return Err(FetchError::Malformed(format!("node {} without coordinates", w.id)));
                };
                RawOsmElement {
                    id: w.id,
                    kind: ElementKind::Node,
                    tags: w.tags,
                    geometry: vec![GeoCoord::new(lat, lon)],
                    node_ids: vec![],
                    members: vec![],
                }
            }
            "way" => {
                // Keep node ids aligned with resolved geometry.
                let mut geometry = Vec::with_capacity(w.geometry.len());
                let mut node_ids = Vec::with_capacity(w.geometry.len());
                let aligned = w.nodes.len() == w.geometry.len();
                for (i, p) in w.geometry.into_iter().enumerate() {
                    if let Some(p) = p {
                        geometry.push(GeoCoord::new(p.lat, p.lon));
                        if aligned {
                            node_ids.push(w.nodes[i]);
                        }
                    }
                }
                if geometry.len() < 2 {
                    dropped += 1;
                    continue;
                }
                RawOsmElement {
                    id: w.id,
                    kind: ElementKind::Way,
                    tags: w.tags,
                    geometry,
                    node_ids,
                    members: vec![],
                }
            }
            "relation" => RawOsmElement {
                id: w.id,
                kind: ElementKind::Relation,
                tags: w.tags,
                geometry: vec![],
                node_ids: vec![],
                members: w
                    .members
                    .into_iter()
                    .map(|m| RelationMember {
                        role: m.role,
                        geometry: points(m.geometry),
                    })
                    .collect(),
            },
            _ => continue,
        };
        out.push(el);
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} ways with fewer than two geometry points");
    }
    Ok(out)
}

/// Serializes elements back to the Overpass JSON shape.
pub fn to_overpass_json(elements: &[RawOsmElement]) -> String {
    use serde_json::{json, Value};
    let pt = |g: &GeoCoord| json!({"lat": g.lat, "lon": g.lon});
    let els: Vec<Value> = elements
        .iter()
        .map(|e| match e.kind {
            ElementKind::Node => json!({
                "type": "node", "id": e.id,
                "lat": e.geometry[0].lat, "lon": e.geometry[0].lon,
                "tags": e.tags,
            }),
            ElementKind::Way => json!({
                "type": "way", "id": e.id,
                "nodes": e.node_ids,
                "geometry": e.geometry.iter().map(pt).collect::<Vec<_>>(),
                "tags": e.tags,
            }),
            ElementKind::Relation => json!({
                "type": "relation", "id": e.id,
                "members": e.members.iter().map(|m| json!({
                    "type": "way", "role": m.role,
                    "geometry": m.geometry.iter().map(pt).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
                "tags": e.tags,
            }),
        })
        .collect();
    serde_json::to_string_pretty(&json!({"version": 0.6, "elements": els}))
        .expect("json values always serialize")
}
