//! OSM element model and record extraction.

use crate::config::BoundingBox;
use crate::spatial::GeoCoord;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

pub type Tags = BTreeMap<String, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Node,
    Way,
    Relation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationMember {
    pub role: String,
    pub geometry: Vec<GeoCoord>,
}

/// One element of an Overpass `out body geom` response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawOsmElement {
    pub id: i64,
    pub kind: ElementKind,
    pub tags: Tags,
    pub geometry: Vec<GeoCoord>,
    /// Way node references, parallel to `geometry` for ways.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub node_ids: Vec<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<RelationMember>,
}

impl RawOsmElement {
    pub fn tag(&self, key: &str) -> Option<&str> {
        self.tags.get(key).map(String::as_str)
    }

    /// Representative point: the node itself, the mean of way vertices (closing
    /// vertex counted once), or the mean of all outer-ring vertices.
    pub fn centroid(&self) -> Option<GeoCoord> {
        let pts: Vec<GeoCoord> = match self.kind {
            ElementKind::Node | ElementKind::Way => ring_vertices(&self.geometry).to_vec(),
            ElementKind::Relation => {
                let outer: Vec<GeoCoord> = self
                    .members
                    .iter()
                    .filter(|m| m.role == "outer")
                    .flat_map(|m| ring_vertices(&m.geometry).iter().copied())
                    .collect();
                if outer.is_empty() {
                    self.members
                        .iter()
                        .flat_map(|m| m.geometry.iter().copied())
                        .collect()
                } else {
                    outer
                }
            }
        };
        if pts.is_empty() {
            return None;
        }
        let n = pts.len() as f64;
        let (lat, lon) = pts
            .iter()
            .fold((0.0, 0.0), |(a, b), g| (a + g.lat, b + g.lon));
        Some(GeoCoord::new(lat / n, lon / n))
    }
}

fn ring_vertices(g: &[GeoCoord]) -> &[GeoCoord] {
    if g.len() > 2 && g.first() == g.last() {
        &g[..g.len() - 1]
    } else {
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourcePattern {
    ManMade,
    BridgeTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeRecord {
    pub osm_id: i64,
    pub kind: ElementKind,
    pub name: String,
    pub centroid: GeoCoord,
    pub tags: Tags,
    pub source_pattern: SourcePattern,
    /// Provenance label (the config's city).
    #[serde(default)]
    pub city: String,
    /// Ordered geometry, kept for length features.
    #[serde(default)]
    pub geometry: Vec<GeoCoord>,
}

fn bridge_pattern(el: &RawOsmElement) -> Option<SourcePattern> {
    if el.tag("man_made") == Some("bridge") {
        Some(SourcePattern::ManMade)
    } else {
        match el.tag("bridge") {
            Some(v) if v != "no" => Some(SourcePattern::BridgeTag),
            _ => None,
        }
    }
}

/// Keeps bridge elements whose `name` is non-empty after trimming, merging
/// elements that share an OSM identity. Merged tags are the union, with the
/// `man_made=bridge` element winning conflicts.
pub fn filter_named_bridges(elements: &[RawOsmElement]) -> Vec<BridgeRecord> {
    let mut merged: BTreeMap<(ElementKind, i64), (SourcePattern, &RawOsmElement, Tags)> =
        BTreeMap::new();
    for el in elements {
        let Some(pattern) = bridge_pattern(el) else {
            continue;
        };
        match merged.get_mut(&(el.kind, el.id)) {
            None => {
                merged.insert((el.kind, el.id), (pattern, el, el.tags.clone()));
            }
            Some(entry) => {
                let incoming_wins =
                    pattern == SourcePattern::ManMade && entry.0 != SourcePattern::ManMade;
                for (k, v) in &el.tags {
                    if incoming_wins {
                        entry.2.insert(k.clone(), v.clone());
                    } else {
                        entry.2.entry(k.clone()).or_insert_with(|| v.clone());
                    }
                }
                if incoming_wins {
                    entry.0 = SourcePattern::ManMade;
                }
                if entry.1.geometry.is_empty() && !el.geometry.is_empty() {
                    entry.1 = el;
                }
            }
        }
    }
    merged
        .into_iter()
        .filter_map(|((kind, id), (pattern, el, tags))| {
            let name = tags.get("name")?.trim().to_string();
            if name.is_empty() {
                return None;
            }
            let centroid = el.centroid()?;
            let geometry = if kind == ElementKind::Relation {
                el.members.iter().flat_map(|m| m.geometry.iter().copied()).collect()
            } else {
                el.geometry.clone()
            };
            Some(BridgeRecord {
                osm_id: id,
                kind,
                name,
                centroid,
                tags,
                source_pattern: pattern,
                city: String::new(),
                geometry,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacilityCategory {
    Hospital,
    BusStop,
    Park,
    Shop,
    HighwayNode,
}

impl FacilityCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            FacilityCategory::Hospital => "hospital",
            FacilityCategory::BusStop => "bus_stop",
            FacilityCategory::Park => "park",
            FacilityCategory::Shop => "shop",
            FacilityCategory::HighwayNode => "highway_node",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacilityRecord {
    pub osm_id: i64,
    pub category: FacilityCategory,
    pub subcategory: String,
    pub location: GeoCoord,
}

/// Shop values counted as food or daily necessities.
pub const FOOD_SHOPS: &[&str] = &[
    "supermarket",
    "convenience",
    "greengrocer",
    "grocery",
    "butcher",
    "bakery",
    "deli",
    "seafood",
    "dairy",
    "beverages",
    "food",
    "farm",
    "general",
    "chemist",
    "department_store",
    "variety_store",
    "kiosk",
];

pub fn is_food_shop(subcategory: &str) -> bool {
    FOOD_SHOPS.contains(&subcategory)
}

pub fn extract_facilities(elements: &[RawOsmElement], bbox: &BoundingBox) -> Vec<FacilityRecord> {
    let mut out = Vec::new();
    let mut seen: std::collections::HashSet<(ElementKind, i64, FacilityCategory)> =
        Default::default();
    for el in elements {
        let Some(location) = el.centroid() else {
            continue;
        };
        if !bbox.contains(location) {
            continue;
        }
        let mut push = |category: FacilityCategory, sub: &str| {
            if seen.insert((el.kind, el.id, category)) {
                out.push(FacilityRecord {
                    osm_id: el.id,
                    category,
                    subcategory: sub.to_string(),
                    location,
                });
            }
        };
        if el.tag("amenity") == Some("hospital") {
            push(FacilityCategory::Hospital, "hospital");
        }
        if el.tag("highway") == Some("bus_stop") {
            push(FacilityCategory::BusStop, "bus_stop");
        }
        if let Some(l @ ("park" | "nature_reserve")) = el.tag("leisure") {
            push(FacilityCategory::Park, l);
        }
        if let Some(shop) = el.tag("shop") {
            push(FacilityCategory::Shop, shop);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingRecord {
    pub osm_id: i64,
    pub centroid: GeoCoord,
    pub is_residential: bool,
    pub population_estimate: f64,
    /// `None` where the elevation raster has no data.
    pub elevation_m: Option<f64>,
}

const RESIDENTIAL_BUILDINGS: &[&str] = &["residential", "house", "apartments", "detached", "terrace"];
const COMMERCIAL_KEYS: &[&str] = &["shop", "office", "amenity", "craft", "tourism", "industrial"];

pub fn is_residential(tags: &Tags) -> bool {
    match tags.get("building").map(String::as_str) {
        Some(b) if RESIDENTIAL_BUILDINGS.contains(&b) => true,
        Some("yes") => !COMMERCIAL_KEYS.iter().any(|k| tags.contains_key(*k)),
        _ => false,
    }
}

/// Buildings with centroids inside the bbox. Elevation is filled in by the
/// caller once coordinates are projected.
pub fn extract_buildings(
    elements: &[RawOsmElement],
    bbox: &BoundingBox,
    population_per_building: f64,
) -> Vec<BuildingRecord> {
    let mut seen = std::collections::HashSet::new();
    elements
        .iter()
        .filter(|el| el.tags.contains_key("building") && el.kind != ElementKind::Node)
        .filter(|el| seen.insert((el.kind, el.id)))
        .filter_map(|el| {
            let centroid = el.centroid()?;
            if !bbox.contains(centroid) {
                return None;
            }
            let residential = is_residential(&el.tags);
            Some(BuildingRecord {
                osm_id: el.id,
                centroid,
                is_residential: residential,
                population_estimate: if residential { population_per_building } else { 0.0 },
                elevation_m: None,
            })
        })
        .collect()
}

/// Deduplicates ways by id, keeping the first occurrence.
pub fn unique_ways(elements: Vec<RawOsmElement>) -> Vec<RawOsmElement> {
    let mut seen: HashMap<i64, ()> = HashMap::new();
    elements
        .into_iter()
        .filter(|e| e.kind == ElementKind::Way && seen.insert(e.id, ()).is_none())
        .collect()
}
