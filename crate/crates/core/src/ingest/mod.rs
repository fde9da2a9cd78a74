//! OpenStreetMap ingest: queries, record extraction and elevation data.

pub mod elevation;
pub mod osm;
pub mod overpass;

pub use elevation::{ElevationRaster, RasterError};
pub use osm::{
    extract_buildings, extract_facilities, filter_named_bridges, is_food_shop, is_residential,
    BridgeRecord, BuildingRecord, ElementKind, FacilityCategory, FacilityRecord, RawOsmElement,
    RelationMember, SourcePattern, Tags,
};
pub use overpass::{
    cache_key, parse_overpass_json, to_overpass_json, FetchError, OverpassClient,
    OverpassQuerySpec,
};

use crate::config::PipelineConfig;
use crate::spatial::GeoCoord;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{query}: {source}")]
    Fetch {
        query: &'static str,
        source: FetchError,
    },
    #[error(transparent)]
    Raster(#[from] RasterError),
}

/// Everything later stages need from OSM, for one city.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestData {
    pub city: String,
    pub bridges: Vec<BridgeRecord>,
    pub facilities: Vec<FacilityRecord>,
    pub buildings: Vec<BuildingRecord>,
    pub street_ways: Vec<RawOsmElement>,
    pub waterways: Vec<Vec<GeoCoord>>,
    pub diagnostics: BTreeMap<String, u64>,
}

/// Fetches all queries (concurrently, cache first) and extracts records.
pub fn ingest(cfg: &PipelineConfig) -> Result<IngestData, IngestError> {
    let client = OverpassClient::new(cfg.overpass_url.clone(), cfg.cache_dir.clone());
    let results: Vec<Result<Vec<RawOsmElement>, IngestError>> = std::thread::scope(|s| {
        let handles: Vec<_> = OverpassQuerySpec::ALL
            .iter()
            .map(|&q| {
                let client = &client;
                s.spawn(move || {
                    client
                        .fetch(&cfg.bbox, q)
                        .map_err(|source| IngestError::Fetch { query: q.name(), source })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fetch thread panicked"))
            .collect()
    });
    let mut it = results.into_iter();
    let mut next = || it.next().expect("one result per query");
    let man_made = next()?;
    let bridge_tag = next()?;
    let streets = next()?;
    let facilities = next()?;
    let buildings = next()?;
    // Waterways only feed one optional feature; losing them is not fatal.
    let waterways = next().unwrap_or_else(|e| {
        log::warn!("{}: {e}; river distance will be absent", cfg.city);
        Vec::new()
    });

    let raster = match &cfg.elevation_path {
        Some(p) => Some(ElevationRaster::load(p)?),
        None => None,
    };
    Ok(assemble(
        cfg,
        [man_made, bridge_tag, streets, facilities, buildings, waterways],
        raster.as_ref(),
    ))
}

/// Record extraction from already-fetched element lists, in
/// [`OverpassQuerySpec::ALL`] order.
pub fn assemble(
    cfg: &PipelineConfig,
    lists: [Vec<RawOsmElement>; 6],
    raster: Option<&ElevationRaster>,
) -> IngestData {
    let [man_made, bridge_tag, streets, facilities, buildings, waterways] = lists;
    let mut diagnostics = BTreeMap::new();
    let mut all_bridge_elements = man_made;
    all_bridge_elements.extend(bridge_tag);
    diagnostics.insert("bridge_elements".into(), all_bridge_elements.len() as u64);

    let named = filter_named_bridges(&all_bridge_elements);
    diagnostics.insert("named_bridges".into(), named.len() as u64);
    let bridges: Vec<BridgeRecord> = named
        .into_iter()
        .filter(|b| cfg.bbox.contains(b.centroid))
        .map(|mut b| {
            b.city = cfg.city.clone();
            b
        })
        .collect();
    diagnostics.insert("bridges_in_bbox".into(), bridges.len() as u64);

    let facilities = extract_facilities(&facilities, &cfg.bbox);
    let mut buildings = extract_buildings(
        &buildings,
        &cfg.bbox,
        cfg.indicator_params.isolation.population_per_building,
    );
    let mut nodata = 0u64;
    for b in &mut buildings {
        b.elevation_m = raster.and_then(|r| {
            let p = cfg.projection.project(b.centroid).ok()?;
            r.sample(p)
        });
        if b.elevation_m.is_none() {
            nodata += 1;
        }
    }
    diagnostics.insert("buildings".into(), buildings.len() as u64);
    diagnostics.insert("buildings_without_elevation".into(), nodata);

    let street_ways = osm::unique_ways(streets)
        .into_iter()
        .filter(|w| w.tags.contains_key("highway"))
        .collect::<Vec<_>>();
    diagnostics.insert("street_ways".into(), street_ways.len() as u64);
    let waterways: Vec<Vec<GeoCoord>> = osm::unique_ways(waterways)
        .into_iter()
        .map(|w| w.geometry)
        .collect();
    diagnostics.insert("waterways".into(), waterways.len() as u64);

    IngestData {
        city: cfg.city.clone(),
        bridges,
        facilities,
        buildings,
        street_ways,
        waterways,
        diagnostics,
    }
}
