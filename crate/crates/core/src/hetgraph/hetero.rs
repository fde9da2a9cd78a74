use super::graph::{build_street_graph, BuildReport, Edge, EdgeKind, StreetGraph, MIN_EDGE_LENGTH_M};
use super::paths::ClosureMask;
use crate::ingest::{
    is_food_shop, BridgeRecord, BuildingRecord, ElementKind, ElevationRaster, FacilityCategory,
    FacilityRecord, IngestData,
};
use crate::scoring::SnapParams;
use crate::spatial::{PlanarCoord, ProjectionParams, SpatialIndex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Radius for bridge-to-entity proximity edges.
pub const PROXIMITY_RADIUS_M: f64 = 1000.0;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("unknown bridge index {0}")]
    UnknownBridge(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapEdge {
    pub street_node: usize,
    pub length: f64,
    /// Index of the edge in the routing graph.
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedBridge {
    pub record: BridgeRecord,
    pub pos: PlanarCoord,
    /// Routing-graph node for the bridge itself.
    pub node: usize,
    pub snaps: Vec<SnapEdge>,
    /// Street edges whose source way is this bridge's way.
    pub way_edges: Vec<usize>,
}

impl PlacedBridge {
    pub fn snap_failed(&self) -> bool {
        self.snaps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedFacility {
    pub record: FacilityRecord,
    pub pos: PlanarCoord,
    /// Nearest street node.
    pub node: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedResidence {
    pub record: BuildingRecord,
    pub pos: PlanarCoord,
    pub node: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Facility,
    Residence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximityEdge {
    pub entity: usize,
    pub kind: EntityKind,
    pub distance: f64,
}

/// Street network plus bridges, facilities and residences.
///
/// `graph` is the routing graph: street nodes occupy `0..n_street` and each
/// bridge owns one extra node joined to the network by snap edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeteroGraph {
    pub city: String,
    pub graph: StreetGraph,
    pub n_street: usize,
    /// Street node lies on a `highway=primary|trunk` way.
    pub arterial: Vec<bool>,
    /// Per street node; `None` on raster nodata or without a raster.
    pub node_elevation: Vec<Option<f64>>,
    pub bridges: Vec<PlacedBridge>,
    pub facilities: Vec<PlacedFacility>,
    /// Residential buildings only.
    pub residences: Vec<PlacedResidence>,
    pub proximity: Vec<Vec<ProximityEdge>>,
    pub waterways: Vec<Vec<PlanarCoord>>,
    pub build_report: BuildReport,
    #[serde(skip)]
    street_index: Option<SpatialIndex>,
}

fn nearest_street(index: &SpatialIndex, p: PlanarCoord) -> Option<usize> {
    index.knn(p, 1).first().map(|n| n.index)
}

/// Already-projected inputs for [`HeteroGraph::assemble`].
#[derive(Debug, Clone, Default)]
pub struct PlanarInputs {
    pub city: String,
    pub streets: StreetGraph,
    pub arterial: Vec<bool>,
    pub node_elevation: Vec<Option<f64>>,
    pub bridges: Vec<(BridgeRecord, PlanarCoord)>,
    pub facilities: Vec<(FacilityRecord, PlanarCoord)>,
    /// Residential buildings; others are ignored.
    pub residences: Vec<(BuildingRecord, PlanarCoord)>,
    pub waterways: Vec<Vec<PlanarCoord>>,
    pub build_report: BuildReport,
}

impl HeteroGraph {
    /// Projects ingest output and assembles the graph. Entities that cannot
    /// be projected are dropped.
    pub fn build(
        data: &IngestData,
        proj: &ProjectionParams,
        raster: Option<&ElevationRaster>,
        snap: &SnapParams,
    ) -> Self {
        let built = build_street_graph(&data.street_ways, proj);
        let node_elevation = built
            .graph
            .coords
            .iter()
            .map(|p| raster.and_then(|r| r.sample(*p)))
            .collect();
        let placed = |g: crate::spatial::GeoCoord| proj.project(g).ok();
        let inputs = PlanarInputs {
            city: data.city.clone(),
            streets: built.graph,
            arterial: built.arterial,
            node_elevation,
            bridges: data
                .bridges
                .iter()
                .filter_map(|b| Some((b.clone(), placed(b.centroid)?)))
                .collect(),
            facilities: data
                .facilities
                .iter()
                .filter_map(|f| Some((f.clone(), placed(f.location)?)))
                .collect(),
            residences: data
                .buildings
                .iter()
                .filter(|b| b.is_residential)
                .filter_map(|b| Some((b.clone(), placed(b.centroid)?)))
                .collect(),
            waterways: data
                .waterways
                .iter()
                .map(|w| w.iter().filter_map(|g| placed(*g)).collect())
                .collect(),
            build_report: built.report,
        };
        Self::assemble(inputs, snap)
    }

    /// Snaps bridges, attaches facilities and residences to their nearest
    /// street node and computes proximity edges. With no street nodes,
    /// facilities and residences are dropped and every bridge fails to snap.
    pub fn assemble(inputs: PlanarInputs, snap: &SnapParams) -> Self {
        let streets = inputs.streets;
        let n_street = streets.node_count();
        assert_eq!(inputs.arterial.len(), n_street);
        assert_eq!(inputs.node_elevation.len(), n_street);
        let index = SpatialIndex::build(streets.coords.clone());

        let facilities: Vec<PlacedFacility> = inputs
            .facilities
            .into_iter()
            .filter_map(|(record, pos)| {
                let node = nearest_street(&index, pos)?;
                Some(PlacedFacility { record, pos, node })
            })
            .collect();
        let residences: Vec<PlacedResidence> = inputs
            .residences
            .into_iter()
            .filter(|(b, _)| b.is_residential)
            .filter_map(|(record, pos)| {
                let node = nearest_street(&index, pos)?;
                Some(PlacedResidence { record, pos, node })
            })
            .collect();

        let mut node_ids = streets.node_ids.clone();
        let mut coords = streets.coords.clone();
        let mut edges = streets.edges.clone();
        let mut bridges = Vec::new();
        for (b, (rec, pos)) in inputs.bridges.into_iter().enumerate() {
            let node = node_ids.len();
            // Bridge nodes get negative ids so they never clash with OSM nodes.
            node_ids.push(-(b as i64) - 1);
            coords.push(pos);
            let mut snaps = Vec::new();
            for nb in index.knn(pos, snap.k) {
                if nb.distance > snap.max_distance_m {
                    break;
                }
                let length = nb.distance.max(MIN_EDGE_LENGTH_M);
                snaps.push(SnapEdge { street_node: nb.index, length, edge: edges.len() });
                edges.push(Edge { u: nb.index, v: node, length, kind: EdgeKind::Snap { bridge: b } });
            }
            let way_edges = if rec.kind == ElementKind::Way {
                streets
                    .edges
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.kind == EdgeKind::Street { way_id: rec.osm_id })
                    .map(|(i, _)| i)
                    .collect()
            } else {
                Vec::new()
            };
            bridges.push(PlacedBridge { record: rec, pos, node, snaps, way_edges });
        }
        let graph = StreetGraph::from_edges(node_ids, coords, edges);

        let fac_index = SpatialIndex::build(facilities.iter().map(|f| f.pos).collect());
        let res_index = SpatialIndex::build(residences.iter().map(|r| r.pos).collect());
        let proximity = bridges
            .iter()
            .map(|b| {
                let fac = fac_index
                    .radius_with_distance(b.pos, PROXIMITY_RADIUS_M)
                    .into_iter()
                    .map(|n| ProximityEdge { entity: n.index, kind: EntityKind::Facility, distance: n.distance });
                let res = res_index
                    .radius_with_distance(b.pos, PROXIMITY_RADIUS_M)
                    .into_iter()
                    .map(|n| ProximityEdge { entity: n.index, kind: EntityKind::Residence, distance: n.distance });
                fac.chain(res).collect()
            })
            .collect();

        Self {
            city: inputs.city,
            graph,
            n_street,
            arterial: inputs.arterial,
            node_elevation: inputs.node_elevation,
            bridges,
            facilities,
            residences,
            proximity,
            waterways: inputs.waterways,
            build_report: inputs.build_report,
            street_index: Some(index),
        }
    }

    /// KD-tree over street node coordinates (rebuilt lazily after
    /// deserialization).
    pub fn street_index(&mut self) -> &SpatialIndex {
        if self.street_index.is_none() {
            self.street_index = Some(SpatialIndex::build(self.graph.coords[..self.n_street].to_vec()));
        }
        self.street_index.as_ref().unwrap()
    }

    pub fn ensure_index(&mut self) {
        let _ = self.street_index();
    }

    pub fn snapped_count(&self) -> usize {
        self.bridges.iter().filter(|b| !b.snap_failed()).count()
    }

    /// Mask for closing bridge `b`: its snap edges plus the street edges
    /// generated from its own OSM way.
    pub fn closure_mask(&self, b: usize) -> Result<ClosureMask, GraphError> {
        let br = self.bridges.get(b).ok_or(GraphError::UnknownBridge(b))?;
        Ok(ClosureMask::new(
            Some(b),
            br.snaps.iter().map(|s| s.edge).chain(br.way_edges.iter().copied()),
        ))
    }

    pub fn facilities_of(&self, cat: FacilityCategory) -> impl Iterator<Item = (usize, &PlacedFacility)> {
        self.facilities
            .iter()
            .enumerate()
            .filter(move |(_, f)| f.record.category == cat)
    }

    pub fn is_food_shop(&self, facility: usize) -> bool {
        let f = &self.facilities[facility];
        f.record.category == FacilityCategory::Shop && is_food_shop(&f.record.subcategory)
    }
}
