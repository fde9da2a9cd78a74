//! Hand-built heterogeneous graphs with explicit edge lengths.

use bridgegraph_core::hetgraph::{Edge, EdgeKind, HeteroGraph, PlanarInputs, StreetGraph};
use bridgegraph_core::ingest::{BridgeRecord, BuildingRecord, ElementKind, FacilityCategory, FacilityRecord, SourcePattern};
use bridgegraph_core::scoring::SnapParams;
use bridgegraph_core::{GeoCoord, PlanarCoord};

pub const LOW_M: f64 = 10.0;

#[derive(Default)]
pub struct ToyBuilder {
    coords: Vec<PlanarCoord>,
    elevation: Vec<Option<f64>>,
    arterial: Vec<bool>,
    edges: Vec<Edge>,
    bridges: Vec<(BridgeRecord, PlanarCoord)>,
    facilities: Vec<(FacilityRecord, PlanarCoord)>,
    residences: Vec<(BuildingRecord, PlanarCoord)>,
    next_way: i64,
}

fn geo() -> GeoCoord {
    GeoCoord::new(35.0, 139.0)
}

impl ToyBuilder {
    pub fn new() -> Self {
        Self { next_way: 1, ..Default::default() }
    }

    pub fn node(&mut self, x: f64, y: f64) -> usize {
        self.node_at(x, y, Some(LOW_M))
    }

    pub fn node_at(&mut self, x: f64, y: f64, elevation: Option<f64>) -> usize {
        self.coords.push(PlanarCoord::new(x, y));
        self.elevation.push(elevation);
        self.arterial.push(false);
        self.coords.len() - 1
    }

    pub fn arterial(&mut self, v: usize) {
        self.arterial[v] = true;
    }

    pub fn street(&mut self, u: usize, v: usize, length: f64) {
        let way_id = self.next_way;
        self.next_way += 1;
        self.edges.push(Edge { u, v, length, kind: EdgeKind::Street { way_id } });
    }

    /// A bridge way over edge `u`-`v`, with its node placed at `pos`.
    pub fn bridge(&mut self, u: usize, v: usize, length: f64, pos: (f64, f64)) -> usize {
        let way_id = 10_000 + self.next_way;
        self.next_way += 1;
        self.edges.push(Edge { u, v, length, kind: EdgeKind::Street { way_id } });
        let rec = BridgeRecord {
            osm_id: way_id,
            kind: ElementKind::Way,
            name: format!("bridge {way_id}"),
            centroid: geo(),
            tags: [("bridge".to_string(), "yes".to_string()), ("highway".to_string(), "residential".to_string())]
                .into_iter()
                .collect(),
            source_pattern: SourcePattern::BridgeTag,
            city: "toy".into(),
            geometry: vec![],
        };
        self.bridges.push((rec, PlanarCoord::new(pos.0, pos.1)));
        self.bridges.len() - 1
    }

    /// A facility at street node `v`'s position.
    pub fn facility(&mut self, category: FacilityCategory, subcategory: &str, v: usize) {
        self.facility_at(category, subcategory, self.coords[v]);
    }

    pub fn facility_at(&mut self, category: FacilityCategory, subcategory: &str, pos: PlanarCoord) {
        let rec = FacilityRecord {
            osm_id: 20_000 + self.facilities.len() as i64,
            category,
            subcategory: subcategory.into(),
            location: geo(),
        };
        self.facilities.push((rec, pos));
    }

    pub fn residence(&mut self, v: usize, population: f64, elevation: Option<f64>) {
        self.residence_at(self.coords[v], population, elevation);
    }

    pub fn residence_at(&mut self, pos: PlanarCoord, population: f64, elevation: Option<f64>) {
        let rec = BuildingRecord {
            osm_id: 30_000 + self.residences.len() as i64,
            centroid: geo(),
            is_residential: true,
            population_estimate: population,
            elevation_m: elevation,
        };
        self.residences.push((rec, pos));
    }

    pub fn node_count(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, v: usize) -> PlanarCoord {
        self.coords[v]
    }

    pub fn build(self) -> HeteroGraph {
        let n = self.coords.len();
        let streets = StreetGraph::from_edges((0..n as i64).map(|i| i + 1).collect(), self.coords, self.edges);
        HeteroGraph::assemble(
            PlanarInputs {
                city: "toy".into(),
                streets,
                arterial: self.arterial,
                node_elevation: self.elevation,
                bridges: self.bridges,
                facilities: self.facilities,
                residences: self.residences,
                waterways: vec![],
                build_report: Default::default(),
            },
            &SnapParams::default(),
        )
    }
}

/// Transit: bridge A-S on both residents' routes to the only bus stop.
/// r1 detours +600 m, r2 +100 m.
pub fn transit_toy() -> HeteroGraph {
    let mut t = ToyBuilder::new();
    let s = t.node(0.0, 0.0);
    let a = t.node(100.0, 0.0);
    let r1 = t.node(200.0, 100.0);
    let r2 = t.node(200.0, -300.0);
    t.bridge(a, s, 100.0, (100.0, 10.0));
    t.street(r1, a, 100.0);
    t.street(r2, a, 300.0);
    t.street(r1, s, 800.0);
    t.street(r2, s, 500.0);
    t.facility(FacilityCategory::BusStop, "bus_stop", s);
    t.residence(r1, 2.5, Some(LOW_M));
    t.residence(r2, 2.5, Some(LOW_M));
    t.build()
}

/// Hospital: one residence, one hospital, 100 m bridge vs 500 m detour.
pub fn hospital_toy() -> HeteroGraph {
    let mut t = ToyBuilder::new();
    let r = t.node(0.0, 0.0);
    let h = t.node(300.0, 0.0);
    t.bridge(r, h, 100.0, (150.0, 0.0));
    let mid = t.node(150.0, 20.0);
    t.street(r, mid, 250.0);
    t.street(mid, h, 250.0);
    t.facility(FacilityCategory::Hospital, "hospital", h);
    t.residence(r, 2.5, Some(LOW_M));
    t.build()
}

/// Isolation: a 10-person hill residence reachable only over the bridge,
/// 90 people in the low core.
pub fn isolation_toy() -> HeteroGraph {
    let mut t = ToyBuilder::new();
    let c0 = t.node(0.0, 0.0);
    let c1 = t.node(200.0, 0.0);
    let c2 = t.node(0.0, 200.0);
    let u = t.node_at(400.0, 0.0, Some(150.0));
    t.street(c0, c1, 200.0);
    t.street(c0, c2, 200.0);
    t.bridge(c1, u, 200.0, (400.0, 10.0));
    for i in 0..9 {
        let v = [c0, c1, c2][i % 3];
        t.residence(v, 10.0, Some(LOW_M));
    }
    t.residence(u, 10.0, Some(150.0));
    t.build()
}

/// Supply: one shop whose only arterial target detours +200 m.
pub fn supply_toy(subcategory: &str) -> HeteroGraph {
    let mut t = ToyBuilder::new();
    let p = t.node(0.0, 0.0);
    let q = t.node(0.0, 300.0);
    let side = t.node(100.0, 150.0);
    t.arterial(q);
    t.bridge(p, q, 100.0, (0.0, 20.0));
    t.street(p, side, 150.0);
    t.street(side, q, 150.0);
    t.facility(FacilityCategory::Shop, subcategory, p);
    t.build()
}

/// Green: one residence; the nearer park detours +100 m, the farther +200 m.
pub fn green_toy() -> HeteroGraph {
    let mut t = ToyBuilder::new();
    let r = t.node(0.0, 0.0);
    let x = t.node(0.0, 100.0);
    let p1 = t.node(150.0, 0.0);
    let p2 = t.node(0.0, 400.0);
    t.bridge(r, x, 50.0, (10.0, 100.0));
    t.street(x, p1, 50.0);
    t.street(x, p2, 100.0);
    t.street(r, p1, 200.0);
    t.street(r, p2, 350.0);
    t.facility(FacilityCategory::Park, "park", p1);
    t.facility(FacilityCategory::Park, "park", p2);
    t.residence(r, 2.5, Some(LOW_M));
    t.build()
}
