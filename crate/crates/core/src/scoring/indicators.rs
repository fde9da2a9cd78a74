use super::params::{IndicatorParams, WeightVector};
use crate::hetgraph::{reachable_from, connected_components, ClosureMask, Dijkstra, HeteroGraph};
use crate::ingest::FacilityCategory;
use crate::spatial::{PlanarCoord, SpatialIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

/// Open-network routes from one entity to its ranked targets.
#[derive(Debug, Clone, Default)]
struct Routes {
    /// Target graph nodes in rank order.
    nodes: Vec<usize>,
    open: Vec<f64>,
    /// Sorted union of edges on the open shortest-path tree paths.
    path: Vec<usize>,
}

/// Entities of one kind with a KD-tree over their positions.
struct Layer {
    /// Indices into the owning collection.
    members: Vec<usize>,
    nodes: Vec<usize>,
    index: SpatialIndex,
}

impl Layer {
    fn new(members: Vec<usize>, pos: Vec<PlanarCoord>, nodes: Vec<usize>) -> Self {
        Self { members, nodes, index: SpatialIndex::build(pos) }
    }

    /// Graph nodes of the `k` nearest members, nearest first.
    fn nearest_nodes(&self, p: PlanarCoord, k: usize) -> Vec<usize> {
        self.index.knn(p, k).iter().map(|n| self.nodes[n.index]).collect()
    }
}

/// Per-indicator wall time accumulated over all bridges.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IndicatorTiming {
    pub setup_s: f64,
    pub transit_s: f64,
    pub hospital_s: f64,
    pub isolation_s: f64,
    pub supply_s: f64,
    pub green_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCard {
    pub bridge_id: i64,
    pub transit: f64,
    pub hospital: f64,
    pub isolation: f64,
    pub supply: f64,
    pub green: f64,
    pub composite: f64,
    pub snap_failed: bool,
}

impl ScoreCard {
    pub fn zero(bridge_id: i64, snap_failed: bool) -> Self {
        Self {
            bridge_id,
            transit: 0.0,
            hospital: 0.0,
            isolation: 0.0,
            supply: 0.0,
            green: 0.0,
            composite: 0.0,
            snap_failed,
        }
    }

    pub fn indicators(&self) -> [f64; 5] {
        [self.transit, self.hospital, self.isolation, self.supply, self.green]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub cards: Vec<ScoreCard>,
    pub timing: IndicatorTiming,
    pub warnings: Vec<String>,
    /// Residences skipped by the isolation indicator for lack of elevation.
    pub residences_without_elevation: usize,
}

/// Weighted sum of the five indicators, clamped to [0, 100].
pub fn composite_score(scores: [f64; 5], w: &WeightVector) -> f64 {
    let s: f64 = scores.iter().zip(w.as_array()).map(|(s, a)| s * a).sum();
    s.clamp(0.0, 100.0)
}

fn clamp_score(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        // +0.0 normalizes the -0.0 an empty float sum produces.
        x.clamp(0.0, 100.0) + 0.0
    }
}

/// Shared, read-only state for scoring closures on one graph.
pub struct ScoringContext<'a> {
    h: &'a HeteroGraph,
    p: &'a IndicatorParams,
    seed: u64,
    residence_index: SpatialIndex,
    shops: Layer,
    transit: Vec<Routes>,
    hospital: Vec<Routes>,
    green: Vec<Routes>,
    supply: Vec<Routes>,
    bus_count: usize,
    hospital_count: usize,
    park_count: usize,
    highway_count: usize,
    urban_core: Vec<usize>,
    core_reachable_open: Vec<bool>,
    total_population: f64,
    pub setup_time: Duration,
}

fn facility_layer(h: &HeteroGraph, cat: FacilityCategory) -> Layer {
    let (members, (pos, nodes)): (Vec<usize>, (Vec<PlanarCoord>, Vec<usize>)) = h
        .facilities_of(cat)
        .map(|(i, f)| (i, (f.pos, f.node)))
        .unzip();
    Layer::new(members, pos, nodes)
}

fn route_set(
    h: &HeteroGraph,
    dij: &mut Dijkstra,
    source: usize,
    groups: &[Vec<usize>],
) -> Vec<Routes> {
    let all: Vec<usize> = groups.iter().flatten().copied().collect();
    if all.is_empty() {
        return groups.iter().map(|_| Routes::default()).collect();
    }
    dij.run(&h.graph, source, &all, None);
    groups
        .iter()
        .map(|nodes| {
            let open: Vec<f64> = nodes.iter().map(|&t| dij.distance(t)).collect();
            let mut path: Vec<usize> = nodes
                .iter()
                .flat_map(|&t| dij.path_edges(&h.graph, t))
                .collect();
            path.sort_unstable();
            path.dedup();
            Routes { nodes: nodes.clone(), open, path }
        })
        .collect()
}

impl<'a> ScoringContext<'a> {
    pub fn new(h: &'a HeteroGraph, p: &'a IndicatorParams, seed: u64) -> Self {
        let t0 = Instant::now();
        let bus = facility_layer(h, FacilityCategory::BusStop);
        let hosp = facility_layer(h, FacilityCategory::Hospital);
        let park = facility_layer(h, FacilityCategory::Park);
        let shops = facility_layer(h, FacilityCategory::Shop);
        let highway_nodes: Vec<usize> = (0..h.n_street).filter(|&v| h.arterial[v]).collect();
        let highway = Layer::new(
            highway_nodes.clone(),
            highway_nodes.iter().map(|&v| h.graph.coords[v]).collect(),
            highway_nodes.clone(),
        );
        let n = h.graph.node_count();

        let per_residence: Vec<Vec<Routes>> = h
            .residences
            .par_iter()
            .map_init(
                || Dijkstra::new(n),
                |dij, r| {
                    let groups = [
                        bus.nearest_nodes(r.pos, p.transit.k_bus),
                        hosp.nearest_nodes(r.pos, p.hospital.k_hosp),
                        park.nearest_nodes(r.pos, p.green.k_park),
                    ];
                    route_set(h, dij, r.node, &groups)
                },
            )
            .collect();
        let mut transit = Vec::with_capacity(per_residence.len());
        let mut hospital = Vec::with_capacity(per_residence.len());
        let mut green = Vec::with_capacity(per_residence.len());
        for mut v in per_residence {
            green.push(v.pop().unwrap());
            hospital.push(v.pop().unwrap());
            transit.push(v.pop().unwrap());
        }
        let supply: Vec<Routes> = shops
            .members
            .par_iter()
            .map_init(
                || Dijkstra::new(n),
                |dij, &fi| {
                    let f = &h.facilities[fi];
                    let groups = [highway.nearest_nodes(f.pos, p.supply.k_highway)];
                    route_set(h, dij, f.node, &groups).pop().unwrap()
                },
            )
            .collect();

        let comps = connected_components(&h.graph, None);
        let mut sizes = vec![0usize; comps.iter().max().map_or(0, |m| m + 1)];
        for &c in &comps {
            sizes[c] += 1;
        }
        // Ties go to the component with the smaller id.
        let largest = sizes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i);
        let thr = p.isolation.elev_threshold_m;
        let urban_core: Vec<usize> = (0..h.n_street)
            .filter(|&v| Some(comps[v]) == largest && h.node_elevation[v].is_some_and(|e| e < thr))
            .collect();
        let core_reachable_open = reachable_from(&h.graph, &urban_core, None);
        let total_population = h.residences.iter().map(|r| r.record.population_estimate).sum();

        Self {
            h,
            p,
            seed,
            residence_index: SpatialIndex::build(h.residences.iter().map(|r| r.pos).collect()),
            bus_count: bus.members.len(),
            hospital_count: hosp.members.len(),
            park_count: park.members.len(),
            highway_count: highway.members.len(),
            shops,
            transit,
            hospital,
            green,
            supply,
            urban_core,
            core_reachable_open,
            total_population,
            setup_time: t0.elapsed(),
        }
    }

    pub fn graph(&self) -> &HeteroGraph {
        self.h
    }

    /// Conditions that force an indicator to zero for every bridge.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.bus_count == 0 {
            w.push("no bus stops: transit scores are 0".to_string());
        }
        if self.hospital_count == 0 {
            w.push("no hospitals: hospital scores are 0".to_string());
        }
        if self.park_count == 0 {
            w.push("no parks: green-space scores are 0".to_string());
        }
        if self.highway_count == 0 {
            w.push("no primary/trunk nodes: supply scores are 0".to_string());
        }
        if self.urban_core.is_empty() {
            w.push("empty low-elevation urban core: isolation scores are 0".to_string());
        }
        w
    }

    pub fn residences_without_elevation(&self) -> usize {
        self.h.residences.iter().filter(|r| r.record.elevation_m.is_none()).count()
    }

    fn masked(&self, dij: &mut Dijkstra, source: usize, r: &Routes, mask: &ClosureMask) -> Vec<f64> {
        if r.nodes.is_empty() || !mask.intersects_sorted(&r.path) {
            // The open paths survive the closure, so distances are unchanged.
            r.open.clone()
        } else {
            dij.run(&self.h.graph, source, &r.nodes, Some(mask))
        }
    }

    /// Detour of a rank-weighted or plain sum over targets.
    fn detour_sum(&self, open: &[f64], post: &[f64], rank_weighted: bool) -> f64 {
        let cap = self.p.disconnect_cap_m();
        open.iter()
            .zip(post)
            .enumerate()
            .map(|(j, (&o, &m))| {
                let delta = (m.min(cap) - o).max(0.0);
                if rank_weighted {
                    delta / (j + 1) as f64
                } else {
                    delta
                }
            })
            .sum()
    }

    /// Residences sampled for the transit indicator of bridge `b`.
    pub fn transit_sample(&self, b: usize) -> Vec<usize> {
        let br = &self.h.bridges[b];
        let mut idx = self
            .residence_index
            .radius(br.pos, self.p.transit.impact_radius_m);
        let cap = self.p.transit.sample_cap;
        if idx.len() > cap {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ br.record.osm_id as u64);
            let mut pick = rand::seq::index::sample(&mut rng, idx.len(), cap).into_vec();
            pick.sort_unstable();
            idx = pick.into_iter().map(|i| idx[i]).collect();
        }
        idx
    }

    pub fn transit(&self, b: usize, mask: &ClosureMask) -> f64 {
        if self.bus_count == 0 {
            return 0.0;
        }
        let mut dij = Dijkstra::new(self.h.graph.node_count());
        let theta = self.p.transit.theta_m;
        let affected = self
            .transit_sample(b)
            .into_iter()
            .filter(|&ri| {
                let r = &self.transit[ri];
                let pre = r.open.iter().copied().fold(f64::INFINITY, f64::min);
                let post = self
                    .masked(&mut dij, self.h.residences[ri].node, r, mask)
                    .into_iter()
                    .fold(f64::INFINITY, f64::min);
                // Disconnection (inf - finite) counts; inf - inf is NaN and does not.
                post - pre > theta
            })
            .count();
        clamp_score(affected as f64 / self.p.transit.n_norm * 100.0)
    }

    pub fn hospital(&self, b: usize, mask: &ClosureMask) -> f64 {
        let n_res = self.h.residences.len();
        if self.hospital_count == 0 || n_res == 0 {
            return 0.0;
        }
        let mut dij = Dijkstra::new(self.h.graph.node_count());
        let near = self
            .residence_index
            .radius(self.h.bridges[b].pos, self.p.hospital.influence_radius_m);
        let total: f64 = near
            .into_iter()
            .map(|ri| {
                let r = &self.hospital[ri];
                let post = self.masked(&mut dij, self.h.residences[ri].node, r, mask);
                self.detour_sum(&r.open, &post, true)
            })
            .sum();
        clamp_score(total / (n_res as f64 * self.p.hospital.d_norm_m) * 100.0)
    }

    pub fn isolation(&self, b: usize, mask: &ClosureMask) -> f64 {
        if self.urban_core.is_empty() || !(self.total_population > 0.0) {
            return 0.0;
        }
        let thr = self.p.isolation.elev_threshold_m;
        let rural: Vec<usize> = self
            .residence_index
            .radius(self.h.bridges[b].pos, self.p.isolation.radius_m)
            .into_iter()
            .filter(|&ri| {
                let r = &self.h.residences[ri];
                r.record.elevation_m.is_some_and(|e| e >= thr) && self.core_reachable_open[r.node]
            })
            .collect();
        if rural.is_empty() || mask.is_empty() {
            return 0.0;
        }
        let reach = reachable_from(&self.h.graph, &self.urban_core, Some(mask));
        let isolated: f64 = rural
            .into_iter()
            .map(|ri| &self.h.residences[ri])
            .filter(|r| !reach[r.node])
            .map(|r| r.record.population_estimate)
            .sum();
        clamp_score(isolated / self.total_population * 100.0)
    }

    pub fn supply(&self, b: usize, mask: &ClosureMask) -> f64 {
        let n_shops = self.shops.members.len();
        if self.highway_count == 0 || n_shops == 0 {
            return 0.0;
        }
        let sp = &self.p.supply;
        let mut dij = Dijkstra::new(self.h.graph.node_count());
        let near = self.shops.index.radius(self.h.bridges[b].pos, sp.influence_radius_m);
        let total: f64 = near
            .into_iter()
            .map(|si| {
                let fi = self.shops.members[si];
                let r = &self.supply[si];
                let post = self.masked(&mut dij, self.h.facilities[fi].node, r, mask);
                let w = if self.h.is_food_shop(fi) { sp.food_weight } else { sp.base_weight };
                w * self.detour_sum(&r.open, &post, false)
            })
            .sum();
        clamp_score(total / (n_shops as f64 * sp.d_norm_m) * 100.0)
    }

    pub fn green(&self, _b: usize, mask: &ClosureMask) -> f64 {
        let n_res = self.h.residences.len();
        if self.park_count == 0 || n_res == 0 {
            return 0.0;
        }
        let mut dij = Dijkstra::new(self.h.graph.node_count());
        let total: f64 = (0..n_res)
            .map(|ri| {
                let r = &self.green[ri];
                let post = self.masked(&mut dij, self.h.residences[ri].node, r, mask);
                self.detour_sum(&r.open, &post, true)
            })
            .sum();
        clamp_score(total / (n_res as f64 * self.p.green.d_norm_m) * 100.0)
    }

    /// All five indicators under an arbitrary mask, in card order.
    pub fn indicators(&self, b: usize, mask: &ClosureMask) -> [f64; 5] {
        [
            self.transit(b, mask),
            self.hospital(b, mask),
            self.isolation(b, mask),
            self.supply(b, mask),
            self.green(b, mask),
        ]
    }

    /// Closes bridge `b` and scores it, returning per-indicator wall time.
    pub fn score_bridge(&self, b: usize, w: &WeightVector) -> (ScoreCard, [Duration; 5]) {
        let br = &self.h.bridges[b];
        if br.snap_failed() {
            return (ScoreCard::zero(br.record.osm_id, true), [Duration::ZERO; 5]);
        }
        let mask = self.h.closure_mask(b).expect("bridge index in range");
        let mut times = [Duration::ZERO; 5];
        let mut timed = |i: usize, f: &dyn Fn() -> f64| {
            let t = Instant::now();
            let v = f();
            times[i] = t.elapsed();
            v
        };
        let s = [
            timed(0, &|| self.transit(b, &mask)),
            timed(1, &|| self.hospital(b, &mask)),
            timed(2, &|| self.isolation(b, &mask)),
            timed(3, &|| self.supply(b, &mask)),
            timed(4, &|| self.green(b, &mask)),
        ];
        let card = ScoreCard {
            bridge_id: br.record.osm_id,
            transit: s[0],
            hospital: s[1],
            isolation: s[2],
            supply: s[3],
            green: s[4],
            composite: composite_score(s, w),
            snap_failed: false,
        };
        (card, times)
    }
}

/// Scores every bridge in `h`. Bridges are independent, so they are scored
/// in parallel; results do not depend on scheduling.
pub fn score_all(h: &HeteroGraph, params: &IndicatorParams, weights: &WeightVector, seed: u64) -> ScoreReport {
    let ctx = ScoringContext::new(h, params, seed);
    let scored: Vec<(ScoreCard, [Duration; 5])> = (0..h.bridges.len())
        .into_par_iter()
        .map(|b| ctx.score_bridge(b, weights))
        .collect();
    let mut timing = IndicatorTiming {
        setup_s: ctx.setup_time.as_secs_f64(),
        ..Default::default()
    };
    let mut cards = Vec::with_capacity(scored.len());
    for (card, t) in scored {
        timing.transit_s += t[0].as_secs_f64();
        timing.hospital_s += t[1].as_secs_f64();
        timing.isolation_s += t[2].as_secs_f64();
        timing.supply_s += t[3].as_secs_f64();
        timing.green_s += t[4].as_secs_f64();
        cards.push(card);
    }
    let warnings = ctx.warnings();
    for w in &warnings {
        log::warn!("{}: {w}", h.city);
    }
    ScoreReport {
        cards,
        timing,
        warnings,
        residences_without_elevation: ctx.residences_without_elevation(),
    }
}

macro_rules! single_indicator {
    ($(#[$m:meta])* $name:ident, $method:ident) => {
        $(#[$m])*
        pub fn $name(h: &HeteroGraph, b: usize, p: &IndicatorParams, seed: u64) -> f64 {
            if h.bridges[b].snap_failed() {
                return 0.0;
            }
            let mask = h.closure_mask(b).expect("bridge index in range");
            ScoringContext::new(h, p, seed).$method(b, &mask)
        }
    };
}

single_indicator!(
    /// Share of sampled residences whose bus access worsens past the threshold.
    transit_desert_score, transit
);
single_indicator!(
    /// Rank-weighted hospital detour over residences near the bridge.
    hospital_access_score, hospital
);
single_indicator!(
    /// Population of high residences cut off from the urban core.
    isolation_risk_score, isolation
);
single_indicator!(
    /// Category-weighted shop detour to arterial roads.
    supply_chain_score, supply
);
single_indicator!(
    /// Rank-weighted park detour over all residences.
    green_space_score, green
);
