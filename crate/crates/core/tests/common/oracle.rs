//! Brute-force reference implementations.

use super::toy::ToyBuilder;
use bridgegraph_core::hetgraph::{ClosureMask, HeteroGraph, StreetGraph};
use bridgegraph_core::ingest::FacilityCategory;
use bridgegraph_core::scoring::IndicatorParams;
use bridgegraph_core::PlanarCoord;
use rand::Rng;

/// All-pairs distances on a copy of `g` with the masked edges deleted.
pub fn floyd_warshall(g: &StreetGraph, mask: &ClosureMask) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (i, e) in g.edges.iter().enumerate() {
        if mask.contains(i) {
            continue;
        }
        if e.length < d[e.u][e.v] {
            d[e.u][e.v] = e.length;
            d[e.v][e.u] = e.length;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k].is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Single-source Bellman-Ford over explicit `(u, v, w)` undirected edges.
pub fn bellman_ford(n: usize, edges: &[(usize, usize, f64)], source: usize) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; n];
    d[source] = 0.0;
    for _ in 0..n {
        let mut changed = false;
        for &(u, v, w) in edges {
            if d[u] + w < d[v] {
                d[v] = d[u] + w;
                changed = true;
            }
            if d[v] + w < d[u] {
                d[u] = d[v] + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    d
}

/// Indices of the `k` nearest points by (distance, index).
pub fn brute_knn(points: &[PlanarCoord], q: PlanarCoord, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| q.distance_sq(&points[a]).total_cmp(&q.distance_sq(&points[b])).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Indices within `r`, ascending.
pub fn brute_radius(points: &[PlanarCoord], q: PlanarCoord, r: f64) -> Vec<usize> {
    (0..points.len()).filter(|&i| q.distance_sq(&points[i]) <= r * r).collect()
}

fn facilities(h: &HeteroGraph, cat: FacilityCategory) -> (Vec<PlanarCoord>, Vec<usize>, Vec<usize>) {
    let mut pos = Vec::new();
    let mut nodes = Vec::new();
    let mut ids = Vec::new();
    for (i, f) in h.facilities.iter().enumerate() {
        if f.record.category == cat {
            pos.push(f.pos);
            nodes.push(f.node);
            ids.push(i);
        }
    }
    (pos, nodes, ids)
}

fn clamp(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, 100.0)
    }
}

/// The five indicators for bridge `b` under `mask`, recomputed from
/// all-pairs distances. Transit assumes no sampling (`sample_cap` at least the
/// number of residences in range).
pub fn indicators(h: &HeteroGraph, b: usize, mask: &ClosureMask, p: &IndicatorParams) -> [f64; 5] {
    let open = floyd_warshall(&h.graph, &ClosureMask::empty());
    let post = floyd_warshall(&h.graph, mask);
    let bpos = h.bridges[b].pos;
    let res_pos: Vec<PlanarCoord> = h.residences.iter().map(|r| r.pos).collect();
    let cap = p.transit.impact_radius_m * 10.0;
    let n_res = h.residences.len() as f64;

    let detour = |src: usize, targets: &[usize], weighted: bool| -> f64 {
        targets
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                let d = (post[src][t].min(cap) - open[src][t]).max(0.0);
                if weighted {
                    d / (j + 1) as f64
                } else {
                    d
                }
            })
            .sum()
    };

    let (bus_pos, bus_nodes, _) = facilities(h, FacilityCategory::BusStop);
    let transit = if bus_pos.is_empty() {
        0.0
    } else {
        let in_range = brute_radius(&res_pos, bpos, p.transit.impact_radius_m);
        assert!(in_range.len() <= p.transit.sample_cap, "oracle does not sample");
        let affected = in_range
            .iter()
            .filter(|&&ri| {
                let r = &h.residences[ri];
                let near = brute_knn(&bus_pos, r.pos, p.transit.k_bus);
                let pre = near.iter().map(|&i| open[r.node][bus_nodes[i]]).fold(f64::INFINITY, f64::min);
                let after = near.iter().map(|&i| post[r.node][bus_nodes[i]]).fold(f64::INFINITY, f64::min);
                after - pre > p.transit.theta_m
            })
            .count();
        clamp(affected as f64 / p.transit.n_norm * 100.0)
    };

    let (hosp_pos, hosp_nodes, _) = facilities(h, FacilityCategory::Hospital);
    let hospital = if hosp_pos.is_empty() || n_res == 0.0 {
        0.0
    } else {
        let total: f64 = brute_radius(&res_pos, bpos, p.hospital.influence_radius_m)
            .into_iter()
            .map(|ri| {
                let r = &h.residences[ri];
                let t: Vec<usize> = brute_knn(&hosp_pos, r.pos, p.hospital.k_hosp).iter().map(|&i| hosp_nodes[i]).collect();
                detour(r.node, &t, true)
            })
            .sum();
        clamp(total / (n_res * p.hospital.d_norm_m) * 100.0)
    };

    // Urban core: low street nodes of the largest open component, ties to the
    // component containing the smallest node.
    let n_street = h.n_street;
    let n = h.graph.node_count();
    let mut best: Option<(usize, usize)> = None;
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&v| open[s][v].is_finite()).collect();
        for &v in &members {
            seen[v] = true;
        }
        if best.is_none_or(|(_, size)| members.len() > size) {
            best = Some((s, members.len()));
        }
    }
    let thr = p.isolation.elev_threshold_m;
    let core: Vec<usize> = match best {
        Some((root, _)) => (0..n_street)
            .filter(|&v| open[root][v].is_finite() && h.node_elevation[v].is_some_and(|e| e < thr))
            .collect(),
        None => vec![],
    };
    let total_pop: f64 = h.residences.iter().map(|r| r.record.population_estimate).sum();
    let isolation = if core.is_empty() || !(total_pop > 0.0) {
        0.0
    } else {
        let isolated: f64 = brute_radius(&res_pos, bpos, p.isolation.radius_m)
            .into_iter()
            .map(|ri| &h.residences[ri])
            .filter(|r| r.record.elevation_m.is_some_and(|e| e >= thr))
            .filter(|r| core.iter().any(|&c| open[r.node][c].is_finite()))
            .filter(|r| core.iter().all(|&c| post[r.node][c].is_infinite()))
            .map(|r| r.record.population_estimate)
            .sum();
        clamp(isolated / total_pop * 100.0)
    };

    let highway: Vec<usize> = (0..n_street).filter(|&v| h.arterial[v]).collect();
    let highway_pos: Vec<PlanarCoord> = highway.iter().map(|&v| h.graph.coords[v]).collect();
    let (shop_pos, shop_nodes, shop_ids) = facilities(h, FacilityCategory::Shop);
    let supply = if highway.is_empty() || shop_pos.is_empty() {
        0.0
    } else {
        let total: f64 = brute_radius(&shop_pos, bpos, p.supply.influence_radius_m)
            .into_iter()
            .map(|si| {
                let t: Vec<usize> = brute_knn(&highway_pos, shop_pos[si], p.supply.k_highway).iter().map(|&i| highway[i]).collect();
                let sub = &h.facilities[shop_ids[si]].record.subcategory;
                let w = if bridgegraph_core::ingest::is_food_shop(sub) { p.supply.food_weight } else { p.supply.base_weight };
                w * detour(shop_nodes[si], &t, false)
            })
            .sum();
        clamp(total / (shop_pos.len() as f64 * p.supply.d_norm_m) * 100.0)
    };

    let (park_pos, park_nodes, _) = facilities(h, FacilityCategory::Park);
    let green = if park_pos.is_empty() || n_res == 0.0 {
        0.0
    } else {
        let total: f64 = h
            .residences
            .iter()
            .map(|r| {
                let t: Vec<usize> = brute_knn(&park_pos, r.pos, p.green.k_park).iter().map(|&i| park_nodes[i]).collect();
                detour(r.node, &t, true)
            })
            .sum();
        clamp(total / (n_res * p.green.d_norm_m) * 100.0)
    };

    [transit, hospital, isolation, supply, green]
}

/// Parameters scaled down so that small random graphs exercise every
/// prefilter, threshold and cap.
pub fn small_params() -> IndicatorParams {
    let mut p = IndicatorParams::default();
    p.transit.impact_radius_m = 600.0;
    p.transit.theta_m = 80.0;
    p.transit.n_norm = 4.0;
    p.transit.k_bus = 2;
    p.hospital.influence_radius_m = 700.0;
    p.hospital.d_norm_m = 300.0;
    p.hospital.k_hosp = 2;
    p.isolation.elev_threshold_m = 50.0;
    p.isolation.radius_m = 600.0;
    p.supply.influence_radius_m = 700.0;
    p.supply.d_norm_m = 300.0;
    p.supply.k_highway = 2;
    p.green.d_norm_m = 300.0;
    p.green.k_park = 2;
    p
}

/// Random connected street graph with bridges, facilities and residences.
/// Street nodes: `n` in a 1000 m square; elevations straddle 50 m.
pub fn random_hetero<R: Rng>(rng: &mut R, n: usize) -> HeteroGraph {
    let mut t = ToyBuilder::new();
    for _ in 0..n {
        let (x, y) = (rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0));
        let elev = if rng.gen_bool(0.1) { None } else { Some(rng.gen_range(0.0..100.0)) };
        t.node_at(x, y, elev);
    }
    let len = |t: &ToyBuilder, u: usize, v: usize, rng: &mut R| {
        t.coord(u).distance(&t.coord(v)) * rng.gen_range(1.0..1.5) + 1.0
    };
    // Random tree plus extra edges; some tree edges become bridges so that
    // closures can disconnect.
    let mut bridges = 0;
    for v in 1..n {
        let u = rng.gen_range(0..v);
        let l = len(&t, u, v, rng);
        if rng.gen_bool(0.3) {
            let (a, b) = (t.coord(u), t.coord(v));
            let near = if rng.gen_bool(0.5) { a } else { b };
            t.bridge(u, v, l, (near.x + 5.0, near.y + 5.0));
            bridges += 1;
        } else {
            t.street(u, v, l);
        }
    }
    for _ in 0..n / 2 {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            let l = len(&t, u, v, rng);
            t.street(u, v, l);
        }
    }
    if bridges == 0 {
        let l = len(&t, 0, 1, rng);
        let c = t.coord(0);
        t.bridge(0, 1, l, (c.x + 5.0, c.y + 5.0));
    }
    for _ in 0..rng.gen_range(1..4) {
        let v = rng.gen_range(0..n);
        t.arterial(v);
    }
    let place = |rng: &mut R| PlanarCoord::new(rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0));
    for (cat, sub, count) in [
        (FacilityCategory::BusStop, "bus_stop", rng.gen_range(1..5)),
        (FacilityCategory::Hospital, "hospital", rng.gen_range(1..4)),
        (FacilityCategory::Park, "park", rng.gen_range(1..4)),
        (FacilityCategory::Shop, "supermarket", rng.gen_range(0..4)),
        (FacilityCategory::Shop, "clothes", rng.gen_range(0..4)),
    ] {
        for _ in 0..count {
            let p = place(rng);
            t.facility_at(cat, sub, p);
        }
    }
    for _ in 0..rng.gen_range(3..20) {
        let p = place(rng);
        let elev = if rng.gen_bool(0.1) { None } else { Some(rng.gen_range(0.0..100.0)) };
        t.residence_at(p, rng.gen_range(1.0..5.0), elev);
    }
    t.build()
}

/// A random mask over the graph's edges containing each edge with
/// probability `p`.
pub fn random_mask<R: Rng>(rng: &mut R, h: &HeteroGraph, p: f64) -> Vec<usize> {
    (0..h.graph.edge_count()).filter(|_| rng.gen_bool(p)).collect()
}
