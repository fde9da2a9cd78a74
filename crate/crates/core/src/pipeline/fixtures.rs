//! Bundled synthetic cities: a warm Overpass cache, an elevation grid and a
//! config, generated deterministically.
//!
//! The street network is a 22 x 23 grid at 80 m spacing cut into quadrants
//! by two rivers. South-west is the low-lying core. The north-east quadrant
//! is a high-elevation enclave whose only link is a single bridge from the
//! south-east.

use crate::config::BoundingBox;
use crate::ingest::{to_overpass_json, ElementKind, ElevationRaster, OverpassClient, OverpassQuerySpec, RawOsmElement, Tags};
use crate::spatial::{GeoCoord, PlanarCoord, ProjectionParams};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

pub const COLS: usize = 22;
pub const ROWS: usize = 23;
pub const SPACING_M: f64 = 80.0;
/// Rivers run between these row and column indices.
const RIVER_ROW: usize = 10;
const RIVER_COL: usize = 10;
const NE_LINK_COL: usize = 16;
const INTRA_BRIDGES: usize = 20;
const MAN_MADE_SNAPPED: usize = 5;
const MAN_MADE_OFF_GRID: usize = 2;
const UNNAMED_BRIDGES: usize = 3;
const BUS_STOPS: usize = 40;
const SHOPS: usize = 30;
const BUILDINGS: usize = 600;
const MARGIN_M: f64 = 300.0;
const RASTER_CELL_M: f64 = 40.0;

/// Named bridges in each generated city.
pub const NAMED_BRIDGES: usize = (RIVER_COL + 1) + (RIVER_ROW + 1) + 1 + INTRA_BRIDGES + MAN_MADE_SNAPPED + MAN_MADE_OFF_GRID;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureCity {
    SyntheticSmall,
    SyntheticSecond,
}

impl std::str::FromStr for FixtureCity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "synthetic-small" => Ok(FixtureCity::SyntheticSmall),
            "synthetic-second" => Ok(FixtureCity::SyntheticSecond),
            other => Err(format!("unknown fixture city {other:?} (expected synthetic-small or synthetic-second)")),
        }
    }
}

impl FixtureCity {
    pub const ALL: [FixtureCity; 2] = [FixtureCity::SyntheticSmall, FixtureCity::SyntheticSecond];

    pub fn name(&self) -> &'static str {
        match self {
            FixtureCity::SyntheticSmall => "synthetic-small",
            FixtureCity::SyntheticSecond => "synthetic-second",
        }
    }

    fn center(&self) -> GeoCoord {
        match self {
            FixtureCity::SyntheticSmall => GeoCoord::new(35.63, 139.45),
            FixtureCity::SyntheticSecond => GeoCoord::new(39.70, 141.14),
        }
    }

    pub fn projection(&self) -> ProjectionParams {
        match self {
            FixtureCity::SyntheticSmall => ProjectionParams::jgd2011_zone9(),
            FixtureCity::SyntheticSecond => ProjectionParams::jgd2011_zone10(),
        }
    }

    fn id_base(&self) -> i64 {
        match self {
            FixtureCity::SyntheticSmall => 1_000_000,
            FixtureCity::SyntheticSecond => 5_000_000,
        }
    }

    /// Terrain per quadrant; `t` in [0, 1] varies across the quadrant.
    fn elevation(&self, quadrant: Quadrant, t: f64) -> f64 {
        match (self, quadrant) {
            (FixtureCity::SyntheticSmall, Quadrant::SouthWest) => 10.0 + 4.0 * t,
            (FixtureCity::SyntheticSmall, Quadrant::NorthWest) => 35.0 + 10.0 * t,
            (FixtureCity::SyntheticSmall, Quadrant::SouthEast) => 20.0 + 6.0 * t,
            (FixtureCity::SyntheticSmall, Quadrant::NorthEast) => 110.0 + 30.0 * t,
            (FixtureCity::SyntheticSecond, Quadrant::SouthWest) => 4.0 + 2.0 * t,
            (FixtureCity::SyntheticSecond, Quadrant::NorthWest) => 60.0 + 45.0 * t,
            (FixtureCity::SyntheticSecond, Quadrant::SouthEast) => 15.0 + 10.0 * t,
            (FixtureCity::SyntheticSecond, Quadrant::NorthEast) => 125.0 + 40.0 * t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Quadrant {
    SouthWest,
    NorthWest,
    SouthEast,
    NorthEast,
}

struct Layout {
    proj: ProjectionParams,
    origin: PlanarCoord,
    base: i64,
}

impl Layout {
    fn planar(&self, r: usize, c: usize) -> PlanarCoord {
        PlanarCoord::new(self.origin.x + c as f64 * SPACING_M, self.origin.y + r as f64 * SPACING_M)
    }

    fn geo(&self, p: PlanarCoord) -> GeoCoord {
        self.proj.unproject(p)
    }

    fn node_id(&self, r: usize, c: usize) -> i64 {
        self.base + (r * 100 + c) as i64
    }

    fn river_x(&self) -> f64 {
        self.origin.x + (RIVER_COL as f64 + 0.5) * SPACING_M
    }

    fn river_y(&self) -> f64 {
        self.origin.y + (RIVER_ROW as f64 + 0.5) * SPACING_M
    }

    fn extent(&self) -> (PlanarCoord, PlanarCoord) {
        let hi = self.planar(ROWS - 1, COLS - 1);
        (
            PlanarCoord::new(self.origin.x - MARGIN_M, self.origin.y - MARGIN_M),
            PlanarCoord::new(hi.x + MARGIN_M, hi.y + MARGIN_M),
        )
    }

    fn quadrant(&self, p: PlanarCoord) -> Quadrant {
        match (p.x > self.river_x(), p.y > self.river_y()) {
            (false, false) => Quadrant::SouthWest,
            (false, true) => Quadrant::NorthWest,
            (true, false) => Quadrant::SouthEast,
            (true, true) => Quadrant::NorthEast,
        }
    }
}

/// Grid edge between `(r, c)` and its east (`horizontal`) or north neighbor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct GridEdge {
    r: usize,
    c: usize,
    horizontal: bool,
}

impl GridEdge {
    fn far(&self) -> (usize, usize) {
        if self.horizontal {
            (self.r, self.c + 1)
        } else {
            (self.r + 1, self.c)
        }
    }

    fn crosses_river(&self) -> bool {
        if self.horizontal {
            self.c == RIVER_COL
        } else {
            self.r == RIVER_ROW
        }
    }

    fn is_crossing_bridge(&self) -> bool {
        if self.horizontal {
            self.c == RIVER_COL && self.r <= RIVER_ROW
        } else {
            self.r == RIVER_ROW && (self.c <= RIVER_COL || self.c == NE_LINK_COL)
        }
    }
}

fn all_edges() -> Vec<GridEdge> {
    let mut v = Vec::new();
    for r in 0..ROWS {
        for c in 0..COLS - 1 {
            v.push(GridEdge { r, c, horizontal: true });
        }
    }
    for r in 0..ROWS - 1 {
        for c in 0..COLS {
            v.push(GridEdge { r, c, horizontal: false });
        }
    }
    v
}

fn tags(pairs: &[(&str, &str)]) -> Tags {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn node(id: i64, at: GeoCoord, tags: Tags) -> RawOsmElement {
    RawOsmElement { id, kind: ElementKind::Node, tags, geometry: vec![at], node_ids: vec![], members: vec![] }
}

fn way(id: i64, node_ids: Vec<i64>, geometry: Vec<GeoCoord>, tags: Tags) -> RawOsmElement {
    RawOsmElement { id, kind: ElementKind::Way, tags, geometry, node_ids, members: vec![] }
}

/// Element lists in [`OverpassQuerySpec::ALL`] order, plus the raster.
pub struct FixtureData {
    pub bbox: BoundingBox,
    pub projection: ProjectionParams,
    pub lists: [Vec<RawOsmElement>; 6],
    pub raster: ElevationRaster,
}

pub fn generate(city: FixtureCity) -> FixtureData {
    let proj = city.projection();
    let center = proj.project(city.center()).expect("fixture centers are inside their zones");
    let origin = PlanarCoord::new(
        (center.x - (COLS - 1) as f64 * SPACING_M / 2.0).round(),
        (center.y - (ROWS - 1) as f64 * SPACING_M / 2.0).round(),
    );
    let l = Layout { proj, origin, base: city.id_base() };
    let mut rng = ChaCha8Rng::seed_from_u64(0xb1d6e ^ city.id_base() as u64);
    let label = match city {
        FixtureCity::SyntheticSmall => "Minami",
        FixtureCity::SyntheticSecond => "Kita",
    };

    let edges = all_edges();
    let regular: Vec<GridEdge> = edges.iter().copied().filter(|e| !e.crosses_river()).collect();
    let picked: Vec<GridEdge> = regular.choose_multiple(&mut rng, INTRA_BRIDGES + UNNAMED_BRIDGES).copied().collect();
    let intra: BTreeSet<GridEdge> = picked[..INTRA_BRIDGES].iter().copied().collect();
    let unnamed: BTreeSet<GridEdge> = picked[INTRA_BRIDGES..].iter().copied().collect();

    let mut streets = Vec::new();
    let mut bridge_ways = Vec::new();
    let mut way_seq = 0i64;
    let mut bridge_seq = 0usize;
    let mut mid_seq = 0i64;

    let line_class = |e: &GridEdge| {
        let on_arterial = if e.horizontal { e.r == 5 } else { e.c == 5 };
        if on_arterial { "primary" } else { "residential" }
    };

    // Walk each grid line, emitting maximal street runs and a separate way
    // per bridge edge.
    let lines: Vec<Vec<GridEdge>> = (0..ROWS)
        .map(|r| (0..COLS - 1).map(|c| GridEdge { r, c, horizontal: true }).collect())
        .chain((0..COLS).map(|c| (0..ROWS - 1).map(|r| GridEdge { r, c, horizontal: false }).collect()))
        .collect();
    for line in &lines {
        let mut run: Vec<(usize, usize)> = Vec::new();
        let flush = |run: &mut Vec<(usize, usize)>, streets: &mut Vec<RawOsmElement>, way_seq: &mut i64, class: &str| {
            if run.len() >= 2 {
                let ids = run.iter().map(|&(r, c)| l.node_id(r, c)).collect();
                let geom = run.iter().map(|&(r, c)| l.geo(l.planar(r, c))).collect();
                streets.push(way(l.base + 100_000 + *way_seq, ids, geom, tags(&[("highway", class)])));
                *way_seq += 1;
            }
            run.clear();
        };
        for e in line {
            let class = line_class(e);
            let is_bridge = e.is_crossing_bridge() || intra.contains(e) || unnamed.contains(e);
            if e.crosses_river() && !e.is_crossing_bridge() {
                flush(&mut run, &mut streets, &mut way_seq, class);
                continue;
            }
            if is_bridge {
                flush(&mut run, &mut streets, &mut way_seq, class);
                let (a, b) = ((e.r, e.c), e.far());
                let (pa, pb) = (l.planar(a.0, a.1), l.planar(b.0, b.1));
                let mid = PlanarCoord::new((pa.x + pb.x) / 2.0, (pa.y + pb.y) / 2.0);
                let mid_id = l.base + 50_000 + mid_seq;
                mid_seq += 1;
                let mut t = Tags::new();
                let highway = if class == "primary" {
                    "primary"
                } else {
                    ["residential", "secondary", "tertiary", "unclassified"][rng.gen_range(0..4)]
                };
                t.insert("highway".into(), highway.into());
                t.insert("bridge".into(), if rng.gen_bool(0.2) { "viaduct" } else { "yes" }.into());
                t.insert("layer".into(), "1".into());
                if rng.gen_bool(0.6) {
                    t.insert("lanes".into(), rng.gen_range(1..=4).to_string());
                }
                if rng.gen_bool(0.5) {
                    t.insert("maxspeed".into(), ["30", "40", "50", "60"][rng.gen_range(0..4)].into());
                }
                if rng.gen_bool(0.3) {
                    t.insert("width".into(), format!("{:.1}", rng.gen_range(4.0..14.0)));
                }
                if !unnamed.contains(e) {
                    bridge_seq += 1;
                    t.insert("name".into(), format!("{label} Bridge {bridge_seq}"));
                }
                let w = way(
                    l.base + 200_000 + mid_seq,
                    vec![l.node_id(a.0, a.1), mid_id, l.node_id(b.0, b.1)],
                    vec![l.geo(pa), l.geo(mid), l.geo(pb)],
                    t,
                );
                streets.push(w.clone());
                bridge_ways.push(w);
                continue;
            }
            if run.is_empty() {
                run.push((e.r, e.c));
            }
            run.push(e.far());
        }
        let class = line_class(&line[0]);
        flush(&mut run, &mut streets, &mut way_seq, class);
    }

    let mut man_made = Vec::new();
    for k in 0..MAN_MADE_SNAPPED {
        let (r, c) = (rng.gen_range(0..ROWS), rng.gen_range(0..COLS));
        let p = l.planar(r, c);
        let at = PlanarCoord::new(p.x + 12.0, p.y + 5.0);
        let t = tags(&[("man_made", "bridge"), ("name", &format!("{label} Footbridge {}", k + 1))]);
        man_made.push(node(l.base + 300_000 + k as i64, l.geo(at), t));
    }
    for k in 0..MAN_MADE_OFF_GRID {
        let at = PlanarCoord::new(l.origin.x - 150.0, l.origin.y + 400.0 + 600.0 * k as f64);
        let t = tags(&[("man_made", "bridge"), ("name", &format!("{label} Old Bridge {}", k + 1))]);
        man_made.push(node(l.base + 300_100 + k as i64, l.geo(at), t));
    }

    let mut facilities = Vec::new();
    let mut fid = l.base + 400_000;
    let mut place = |rng: &mut ChaCha8Rng, r: usize, c: usize, t: Tags, facilities: &mut Vec<RawOsmElement>| {
        let p = l.planar(r, c);
        let at = PlanarCoord::new(p.x + rng.gen_range(5.0..20.0), p.y + rng.gen_range(5.0..20.0));
        facilities.push(node(fid, l.geo(at), t));
        fid += 1;
    };
    for (r, c) in [(3, 3), (16, 4), (4, 17)] {
        place(&mut rng, r, c, tags(&[("amenity", "hospital"), ("name", "General Hospital")]), &mut facilities);
    }
    for _ in 0..BUS_STOPS {
        let (r, c) = (rng.gen_range(0..ROWS), rng.gen_range(0..COLS));
        place(&mut rng, r, c, tags(&[("highway", "bus_stop")]), &mut facilities);
    }
    for (i, (r, c)) in [(1, 8), (8, 1), (14, 7), (20, 2), (6, 14), (19, 19)].into_iter().enumerate() {
        let kind = if i == 5 { "nature_reserve" } else { "park" };
        place(&mut rng, r, c, tags(&[("leisure", kind)]), &mut facilities);
    }
    let shop_kinds = ["supermarket", "convenience", "bakery", "greengrocer", "clothes", "hairdresser", "hardware", "books"];
    for _ in 0..SHOPS {
        let (r, c) = (rng.gen_range(0..ROWS), rng.gen_range(0..COLS));
        let kind = shop_kinds[rng.gen_range(0..shop_kinds.len())];
        place(&mut rng, r, c, tags(&[("shop", kind)]), &mut facilities);
    }

    let mut buildings = Vec::new();
    for k in 0..BUILDINGS {
        let (r, c) = (rng.gen_range(0..ROWS), rng.gen_range(0..COLS));
        let p = l.planar(r, c);
        let sx = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let sy = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let (cx, cy) = (p.x + sx * rng.gen_range(15.0..32.0), p.y + sy * rng.gen_range(15.0..32.0));
        let half = 6.0;
        let corners = [(-half, -half), (half, -half), (half, half), (-half, half), (-half, -half)];
        let geom: Vec<GeoCoord> = corners.iter().map(|(dx, dy)| l.geo(PlanarCoord::new(cx + dx, cy + dy))).collect();
        let id = l.base + 500_000 + k as i64;
        let ids = (0..5).map(|i| id * 10 + if i == 4 { 0 } else { i }).collect();
        let roll: f64 = rng.gen();
        let t = if roll < 0.5 {
            tags(&[("building", "house")])
        } else if roll < 0.65 {
            tags(&[("building", "residential")])
        } else if roll < 0.8 {
            tags(&[("building", "apartments")])
        } else if roll < 0.95 {
            tags(&[("building", "yes")])
        } else {
            tags(&[("building", "commercial")])
        };
        buildings.push(way(id, ids, geom, t));
    }

    let (lo, hi) = l.extent();
    let rivers = vec![
        way(
            l.base + 600_000,
            vec![l.base + 600_010, l.base + 600_011],
            vec![l.geo(PlanarCoord::new(lo.x, l.river_y())), l.geo(PlanarCoord::new(hi.x, l.river_y()))],
            tags(&[("waterway", "river"), ("name", &format!("{label} River"))]),
        ),
        way(
            l.base + 600_001,
            vec![l.base + 600_020, l.base + 600_021],
            vec![l.geo(PlanarCoord::new(l.river_x(), lo.y)), l.geo(PlanarCoord::new(l.river_x(), hi.y))],
            tags(&[("waterway", "river"), ("name", &format!("{label} Creek"))]),
        ),
    ];

    let corners = [lo, hi, PlanarCoord::new(lo.x, hi.y), PlanarCoord::new(hi.x, lo.y)].map(|p| l.geo(p));
    let bbox = BoundingBox {
        min_lat: corners.iter().map(|g| g.lat).fold(f64::INFINITY, f64::min),
        min_lon: corners.iter().map(|g| g.lon).fold(f64::INFINITY, f64::min),
        max_lat: corners.iter().map(|g| g.lat).fold(f64::NEG_INFINITY, f64::max),
        max_lon: corners.iter().map(|g| g.lon).fold(f64::NEG_INFINITY, f64::max),
    };

    let ncols = ((hi.x - lo.x) / RASTER_CELL_M).ceil() as usize;
    let nrows = ((hi.y - lo.y) / RASTER_CELL_M).ceil() as usize;
    let mut values = Vec::with_capacity(ncols * nrows);
    // Row 0 is the northern edge.
    for row in 0..nrows {
        for col in 0..ncols {
            let p = PlanarCoord::new(
                lo.x + (col as f64 + 0.5) * RASTER_CELL_M,
                lo.y + (nrows - 1 - row) as f64 * RASTER_CELL_M + 0.5 * RASTER_CELL_M,
            );
            let t = ((p.x - lo.x) / (hi.x - lo.x) + (p.y - lo.y) / (hi.y - lo.y)) / 2.0;
            values.push((city.elevation(l.quadrant(p), t) * 10.0).round() / 10.0);
        }
    }
    let raster = ElevationRaster::new(ncols, nrows, lo.x, lo.y, RASTER_CELL_M, -9999.0, values)
        .expect("raster dimensions match");

    FixtureData {
        bbox,
        projection: proj,
        lists: [man_made, bridge_ways, streets, facilities, buildings, rivers],
        raster,
    }
}

/// Writes `config.yaml`, `elevation.asc` and a warm cache under `dir`.
/// Returns the config path.
pub fn write_fixture(city: FixtureCity, dir: &Path) -> std::io::Result<PathBuf> {
    let data = generate(city);
    let cache = dir.join("cache");
    std::fs::create_dir_all(&cache)?;
    let client = OverpassClient::new(String::new(), cache.clone());
    for (spec, elements) in OverpassQuerySpec::ALL.iter().zip(&data.lists) {
        let path = client.cache_path(&spec.query_text(&data.bbox));
        std::fs::write(path, to_overpass_json(elements))?;
    }
    std::fs::write(dir.join("elevation.asc"), data.raster.to_ascii())?;
    let b = &data.bbox;
    let p = &data.projection;
    let config = format!(
        "city: {name}\n\
         bbox: {{min_lat: {:?}, min_lon: {:?}, max_lat: {:?}, max_lon: {:?}}}\n\
         projection: {{lat0: {:?}, lon0: {:?}, k0: {:?}}}\n\
         elevation_path: elevation.asc\n\
         overpass_url: http://127.0.0.1:9/api/interpreter\n\
         cache_dir: cache\n\
         output_dir: output\n\
         rng_seed: 42\n\
         hdbscan: {{min_cluster_size: 5, min_samples: 5}}\n\
         llm: {{endpoint: \"mock://\", max_in_flight: 2}}\n",
        b.min_lat,
        b.min_lon,
        b.max_lat,
        b.max_lon,
        p.lat0,
        p.lon0,
        p.k0,
        name = city.name(),
    );
    let path = dir.join("config.yaml");
    std::fs::write(&path, config)?;
    Ok(path)
}
