use super::matrix::{FeatureError, FeatureMatrix};
use super::registry::{AttributeSource, Extractor, FeatureRegistry};
use crate::hetgraph::{connected_components, hop_neighborhood, ClosureMask, HeteroGraph, PlacedBridge};
use crate::ingest::{ElevationRaster, FacilityCategory, SourcePattern};
use crate::scoring::ScoreCard;
use crate::spatial::{haversine_m, PlanarCoord, SpatialIndex};
use std::collections::HashSet;

/// Sentinel for numeric features that cannot be measured.
pub const ABSENT: f64 = -1.0;

pub struct FeatureInputs<'a> {
    pub graph: &'a HeteroGraph,
    /// Row-aligned with `graph.bridges`.
    pub cards: &'a [ScoreCard],
    /// Per routing-graph node.
    pub betweenness: &'a [f64],
    pub raster: Option<&'a ElevationRaster>,
}

/// Leading decimal number of a tag value (`"50 mph"` → 50, `"2;3"` → 2).
pub fn leading_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let end = s
        .char_indices()
        .find(|&(i, c)| !(c.is_ascii_digit() || c == '.' || (i == 0 && (c == '-' || c == '+'))))
        .map_or(s.len(), |(i, _)| i);
    s[..end].parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Structure class used by the `bridge_*` one-hots.
pub fn bridge_structure(b: &PlacedBridge) -> &'static str {
    match b.record.tags.get("bridge").map(String::as_str) {
        Some("yes") => "yes",
        Some("viaduct") => "viaduct",
        _ if b.record.source_pattern == SourcePattern::ManMade
            || b.record.tags.get("man_made").is_some_and(|v| v == "bridge") =>
        {
            "man_made"
        }
        _ => "other",
    }
}

fn segment_distance(p: PlanarCoord, a: PlanarCoord, b: PlanarCoord) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(&a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(&PlanarCoord::new(a.x + t * dx, a.y + t * dy))
}

/// Distance to the nearest waterway polyline, `None` without waterways.
pub fn waterway_distance(p: PlanarCoord, waterways: &[Vec<PlanarCoord>]) -> Option<f64> {
    waterways
        .iter()
        .filter(|w| !w.is_empty())
        .map(|w| match w.len() {
            1 => p.distance(&w[0]),
            _ => w.windows(2).map(|s| segment_distance(p, s[0], s[1])).fold(f64::INFINITY, f64::min),
        })
        .min_by(f64::total_cmp)
}

struct Context<'a> {
    inp: &'a FeatureInputs<'a>,
    street: SpatialIndex,
    street_components: Vec<usize>,
    component_sizes: Vec<usize>,
    center: PlanarCoord,
    by_category: Vec<(FacilityCategory, SpatialIndex)>,
    residences: SpatialIndex,
    arterial: SpatialIndex,
}

impl<'a> Context<'a> {
    fn new(inp: &'a FeatureInputs<'a>) -> Self {
        let h = inp.graph;
        let coords = h.graph.coords[..h.n_street].to_vec();
        let n = coords.len().max(1) as f64;
        let center = PlanarCoord::new(
            coords.iter().map(|c| c.x).sum::<f64>() / n,
            coords.iter().map(|c| c.y).sum::<f64>() / n,
        );
        // Components of the street network alone.
        let all_snaps = ClosureMask::from_edges(h.bridges.iter().flat_map(|b| b.snaps.iter().map(|s| s.edge)));
        let street_components = connected_components(&h.graph, Some(&all_snaps));
        let mut component_sizes = vec![0usize; street_components.iter().copied().max().map_or(0, |m| m + 1)];
        for &c in &street_components[..h.n_street] {
            component_sizes[c] += 1;
        }
        let by_category = [
            FacilityCategory::Hospital,
            FacilityCategory::BusStop,
            FacilityCategory::Park,
            FacilityCategory::Shop,
        ]
        .into_iter()
        .map(|c| (c, SpatialIndex::build(h.facilities_of(c).map(|(_, f)| f.pos).collect())))
        .collect();
        let arterial = SpatialIndex::build(
            (0..h.n_street).filter(|&v| h.arterial[v]).map(|v| h.graph.coords[v]).collect(),
        );
        Self {
            inp,
            street: SpatialIndex::build(coords),
            street_components,
            component_sizes,
            center,
            by_category,
            residences: SpatialIndex::build(h.residences.iter().map(|r| r.pos).collect()),
            arterial,
        }
    }

    fn category(&self, name: &str) -> Result<&SpatialIndex, FeatureError> {
        self.by_category
            .iter()
            .find(|(c, _)| c.as_str() == name)
            .map(|(_, i)| i)
            .ok_or_else(|| FeatureError::Registry(format!("unknown facility category {name:?}")))
    }

    fn street_neighbors(&self, v: usize) -> Vec<usize> {
        let n = self.inp.graph.n_street;
        let mut out: Vec<usize> = self.inp.graph.graph.neighbors(v).iter().map(|&(u, _)| u).filter(|&u| u < n && u != v).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn clustering(&self, v: usize) -> f64 {
        let nb = self.street_neighbors(v);
        let k = nb.len();
        if k < 2 {
            return 0.0;
        }
        let set: HashSet<usize> = nb.iter().copied().collect();
        let links: usize = nb
            .iter()
            .map(|&u| self.street_neighbors(u).iter().filter(|w| set.contains(w)).count())
            .sum();
        // Every link is counted from both ends.
        links as f64 / (k * (k - 1)) as f64
    }

    fn nearest(idx: &SpatialIndex, p: PlanarCoord) -> f64 {
        idx.knn(p, 1).first().map_or(ABSENT, |n| n.distance)
    }

    fn value(&self, b: usize, ex: &Extractor) -> Result<f64, FeatureError> {
        let h = self.inp.graph;
        let br = &h.bridges[b];
        let snaps: Vec<usize> = br.snaps.iter().map(|s| s.street_node).collect();
        let mean_over = |f: &dyn Fn(usize) -> f64| {
            if snaps.is_empty() {
                0.0
            } else {
                snaps.iter().map(|&v| f(v)).sum::<f64>() / snaps.len() as f64
            }
        };
        let pos = br.pos;
        Ok(match ex {
            Extractor::Social(i) => self.inp.cards[b].indicators()[*i],
            Extractor::Betweenness => mean_over(&|v| self.inp.betweenness[v]),
            Extractor::NumStreetConnections => snaps.len() as f64,
            Extractor::TwoHopNeighbors => hop_neighborhood(&h.graph, br.node, 2, h.n_street) as f64,
            Extractor::ClusteringCoefficient => mean_over(&|v| self.clustering(v)),
            Extractor::StreetDegreeMean => mean_over(&|v| self.street_neighbors(v).len() as f64),
            Extractor::StreetDegreeMax => {
                snaps.iter().map(|&v| self.street_neighbors(v).len()).max().unwrap_or(0) as f64
            }
            Extractor::SnapDistanceMean => {
                if br.snaps.is_empty() {
                    ABSENT
                } else {
                    br.snaps.iter().map(|s| s.length).sum::<f64>() / br.snaps.len() as f64
                }
            }
            Extractor::ComponentSizeFraction => match snaps.first() {
                Some(&v) => self.component_sizes[self.street_components[v]] as f64 / h.n_street as f64,
                None => 0.0,
            },
            Extractor::LogRiverDistance => waterway_distance(pos, &h.waterways).map_or(ABSENT, f64::ln_1p),
            Extractor::Elevation => self.inp.raster.and_then(|r| r.sample(pos)).unwrap_or(ABSENT),
            Extractor::Latitude => br.record.centroid.lat,
            Extractor::Longitude => br.record.centroid.lon,
            Extractor::LocalRelief => {
                let elev: Vec<f64> = self
                    .street
                    .radius(pos, 500.0)
                    .into_iter()
                    .filter_map(|v| h.node_elevation[v])
                    .collect();
                if elev.is_empty() {
                    0.0
                } else {
                    elev.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                        - elev.iter().copied().fold(f64::INFINITY, f64::min)
                }
            }
            Extractor::LogCenterDistance => pos.distance(&self.center).ln_1p(),
            Extractor::FacilityCount { category, radius_m } => {
                self.category(category)?.radius(pos, *radius_m as f64).len() as f64
            }
            Extractor::FacilityNearest { category } => Self::nearest(self.category(category)?, pos),
            Extractor::ResidencesWithin1000 => self.residences.radius(pos, 1000.0).len() as f64,
            Extractor::PopulationWithin1000 => self
                .residences
                .radius(pos, 1000.0)
                .into_iter()
                .map(|r| h.residences[r].record.population_estimate)
                .sum(),
            Extractor::HighwayNearest => Self::nearest(&self.arterial, pos),
            Extractor::Attribute(src) => attribute_value(br, src),
        })
    }
}

pub fn attribute_value(b: &PlacedBridge, src: &AttributeSource) -> f64 {
    let tags = &b.record.tags;
    let flag = |x: bool| if x { 1.0 } else { 0.0 };
    match src {
        AttributeSource::OneHot { key, value } => flag(tags.get(key) == Some(value)),
        AttributeSource::BridgeStructure { class } => flag(bridge_structure(b) == class),
        AttributeSource::Flag { key } => flag(tags.contains_key(key)),
        AttributeSource::Numeric { key } => tags.get(key).and_then(|v| leading_number(v)).unwrap_or(ABSENT),
        AttributeSource::GeometryLength => {
            let g = &b.record.geometry;
            if g.len() < 2 {
                ABSENT
            } else {
                g.windows(2).map(|w| haversine_m(w[0], w[1])).sum()
            }
        }
    }
}

/// Raw feature matrix, one row per bridge in `graph.bridges` order.
pub fn assemble_features(inp: &FeatureInputs, registry: &FeatureRegistry) -> Result<FeatureMatrix, FeatureError> {
    registry.validate().map_err(FeatureError::Registry)?;
    let h = inp.graph;
    if inp.cards.len() != h.bridges.len() {
        return Err(FeatureError::Mismatch(format!(
            "{} score cards for {} bridges",
            inp.cards.len(),
            h.bridges.len()
        )));
    }
    if inp.betweenness.len() != h.graph.node_count() {
        return Err(FeatureError::Mismatch(format!(
            "{} betweenness values for {} nodes",
            inp.betweenness.len(),
            h.graph.node_count()
        )));
    }
    if let Some((b, c)) = h.bridges.iter().zip(inp.cards).find(|(b, c)| b.record.osm_id != c.bridge_id) {
        return Err(FeatureError::Mismatch(format!(
            "score card {} does not match bridge {}",
            c.bridge_id, b.record.osm_id
        )));
    }
    let ctx = Context::new(inp);
    let values = (0..h.bridges.len())
        .map(|b| registry.defs.iter().map(|d| ctx.value(b, &d.extractor)).collect())
        .collect::<Result<Vec<Vec<f64>>, _>>()?;
    FeatureMatrix::new(
        h.bridges.iter().map(|b| b.record.osm_id).collect(),
        h.bridges.iter().map(|b| b.record.city.clone()).collect(),
        registry.names(),
        values,
    )
}
