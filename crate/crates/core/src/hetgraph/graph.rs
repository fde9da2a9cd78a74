use crate::ingest::RawOsmElement;
use crate::spatial::{PlanarCoord, ProjectionParams};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

/// Segments between distinct nodes that project onto the same point get this
/// length so that every edge stays strictly positive.
pub const MIN_EDGE_LENGTH_M: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeKind {
    Street { way_id: i64 },
    Snap { bridge: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn other(&self, n: usize) -> usize {
        if n == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected weighted graph with compressed adjacency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "GraphParts", into = "GraphParts")]
pub struct StreetGraph {
    /// External id per node (OSM node id for street nodes).
    pub node_ids: Vec<i64>,
    pub coords: Vec<PlanarCoord>,
    pub edges: Vec<Edge>,
    offsets: Vec<usize>,
    /// (neighbor, edge index), sorted per node.
    adjacency: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphParts {
    node_ids: Vec<i64>,
    coords: Vec<PlanarCoord>,
    edges: Vec<Edge>,
}

impl From<GraphParts> for StreetGraph {
    fn from(p: GraphParts) -> Self {
        StreetGraph::from_edges(p.node_ids, p.coords, p.edges)
    }
}

impl From<StreetGraph> for GraphParts {
    fn from(g: StreetGraph) -> Self {
        GraphParts {
            node_ids: g.node_ids,
            coords: g.coords,
            edges: g.edges,
        }
    }
}

impl Default for StreetGraph {
    fn default() -> Self {
        Self::from_edges(Vec::new(), Vec::new(), Vec::new())
    }
}

impl StreetGraph {
    /// Builds adjacency for an explicit edge list. Self-loops are dropped.
    pub fn from_edges(node_ids: Vec<i64>, coords: Vec<PlanarCoord>, edges: Vec<Edge>) -> Self {
        assert_eq!(node_ids.len(), coords.len());
        let n = node_ids.len();
        let edges: Vec<Edge> = edges.into_iter().filter(|e| e.u != e.v).collect();
        let mut degree = vec![0usize; n];
        for e in &edges {
            assert!(e.u < n && e.v < n, "edge endpoint out of range");
            assert!(e.length > 0.0 && e.length.is_finite(), "edge length must be > 0");
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut adjacency = vec![(0, 0); offsets[n]];
        for (i, e) in edges.iter().enumerate() {
            adjacency[fill[e.u]] = (e.v, i);
            fill[e.u] += 1;
            adjacency[fill[e.v]] = (e.u, i);
            fill[e.v] += 1;
        }
        for v in 0..n {
            adjacency[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Self {
            node_ids,
            coords,
            edges,
            offsets,
            adjacency,
        }
    }

    /// Convenience constructor for tests and fixtures: nodes `0..n` at the
    /// origin, street edges with way id 0.
    pub fn from_weighted(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        Self::from_edges(
            (0..n as i64).collect(),
            vec![PlanarCoord::default(); n],
            edges
                .iter()
                .map(|&(u, v, length)| Edge {
                    u,
                    v,
                    length,
                    kind: EdgeKind::Street { way_id: 0 },
                })
                .collect(),
        )
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Same nodes, with `extra` edges appended.
    pub fn with_extra_edges(&self, extra: Vec<Edge>) -> Self {
        let mut edges = self.edges.clone();
        edges.extend(extra);
        Self::from_edges(self.node_ids.clone(), self.coords.clone(), edges)
    }

    /// Text dump: a node table `id x y` followed by an edge list
    /// `u v length_m way_id` using external node ids. Snap edges are written
    /// with way id `snap:<bridge>`.
    pub fn to_dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# nodes {}", self.node_count());
        for (id, c) in self.node_ids.iter().zip(&self.coords) {
            let _ = writeln!(s, "{id} {} {}", c.x, c.y);
        }
        let _ = writeln!(s, "# edges {}", self.edge_count());
        for e in &self.edges {
            let way = match e.kind {
                EdgeKind::Street { way_id } => way_id.to_string(),
                EdgeKind::Snap { bridge } => format!("snap:{bridge}"),
            };
            let _ = writeln!(
                s,
                "{} {} {} {way}",
                self.node_ids[e.u], self.node_ids[e.v], e.length
            );
        }
        s
    }

    pub fn from_dump(text: &str) -> Result<Self, String> {
        let mut node_ids = Vec::new();
        let mut coords = Vec::new();
        let mut edges = Vec::new();
        let mut index: HashMap<i64, usize> = HashMap::new();
        let mut in_edges = false;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                in_edges = rest.trim_start().starts_with("edges");
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || format!("line {}: malformed {line:?}", ln + 1);
            if !in_edges {
                if f.len() != 3 {
                    return Err(bad());
                }
                let id: i64 = f[0].parse().map_err(|_| bad())?;
                let x: f64 = f[1].parse().map_err(|_| bad())?;
                let y: f64 = f[2].parse().map_err(|_| bad())?;
                if index.insert(id, node_ids.len()).is_some() {
                    return Err(format!("line {}: duplicate node {id}", ln + 1));
                }
                node_ids.push(id);
                coords.push(PlanarCoord::new(x, y));
            } else {
                if f.len() != 4 {
                    return Err(bad());
                }
                let node = |s: &str| -> Result<usize, String> {
                    let id: i64 = s.parse().map_err(|_| bad())?;
                    index.get(&id).copied().ok_or_else(|| format!("line {}: unknown node {id}", ln + 1))
                };
                let length: f64 = f[2].parse().map_err(|_| bad())?;
                if !(length > 0.0 && length.is_finite()) {
                    return Err(format!("line {}: length must be > 0", ln + 1));
                }
                let kind = match f[3].strip_prefix("snap:") {
                    Some(b) => EdgeKind::Snap {
                        bridge: b.parse().map_err(|_| bad())?,
                    },
                    None => EdgeKind::Street {
                        way_id: f[3].parse().map_err(|_| bad())?,
                    },
                };
                edges.push(Edge {
                    u: node(f[0])?,
                    v: node(f[1])?,
                    length,
                    kind,
                });
            }
        }
        Ok(Self::from_edges(node_ids, coords, edges))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub ways_used: usize,
    pub degenerate_ways: usize,
    pub ways_without_node_ids: usize,
    pub ways_out_of_projection: usize,
    pub parallel_edges_collapsed: usize,
}

pub struct BuiltStreets {
    pub graph: StreetGraph,
    /// Node lies on a `highway=primary|trunk` way.
    pub arterial: Vec<bool>,
    pub report: BuildReport,
}

/// Builds the street graph from highway ways. Every way node becomes a graph
/// node (ordered by OSM id) and every consecutive node pair an edge.
pub fn build_street_graph(ways: &[RawOsmElement], proj: &ProjectionParams) -> BuiltStreets {
    let mut report = BuildReport::default();
    let mut node_pos: BTreeMap<i64, PlanarCoord> = BTreeMap::new();
    let mut arterial_ids = std::collections::HashSet::new();
    let mut segments: Vec<(i64, i64, f64, i64)> = Vec::new();

    'ways: for w in ways {
        if w.node_ids.len() != w.geometry.len() || w.node_ids.len() < 2 {
            report.ways_without_node_ids += 1;
            continue;
        }
        let first = w.geometry[0];
        if w.geometry.iter().all(|g| *g == first) {
            report.degenerate_ways += 1;
            continue;
        }
        let mut pts = Vec::with_capacity(w.geometry.len());
        for g in &w.geometry {
            match proj.project(*g) {
                Ok(p) => pts.push(p),
                Err(_) => {
                    report.ways_out_of_projection += 1;
                    continue 'ways;
                }
            }
        }
        report.ways_used += 1;
        let is_arterial = matches!(w.tag("highway"), Some("primary" | "trunk"));
        for (id, p) in w.node_ids.iter().zip(&pts) {
            node_pos.entry(*id).or_insert(*p);
            if is_arterial {
                arterial_ids.insert(*id);
            }
        }
        for i in 0..pts.len() - 1 {
            let (a, b) = (w.node_ids[i], w.node_ids[i + 1]);
            if a == b {
                continue;
            }
            let len = pts[i].distance(&pts[i + 1]).max(MIN_EDGE_LENGTH_M);
            segments.push((a, b, len, w.id));
        }
    }
    if report.degenerate_ways > 0 {
        log::warn!("skipped {} degenerate ways", report.degenerate_ways);
    }

    let index: HashMap<i64, usize> = node_pos.keys().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut best: BTreeMap<(usize, usize), Edge> = BTreeMap::new();
    for (a, b, len, way) in segments {
        let (u, v) = (index[&a], index[&b]);
        let key = (u.min(v), u.max(v));
        let e = Edge {
            u: key.0,
            v: key.1,
            length: len,
            kind: EdgeKind::Street { way_id: way },
        };
        match best.get_mut(&key) {
            Some(prev) => {
                report.parallel_edges_collapsed += 1;
                if len < prev.length {
                    *prev = e;
                }
            }
            None => {
                best.insert(key, e);
            }
        }
    }
    let arterial = node_pos.keys().map(|id| arterial_ids.contains(id)).collect();
    let graph = StreetGraph::from_edges(
        node_pos.keys().copied().collect(),
        node_pos.values().copied().collect(),
        best.into_values().collect(),
    );
    BuiltStreets {
        graph,
        arterial,
        report,
    }
}
