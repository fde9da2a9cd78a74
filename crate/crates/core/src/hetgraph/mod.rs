//! Heterogeneous urban graph: streets, bridges, facilities and residences.

mod betweenness;
mod graph;
mod hetero;
mod paths;

pub use betweenness::{betweenness, betweenness_sources};
pub use graph::{build_street_graph, BuildReport, BuiltStreets, Edge, EdgeKind, StreetGraph, MIN_EDGE_LENGTH_M};
pub use hetero::{
    EntityKind, GraphError, HeteroGraph, PlanarInputs, PlacedBridge, PlacedFacility, PlacedResidence,
    ProximityEdge, SnapEdge, PROXIMITY_RADIUS_M,
};
pub use paths::{
    component_count, connected_components, hop_neighborhood, reachable_from, shortest_path,
    ClosureMask, Dijkstra,
};
