use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Social,
    Topology,
    Spatial,
    Facility,
    Attribute,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 5] = [
        FeatureGroup::Social,
        FeatureGroup::Topology,
        FeatureGroup::Spatial,
        FeatureGroup::Facility,
        FeatureGroup::Attribute,
    ];

    /// Entries each group must contribute.
    pub fn expected_count(&self) -> usize {
        match self {
            FeatureGroup::Social => 5,
            FeatureGroup::Topology => 8,
            FeatureGroup::Spatial => 6,
            FeatureGroup::Facility => 15,
            FeatureGroup::Attribute => 18,
        }
    }
}

/// Where an attribute feature reads its value from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AttributeSource {
    /// 1 when tag `key` equals `value`, else 0.
    OneHot { key: String, value: String },
    /// Bridge structure class: `yes`, `viaduct`, `man_made` or `other`.
    BridgeStructure { class: String },
    /// 1 when tag `key` is present, else 0.
    Flag { key: String },
    /// Leading number of tag `key`, or -1 when absent or unparsable.
    Numeric { key: String },
    /// Projected length of the bridge geometry in meters, -1 without geometry.
    GeometryLength,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeFeature {
    pub name: String,
    pub source: AttributeSource,
}

impl AttributeFeature {
    fn new(name: &str, source: AttributeSource) -> Self {
        Self { name: name.to_string(), source }
    }
}

const HIGHWAY_CLASSES: [&str; 8] = [
    "motorway",
    "trunk",
    "primary",
    "secondary",
    "tertiary",
    "residential",
    "unclassified",
    "service",
];

/// Default attribute block: highway class one-hots, structure one-hots,
/// railway flag and five numeric attributes.
pub fn default_attributes() -> Vec<AttributeFeature> {
    let mut v: Vec<AttributeFeature> = HIGHWAY_CLASSES
        .iter()
        .map(|c| {
            AttributeFeature::new(
                &format!("highway_{c}"),
                AttributeSource::OneHot { key: "highway".into(), value: c.to_string() },
            )
        })
        .collect();
    for s in ["yes", "viaduct", "man_made", "other"] {
        v.push(AttributeFeature::new(
            &format!("bridge_{s}"),
            AttributeSource::BridgeStructure { class: s.into() },
        ));
    }
    v.push(AttributeFeature::new("railway", AttributeSource::Flag { key: "railway".into() }));
    for k in ["lanes", "maxspeed", "layer", "width"] {
        v.push(AttributeFeature::new(k, AttributeSource::Numeric { key: k.into() }));
    }
    v.push(AttributeFeature::new("length", AttributeSource::GeometryLength));
    v
}

/// Optional attribute entries that can be swapped into the attribute block.
pub fn optional_attributes() -> Vec<AttributeFeature> {
    ["voltage", "gauge", "frequency", "passenger_lines"]
        .iter()
        .map(|k| AttributeFeature::new(k, AttributeSource::Numeric { key: k.to_string() }))
        .collect()
}

/// Extractors for the fixed (non-attribute) groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extractor {
    Social(usize),
    Betweenness,
    NumStreetConnections,
    TwoHopNeighbors,
    ClusteringCoefficient,
    StreetDegreeMean,
    StreetDegreeMax,
    SnapDistanceMean,
    ComponentSizeFraction,
    LogRiverDistance,
    Elevation,
    Latitude,
    Longitude,
    LocalRelief,
    LogCenterDistance,
    FacilityCount { category: String, radius_m: u32 },
    FacilityNearest { category: String },
    ResidencesWithin1000,
    PopulationWithin1000,
    HighwayNearest,
    Attribute(AttributeSource),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    pub group: FeatureGroup,
    pub extractor: Extractor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRegistry {
    pub defs: Vec<FeatureDef>,
}

pub const SOCIAL_NAMES: [&str; 5] = [
    "transit_desert",
    "hospital_access",
    "isolation_risk",
    "supply_chain",
    "green_space",
];

impl FeatureRegistry {
    pub fn with_attributes(attributes: &[AttributeFeature]) -> Self {
        let mut defs = Vec::with_capacity(52);
        let mut push = |name: &str, group, extractor| {
            defs.push(FeatureDef { name: name.to_string(), group, extractor })
        };
        for (i, n) in SOCIAL_NAMES.iter().enumerate() {
            push(n, FeatureGroup::Social, Extractor::Social(i));
        }
        use Extractor::*;
        let topo = [
            ("betweenness", Betweenness),
            ("num_street_connections", NumStreetConnections),
            ("two_hop_neighbors", TwoHopNeighbors),
            ("clustering_coefficient", ClusteringCoefficient),
            ("street_degree_mean", StreetDegreeMean),
            ("street_degree_max", StreetDegreeMax),
            ("snap_distance_mean", SnapDistanceMean),
            ("component_size_fraction", ComponentSizeFraction),
        ];
        for (n, e) in topo {
            push(n, FeatureGroup::Topology, e);
        }
        let spatial = [
            ("log_river_distance", LogRiverDistance),
            ("elevation", Elevation),
            ("latitude", Latitude),
            ("longitude", Longitude),
            ("local_relief_500m", LocalRelief),
            ("log_center_distance", LogCenterDistance),
        ];
        for (n, e) in spatial {
            push(n, FeatureGroup::Spatial, e);
        }
        for cat in ["hospital", "bus_stop", "park", "shop"] {
            for r in [500u32, 1000] {
                push(
                    &format!("{cat}_count_{r}m"),
                    FeatureGroup::Facility,
                    FacilityCount { category: cat.into(), radius_m: r },
                );
            }
            push(
                &format!("{cat}_nearest_m"),
                FeatureGroup::Facility,
                FacilityNearest { category: cat.into() },
            );
        }
        push("residences_within_1000m", FeatureGroup::Facility, ResidencesWithin1000);
        push("population_within_1000m", FeatureGroup::Facility, PopulationWithin1000);
        push("highway_nearest_m", FeatureGroup::Facility, HighwayNearest);
        for a in attributes {
            push(&a.name, FeatureGroup::Attribute, Attribute(a.source.clone()));
        }
        Self { defs }
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.defs.iter().map(|d| d.name.clone()).collect()
    }

    pub fn group_count(&self, g: FeatureGroup) -> usize {
        self.defs.iter().filter(|d| d.group == g).count()
    }

    pub fn validate(&self) -> Result<(), String> {
        for g in FeatureGroup::ALL {
            let n = self.group_count(g);
            if n != g.expected_count() {
                return Err(format!("feature group {g:?} has {n} entries, expected {}", g.expected_count()));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for d in &self.defs {
            if !seen.insert(d.name.as_str()) {
                return Err(format!("duplicate feature name {:?}", d.name));
            }
            if d.name.is_empty() || d.name.contains([',', '"', '\n']) {
                return Err(format!("feature name {:?} is not a plain CSV field", d.name));
            }
            if let Extractor::Attribute(AttributeSource::BridgeStructure { class: s }) = &d.extractor {
                if !["yes", "viaduct", "man_made", "other"].contains(&s.as_str()) {
                    return Err(format!("unknown bridge structure class {s:?}"));
                }
            }
        }
        Ok(())
    }
}

impl Default for FeatureRegistry {
    fn default() -> Self {
        Self::with_attributes(&default_attributes())
    }
}

/// `features` section of the config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureConfig {
    /// Replaces the default attribute block; must hold 18 entries.
    pub attributes: Option<Vec<AttributeFeature>>,
}

impl FeatureConfig {
    pub fn registry(&self) -> FeatureRegistry {
        match &self.attributes {
            Some(a) => FeatureRegistry::with_attributes(a),
            None => FeatureRegistry::default(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.registry().validate()
    }
}
