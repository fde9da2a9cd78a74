//! Stage orchestration, artifact export and plotting.
//!
//! Every stage reads its inputs from the output directory and writes its
//! results back there, so any suffix of the chain can be re-run on its own.
//!
//! Layout under the output directory:
//!
//! ```text
//! cities/<city>/ingest.json, graph.json, scores.json,
//!               bridges_scored.csv, bridges.geojson
//! features.csv, feature_stats.csv, outliers.csv
//! umap_embedding.csv, cluster_statistics.csv
//! reports/cluster_<id>.md, reports/t<temperature>/cluster_<id>.md
//! quality_metrics.csv
//! plots/*.svg
//! run_manifest.json
//! ```

pub mod export;
pub mod fixtures;
pub mod svg;

use crate::cluster::{hdbscan, profile_clusters, umap, ClusterError};
use crate::config::PipelineConfig;
use crate::features::{
    assemble_features, drop_zero_variance, flag_outliers, zscore_normalize, FeatureError, FeatureInputs, FeatureMatrix,
    SOCIAL_NAMES,
};
use crate::hetgraph::{betweenness, HeteroGraph};
use crate::ingest::{ingest, ElevationRaster, FetchError, IngestData, IngestError};
use crate::interpret::{
    backend_for, generate_reports, quality_metrics, render_prompt, write_quality_csv, InterpretationRequest,
    QualityMetrics, TEMPERATURE_SWEEP,
};
use crate::scoring::{score_all, IndicatorTiming, ScoreCard};
use export::ExportError;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Graph,
    Score,
    Features,
    Cluster,
    Interpret,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Graph,
        Stage::Score,
        Stage::Features,
        Stage::Cluster,
        Stage::Interpret,
        Stage::Report,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Graph => "graph",
            Stage::Score => "score",
            Stage::Features => "features",
            Stage::Cluster => "cluster",
            Stage::Interpret => "interpret",
            Stage::Report => "report",
        }
    }

    /// Comma-separated stage names, returned in pipeline order.
    pub fn parse_list(s: &str) -> Result<Vec<Stage>, String> {
        let mut v = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Stage>, _>>()?;
        v.sort();
        v.dedup();
        if v.is_empty() {
            return Err("no stages given".into());
        }
        Ok(v)
    }
}

impl std::str::FromStr for Stage {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown stage {s:?}"))
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Empty means every stage.
    pub stages: Vec<Stage>,
    pub seed: Option<u64>,
    pub sweep_temperatures: bool,
    /// Overrides the first config's `output_dir`.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("stage {stage}: missing input {}; run the earlier stages first", path.display())]
    MissingArtifact { stage: Stage, path: PathBuf },
    #[error("network failure: {0}")]
    Network(String),
    #[error("stage {stage}: {message}")]
    Stage { stage: Stage, message: String },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::MissingArtifact { .. } => 3,
            PipelineError::Network(_) => 4,
            PipelineError::Stage { .. } => 1,
        }
    }
}

fn stage_err(stage: Stage) -> impl Fn(String) -> PipelineError {
    move |message| PipelineError::Stage { stage, message }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub city: Option<String>,
    /// Paths relative to the output directory where possible.
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub seed: u64,
    pub cities: Vec<String>,
    pub records: Vec<StageRecord>,
}

impl RunManifest {
    pub fn outputs(&self) -> impl Iterator<Item = &str> {
        self.records.iter().flat_map(|r| r.outputs.iter().map(String::as_str))
    }

    pub fn load(path: &Path) -> Option<Self> {
        serde_json::from_str(&std::fs::read_to_string(path).ok()?).ok()
    }
}

pub const MANIFEST_FILE: &str = "run_manifest.json";
pub const FEATURES_FILE: &str = "features.csv";
pub const CLUSTER_STATS_FILE: &str = "cluster_statistics.csv";
pub const EMBEDDING_FILE: &str = "umap_embedding.csv";

/// Graph stage output: the assembled graph and per-node betweenness.
#[derive(Debug, Serialize, Deserialize)]
pub struct GraphArtifact {
    pub hetero: HeteroGraph,
    pub betweenness: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScoresArtifact {
    pub cards: Vec<ScoreCard>,
    pub timing: IndicatorTiming,
    pub warnings: Vec<String>,
    pub residences_without_elevation: usize,
}

struct Ctx<'a> {
    configs: &'a [PipelineConfig],
    out: PathBuf,
    seed: u64,
    sweep: bool,
}

/// Inputs and outputs collected while a stage runs.
#[derive(Default)]
struct Io {
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn city_dir(&self, city: &str) -> PathBuf {
        self.out.join("cities").join(city)
    }

    fn rel(&self, p: &Path) -> String {
        p.strip_prefix(&self.out).unwrap_or(p).to_string_lossy().replace('\\', "/")
    }

    fn require(&self, stage: Stage, io: &mut Io, path: PathBuf) -> Result<PathBuf, PipelineError> {
        if !path.exists() {
            return Err(PipelineError::MissingArtifact { stage, path });
        }
        io.inputs.push(path.clone());
        Ok(path)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(stage: Stage, path: &Path) -> Result<T, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| stage_err(stage)(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| stage_err(stage)(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(stage: Stage, io: &mut Io, path: PathBuf, value: &T) -> Result<(), PipelineError> {
    let text = serde_json::to_string(value).map_err(|e| stage_err(stage)(e.to_string()))?;
    write_file(stage, io, path, text.as_bytes())
}

fn write_file(stage: Stage, io: &mut Io, path: PathBuf, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| stage_err(stage)(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(&path, bytes).map_err(|e| stage_err(stage)(format!("{}: {e}", path.display())))?;
    io.outputs.push(path);
    Ok(())
}

/// Registers a file written by a library call.
fn wrote<E: std::fmt::Display>(stage: Stage, io: &mut Io, path: PathBuf, r: Result<(), E>) -> Result<(), PipelineError> {
    r.map_err(|e| stage_err(stage)(format!("{}: {e}", path.display())))?;
    io.outputs.push(path);
    Ok(())
}

fn load_raster(cfg: &PipelineConfig) -> Result<Option<ElevationRaster>, PipelineError> {
    match &cfg.elevation_path {
        Some(p) => ElevationRaster::load(p)
            .map(Some)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", p.display()))),
        None => Ok(None),
    }
}

/// Runs the requested stages over one or more city configs. The first
/// config supplies the shared settings (output directory, seed, UMAP,
/// HDBSCAN and LLM parameters).
pub fn run(configs: &[PipelineConfig], opts: &RunOptions) -> Result<RunManifest, PipelineError> {
    let first = configs.first().ok_or_else(|| PipelineError::Config("no config given".into()))?;
    let mut cities: Vec<String> = configs.iter().map(|c| c.city.clone()).collect();
    cities.sort();
    if cities.windows(2).any(|w| w[0] == w[1]) {
        return Err(PipelineError::Config(format!("duplicate city label among {cities:?}")));
    }
    for c in configs {
        c.validate().map_err(PipelineError::Config)?;
    }
    let ctx = Ctx {
        configs,
        out: opts.out.clone().unwrap_or_else(|| first.output_dir.clone()),
        seed: opts.seed.unwrap_or(first.rng_seed),
        sweep: opts.sweep_temperatures,
    };
    std::fs::create_dir_all(&ctx.out)
        .map_err(|e| PipelineError::Config(format!("cannot create {}: {e}", ctx.out.display())))?;
    let stages = if opts.stages.is_empty() { Stage::ALL.to_vec() } else { opts.stages.clone() };

    let manifest_path = ctx.out.join(MANIFEST_FILE);
    let mut manifest = RunManifest { seed: ctx.seed, cities: configs.iter().map(|c| c.city.clone()).collect(), records: Vec::new() };
    // Records from earlier partial runs survive unless their stage re-runs.
    if let Some(old) = RunManifest::load(&manifest_path) {
        if old.cities == manifest.cities {
            manifest.records = old.records.into_iter().filter(|r| !stages.contains(&r.stage)).collect();
        }
    }

    for &stage in &stages {
        let per_city = matches!(stage, Stage::Ingest | Stage::Graph | Stage::Score);
        let targets: Vec<Option<&PipelineConfig>> =
            if per_city { configs.iter().map(Some).collect() } else { vec![None] };
        for cfg in targets {
            let t0 = Instant::now();
            let mut io = Io::default();
            log::info!("stage {stage}{}", cfg.map(|c| format!(" [{}]", c.city)).unwrap_or_default());
            match (stage, cfg) {
                (Stage::Ingest, Some(c)) => stage_ingest(&ctx, c, &mut io)?,
                (Stage::Graph, Some(c)) => stage_graph(&ctx, c, &mut io)?,
                (Stage::Score, Some(c)) => stage_score(&ctx, c, &mut io)?,
                (Stage::Features, _) => stage_features(&ctx, &mut io)?,
                (Stage::Cluster, _) => stage_cluster(&ctx, &mut io)?,
                (Stage::Interpret, _) => stage_interpret(&ctx, &mut io)?,
                (Stage::Report, _) => stage_report(&ctx, &mut io)?,
                _ => unreachable!("per-city stages always carry a config"),
            }
            let rec = StageRecord {
                stage,
                city: cfg.map(|c| c.city.clone()),
                inputs: io.inputs.iter().map(|p| ctx.rel(p)).collect(),
                outputs: io.outputs.iter().map(|p| ctx.rel(p)).collect(),
                wall_time_s: t0.elapsed().as_secs_f64(),
            };
            manifest.records.retain(|r| !(r.stage == rec.stage && r.city == rec.city));
            manifest.records.push(rec);
        }
    }
    manifest.records.sort_by(|a, b| a.stage.cmp(&b.stage).then_with(|| a.city.cmp(&b.city)));
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&manifest_path, text)
        .map_err(|e| PipelineError::Stage { stage: *stages.last().unwrap(), message: format!("{}: {e}", manifest_path.display()) })?;
    Ok(manifest)
}

fn stage_ingest(ctx: &Ctx, cfg: &PipelineConfig, io: &mut Io) -> Result<(), PipelineError> {
    let data = ingest(cfg).map_err(|e| match e {
        IngestError::Fetch { query, source: source @ (FetchError::Network { .. } | FetchError::Http { .. }) } => {
            PipelineError::Network(format!("{query}: {source}"))
        }
        IngestError::Raster(e) => PipelineError::Config(format!("elevation raster: {e}")),
        other => stage_err(Stage::Ingest)(other.to_string()),
    })?;
    io.inputs.push(cfg.cache_dir.clone());
    io.inputs.extend(cfg.elevation_path.clone());
    write_json(Stage::Ingest, io, ctx.city_dir(&cfg.city).join("ingest.json"), &data)
}

fn stage_graph(ctx: &Ctx, cfg: &PipelineConfig, io: &mut Io) -> Result<(), PipelineError> {
    let path = ctx.require(Stage::Graph, io, ctx.city_dir(&cfg.city).join("ingest.json"))?;
    let data: IngestData = read_json(Stage::Graph, &path)?;
    let raster = load_raster(cfg)?;
    io.inputs.extend(cfg.elevation_path.clone());
    let h = HeteroGraph::build(&data, &cfg.projection, raster.as_ref(), &cfg.indicator_params.snap);
    let p = &cfg.indicator_params;
    let n = h.graph.node_count();
    let sample = if n < p.betweenness_exact_below { n } else { p.betweenness_sources };
    let bc = betweenness(&h.graph, sample, ctx.seed);
    log::info!(
        "{}: {} street nodes, {} bridges ({} snapped)",
        cfg.city,
        h.n_street,
        h.bridges.len(),
        h.snapped_count()
    );
    write_json(Stage::Graph, io, ctx.city_dir(&cfg.city).join("graph.json"), &GraphArtifact { hetero: h, betweenness: bc })
}

fn stage_score(ctx: &Ctx, cfg: &PipelineConfig, io: &mut Io) -> Result<(), PipelineError> {
    let dir = ctx.city_dir(&cfg.city);
    let path = ctx.require(Stage::Score, io, dir.join("graph.json"))?;
    let mut g: GraphArtifact = read_json(Stage::Score, &path)?;
    g.hetero.ensure_index();
    let report = score_all(&g.hetero, &cfg.indicator_params, &cfg.weights, ctx.seed);
    for w in &report.warnings {
        log::warn!("{}: {w}", cfg.city);
    }
    let rows = export::scored_rows(&g.hetero, &report.cards);
    let csv = dir.join("bridges_scored.csv");
    wrote(Stage::Score, io, csv.clone(), export::write_scored_csv(&rows, &csv))?;
    let gj = dir.join("bridges.geojson");
    wrote(Stage::Score, io, gj.clone(), export::write_geojson(&rows, &gj))?;
    let art = ScoresArtifact {
        cards: report.cards,
        timing: report.timing,
        warnings: report.warnings,
        residences_without_elevation: report.residences_without_elevation,
    };
    write_json(Stage::Score, io, dir.join("scores.json"), &art)
}

fn stage_features(ctx: &Ctx, io: &mut Io) -> Result<(), PipelineError> {
    let st = Stage::Features;
    let registry = ctx.configs[0].features.registry();
    let mut parts = Vec::new();
    for cfg in ctx.configs {
        let dir = ctx.city_dir(&cfg.city);
        let gp = ctx.require(st, io, dir.join("graph.json"))?;
        let sp = ctx.require(st, io, dir.join("scores.json"))?;
        let g: GraphArtifact = read_json(st, &gp)?;
        let s: ScoresArtifact = read_json(st, &sp)?;
        let raster = load_raster(cfg)?;
        if cfg.features.registry().names() != registry.names() {
            return Err(PipelineError::Config(format!("{}: feature registry differs from {}", cfg.city, ctx.configs[0].city)));
        }
        let inputs = FeatureInputs { graph: &g.hetero, cards: &s.cards, betweenness: &g.betweenness, raster: raster.as_ref() };
        parts.push(assemble_features(&inputs, &registry).map_err(|e| stage_err(st)(format!("{}: {e}", cfg.city)))?);
    }
    let m = FeatureMatrix::concat(parts).map_err(|e| stage_err(st)(e.to_string()))?;
    let m = drop_zero_variance(m).map_err(|e| stage_err(st)(e.to_string()))?;
    let dropped: Vec<&str> = m.names.iter().zip(&m.retained).filter(|(_, r)| !**r).map(|(n, _)| n.as_str()).collect();
    if !dropped.is_empty() {
        log::info!("dropped zero-variance features: {}", dropped.join(", "));
    }
    let fp = ctx.out.join(FEATURES_FILE);
    wrote(st, io, fp.clone(), m.write_csv(&fp))?;
    let sp = ctx.out.join("feature_stats.csv");
    wrote(st, io, sp.clone(), m.write_stats_csv(&sp))?;
    let z = zscore_normalize(&m);
    let flags = flag_outliers(&z);
    log::info!("{} of {} bridges flagged as outliers", flags.iter().filter(|f| **f).count(), flags.len());
    let op = ctx.out.join("outliers.csv");
    wrote(st, io, op.clone(), export::write_outliers_csv(&z, &flags, &op))
}

fn cluster_err(e: ClusterError) -> PipelineError {
    stage_err(Stage::Cluster)(e.to_string())
}

fn stage_cluster(ctx: &Ctx, io: &mut Io) -> Result<(), PipelineError> {
    let st = Stage::Cluster;
    let fp = ctx.require(st, io, ctx.out.join(FEATURES_FILE))?;
    let m = FeatureMatrix::read_csv(&fp).map_err(|e: FeatureError| stage_err(st)(e.to_string()))?;
    let cfg = &ctx.configs[0];
    let z = zscore_normalize(&m);
    let emb = umap(&z.values, &cfg.umap, ctx.seed).map_err(cluster_err)?;
    log::info!("umap loss {:.4} -> {:.4}", emb.loss_first_epoch, emb.loss_final);
    let pts: Vec<Vec<f64>> = emb.coords.iter().map(|c| c.to_vec()).collect();
    let assign = hdbscan(&pts, &cfg.hdbscan);
    log::info!("{} clusters, {} noise", assign.n_clusters(), assign.noise_count());
    let ep = ctx.out.join(EMBEDDING_FILE);
    wrote(st, io, ep.clone(), export::write_embedding_csv(&m.bridge_ids, &emb.coords, &assign, &ep))?;
    let table = profile_clusters(&assign, &m);
    let cp = ctx.out.join(CLUSTER_STATS_FILE);
    wrote(st, io, cp.clone(), table.write_csv(&cp))
}

fn temp_label(t: f64) -> String {
    format!("t{t}")
}

fn stage_interpret(ctx: &Ctx, io: &mut Io) -> Result<(), PipelineError> {
    let st = Stage::Interpret;
    let cp = ctx.require(st, io, ctx.out.join(CLUSTER_STATS_FILE))?;
    let table = export::read_cluster_statistics(&cp).map_err(|e: ExportError| stage_err(st)(e.to_string()))?;
    let llm = &ctx.configs[0].llm;
    let prompts: Vec<(i64, String)> = table
        .clusters
        .iter()
        .filter_map(|c| InterpretationRequest::from_profile(&table, c))
        .map(|r| (r.cluster_id, render_prompt(&r)))
        .collect();
    let temps: Vec<f64> = if ctx.sweep { TEMPERATURE_SWEEP.to_vec() } else { vec![llm.temperature] };
    let backend = backend_for(llm);
    let mut metrics = Vec::new();
    for &t in &temps {
        let reports = generate_reports(backend.as_ref(), llm, &prompts, t);
        let dir = if t == llm.temperature { ctx.out.join("reports") } else { ctx.out.join("reports").join(temp_label(t)) };
        for r in &reports {
            write_file(st, io, dir.join(format!("cluster_{}.md", r.cluster_id)), r.to_markdown().as_bytes())?;
        }
        let q = quality_metrics(&reports, t).unwrap_or_else(|e| {
            log::warn!("temperature {t}: {e}");
            QualityMetrics {
                temperature: t,
                completeness_rate: 0.0,
                length_variance_ratio: f64::NAN,
                mean_length: f64::NAN,
                valid: 0,
                attempted: reports.len(),
            }
        });
        log::info!("temperature {t}: {}/{} valid reports", q.valid, q.attempted);
        metrics.push(q);
    }
    let qp = ctx.out.join("quality_metrics.csv");
    wrote(st, io, qp.clone(), write_quality_csv(&metrics, &qp))
}

fn stage_report(ctx: &Ctx, io: &mut Io) -> Result<(), PipelineError> {
    let st = Stage::Report;
    let plots = ctx.out.join("plots");
    for cfg in ctx.configs {
        let dir = ctx.city_dir(&cfg.city);
        let gp = ctx.require(st, io, dir.join("graph.json"))?;
        let sp = ctx.require(st, io, dir.join("bridges_scored.csv"))?;
        let g: GraphArtifact = read_json(st, &gp)?;
        let rows = export::read_scored_csv(&sp).map_err(|e| stage_err(st)(e.to_string()))?;
        let h = &g.hetero;
        let streets: Vec<_> = h
            .graph
            .edges
            .iter()
            .filter(|e| e.u < h.n_street && e.v < h.n_street)
            .map(|e| (h.graph.coords[e.u], h.graph.coords[e.v]))
            .collect();
        let names = ["transit_desert", "hospital_access", "isolation_risk", "supply_chain", "green_space", "composite"];
        for (k, name) in names.iter().enumerate() {
            let pts: Vec<_> = h.bridges.iter().zip(&rows).map(|(b, r)| (b.pos, r.scores[k])).collect();
            let svg = svg::score_map(&format!("{} {name}", cfg.city), &streets, &pts);
            write_file(st, io, plots.join(format!("score_map_{}_{name}.svg", cfg.city)), svg.as_bytes())?;
        }
    }

    let ep = ctx.require(st, io, ctx.out.join(EMBEDDING_FILE))?;
    let fp = ctx.require(st, io, ctx.out.join(FEATURES_FILE))?;
    let cp = ctx.require(st, io, ctx.out.join(CLUSTER_STATS_FILE))?;
    let emb = export::read_embedding_csv(&ep).map_err(|e| stage_err(st)(e.to_string()))?;
    let m = FeatureMatrix::read_csv(&fp).map_err(|e| stage_err(st)(e.to_string()))?;
    let table = export::read_cluster_statistics(&cp).map_err(|e| stage_err(st)(e.to_string()))?;
    if emb.len() != m.n_rows() {
        return Err(stage_err(st)(format!("{} has {} rows but {} has {}", EMBEDDING_FILE, emb.len(), FEATURES_FILE, m.n_rows())));
    }
    let coords: Vec<[f64; 2]> = emb.iter().map(|r| [r.x, r.y]).collect();
    let assign = export::assignment_from_rows(&emb);

    let labels: Vec<String> = (0..assign.n_clusters()).map(|c| format!("cluster {c}")).collect();
    let by_cluster = svg::umap_scatter("UMAP by cluster", &coords, &assign.labels, &labels, true);
    write_file(st, io, plots.join("umap_clusters.svg"), by_cluster.as_bytes())?;
    let mut cities = m.cities.clone();
    cities.sort();
    cities.dedup();
    let city_class: Vec<i64> = m.cities.iter().map(|c| cities.iter().position(|x| x == c).unwrap() as i64).collect();
    let by_city = svg::umap_scatter("UMAP by city", &coords, &city_class, &cities, false);
    write_file(st, io, plots.join("umap_cities.svg"), by_city.as_bytes())?;
    let bars = svg::cluster_bars("Cluster sizes", &assign.sizes(), assign.noise_count());
    write_file(st, io, plots.join("cluster_sizes.svg"), bars.as_bytes())?;

    // Radar over the five indicator axes for up to four of the largest clusters.
    let axes: Vec<String> = SOCIAL_NAMES.iter().map(|s| s.to_string()).collect();
    let cols: Vec<Option<usize>> = axes.iter().map(|a| table.feature_names.iter().position(|n| n == a)).collect();
    let mut order: Vec<&crate::cluster::ClusterProfile> = table.clusters.iter().collect();
    order.sort_by(|a, b| b.size.cmp(&a.size).then(a.cluster_id.cmp(&b.cluster_id)));
    let series: Vec<(String, Vec<f64>, &str)> = order
        .iter()
        .take(4)
        .map(|c| {
            let vals = cols.iter().map(|j| j.map_or(0.0, |j| c.features[j].z)).collect();
            (format!("cluster {} (n={})", c.cluster_id, c.size), vals, svg::cluster_color(c.cluster_id))
        })
        .collect();
    let radar = svg::radar("Indicator z-scores", &axes, &series);
    write_file(st, io, plots.join("radar.svg"), radar.as_bytes())
}
