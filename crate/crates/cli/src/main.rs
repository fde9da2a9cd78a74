use bridgegraph_core::pipeline::fixtures::{write_fixture, FixtureCity};
use bridgegraph_core::{load_config, run, PipelineError, RunOptions, Stage};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bridgegraph", version, about = "Bridge closure impact scoring and archetype discovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run pipeline stages for one or more city configs.
    Run {
        /// City config; repeat for a multi-city run.
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        /// Comma-separated subset of ingest,graph,score,features,cluster,interpret,report.
        #[arg(long, value_parser = parse_stages)]
        stages: Option<StageList>,
        /// Overrides rng_seed from the first config.
        #[arg(long)]
        seed: Option<u64>,
        /// Generate reports at every temperature of the sweep.
        #[arg(long)]
        sweep_temperatures: bool,
        /// Overrides output_dir from the first config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bundled fixture data.
    Fixtures {
        #[command(subcommand)]
        command: FixturesCommand,
    },
}

/// Comma-separated stages as one argument value.
#[derive(Clone)]
struct StageList(Vec<Stage>);

fn parse_stages(s: &str) -> Result<StageList, String> {
    Stage::parse_list(s).map(StageList)
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// Write a synthetic city (config, elevation grid and warm cache).
    Gen {
        /// synthetic-small or synthetic-second.
        #[arg(long, default_value = "synthetic-small")]
        city: FixtureCity,
        /// Target directory; defaults to ./<city>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run_command(
    configs: Vec<PathBuf>,
    stages: Option<StageList>,
    seed: Option<u64>,
    sweep_temperatures: bool,
    out: Option<PathBuf>,
) -> Result<(), PipelineError> {
    let cfgs = configs
        .iter()
        .map(|p| load_config(p).map_err(|e| PipelineError::Config(format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    let opts = RunOptions { stages: stages.map(|s| s.0).unwrap_or_default(), seed, sweep_temperatures, out };
    let manifest = run(&cfgs, &opts)?;
    for r in &manifest.records {
        let city = r.city.as_deref().map(|c| format!(" [{c}]")).unwrap_or_default();
        println!("{}{city}: {} outputs, {:.2}s", r.stage, r.outputs.len(), r.wall_time_s);
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { configs, stages, seed, sweep_temperatures, out } => {
            match run_command(configs, stages, seed, sweep_temperatures, out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::Fixtures { command: FixturesCommand::Gen { city, out } } => {
            let dir = out.unwrap_or_else(|| PathBuf::from(city.name()));
            match write_fixture(city, &dir) {
                Ok(path) => {
                    println!("{}", path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: cannot write fixture to {}: {e}", dir.display());
                    ExitCode::from(1)
                }
            }
        }
    }
}
