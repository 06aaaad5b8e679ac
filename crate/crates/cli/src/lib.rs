//! Command-line front end: reads a TOML experiment file, runs one pipeline
//! and writes CSV results plus a `manifest.toml` into the output directory.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod pipelines;
pub mod plot;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::artifacts::{ArtifactRecord, Artifacts};
use crate::config::{ExperimentConfig, RunKind};
use crate::error::CliError;
use crate::plot::PlotKind;

#[derive(Debug, Parser)]
#[command(
    name = "selfdiff",
    version,
    about = "Self-interacting diffusion experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spot-check the standing hypotheses and the symmetry integrals.
    Check(RunArgs),
    /// Simulate the self-interacting or frozen diffusion.
    Simulate(RunArgs),
    /// Integrate the measure-valued semiflow from a tilted Gibbs state.
    Flow(RunArgs),
    /// Regime, J-curve and reduced ODE of the planar rotation model.
    Analyze2d(RunArgs),
    /// Regime over a grid of rotation angles.
    PhaseDiagram(RunArgs),
    /// Render a CSV output as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Experiment file (TOML).
    #[arg(long, short)]
    pub config: PathBuf,
    /// Output directory; overrides `out` in the file (default `out`).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Overrides `seed` in the file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 lets rayon decide).
    #[arg(long, env = "SELFDIFF_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[arg(value_enum)]
    pub kind: PlotKind,
    /// Input CSV files; only overlay takes more than one.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output SVG file.
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long)]
    pub title: Option<String>,
}

/// What a finished run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub summary: String,
    pub files: Vec<ArtifactRecord>,
}

/// Loads, resolves and runs one experiment.
pub fn run_experiment(kind: RunKind, args: &RunArgs) -> Result<RunOutcome, CliError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    let cfg = cfg.resolve(kind)?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Threads(e.to_string()))?;
    let mut artifacts = Artifacts::create(&dir)?;
    let summary = pool.install(|| pipelines::run(kind, &cfg, &mut artifacts))?;
    let header = format!(
        "# selfdiff {} {}\n# {}",
        env!("CARGO_PKG_VERSION"),
        kind,
        summary.replace('\n', " ")
    );
    let files = artifacts.finish(&header, &cfg.to_toml())?;
    Ok(RunOutcome {
        dir,
        summary,
        files,
    })
}

/// Renders one plot.
pub fn run_plot(args: &PlotArgs) -> Result<(), CliError> {
    let svg = plot::render(args.kind, &args.inputs, args.title.as_deref())?;
    std::fs::write(&args.output, svg).map_err(|source| CliError::Io {
        path: args.output.clone(),
        source,
    })
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Check(a) => run_experiment(RunKind::Check, a).map(report),
        Command::Simulate(a) => run_experiment(RunKind::Simulate, a).map(report),
        Command::Flow(a) => run_experiment(RunKind::Flow, a).map(report),
        Command::Analyze2d(a) => run_experiment(RunKind::Analyze2d, a).map(report),
        Command::PhaseDiagram(a) => run_experiment(RunKind::PhaseDiagram, a).map(report),
        Command::Plot(a) => run_plot(a).map(|()| println!("wrote {}", a.output.display())),
    };
    match result {
        Ok(()) => error::EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn report(o: RunOutcome) {
    println!("{}", o.summary);
    println!(
        "wrote {} file(s) and {} to {}",
        o.files.len(),
        artifacts::MANIFEST_NAME,
        o.dir.display()
    );
}
