use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use obstacle_cli::config::{builtin_scenario, parse_list, Preset, RunConfig, BUILTIN_SCENARIOS};
use obstacle_cli::runner::{self, MANIFEST_FILE};

#[derive(Parser)]
#[command(name = "obstacle", version, about = "Obstacle-constrained conservation law experiments")]
struct Cli {
    /// Worker threads for sweeps and file output (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one scenario and write snapshots, diagnostics, fronts and a manifest.
    Run(Source),
    /// Run a scenario for several regularization scales and tabulate pairwise L1 distances.
    SweepEps {
        #[command(flatten)]
        source: Source,
        /// Comma-separated list; `2^-k` is accepted.
        #[arg(long)]
        eps: Option<String>,
        /// Times at which distances are evaluated.
        #[arg(long)]
        times: Option<String>,
    },
    /// Run viscous approximations and tabulate their L1 distance to the inviscid run.
    SweepNu {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        nu: Option<String>,
        #[arg(long)]
        times: Option<String>,
    },
    /// Compare the measured velocity with the limit profile on a finished run.
    Overlay {
        /// Run manifest, or the directory containing it.
        #[arg(long)]
        manifest: PathBuf,
        /// Coincidence threshold on the velocity.
        #[arg(long)]
        theta: Option<f64>,
        /// Snapshot times to process (default: all).
        #[arg(long)]
        times: Option<String>,
        /// Output directory (default: the run directory).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// List builtin scenarios.
    Scenarios,
}

#[derive(Args)]
struct Source {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Builtin scenario name (see `obstacle scenarios`).
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Resolution preset overriding dx and epsilon.
    #[arg(long)]
    preset: Option<Preset>,
    /// Run even if the scenario violates the standing assumptions.
    #[arg(long)]
    force: bool,
}

impl Source {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.scenario) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => builtin_scenario(name)?,
            (None, None) => bail!("pass --config PATH or --scenario NAME"),
        };
        if let Some(p) = self.preset {
            if p.is_long_running() {
                eprintln!("warning: the paper preset (dx={}, eps={}) takes hours", p.dx(), p.epsilon());
            }
            cfg.apply_preset(p);
        }
        Ok(cfg)
    }
}

fn list_or(arg: &Option<String>, default: &[f64]) -> Result<Vec<f64>> {
    match arg {
        Some(s) => parse_list(s),
        None => Ok(default.to_vec()),
    }
}

fn execute(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring threads")?;
    }
    match cli.command {
        Command::Run(src) => {
            let out = runner::run(&src.load()?, &src.out_dir, src.force)?;
            println!(
                "{}: {} steps in {:.2}s, {} snapshots",
                out.dir.join(MANIFEST_FILE).display(),
                out.manifest.steps,
                out.manifest.wall_time_seconds,
                out.manifest.snapshots.len()
            );
            if let Some(note) = &out.manifest.front_note {
                println!("no fronts: {note}");
            }
        }
        Command::SweepEps { source, eps, times } => {
            let cfg = source.load()?;
            let eps = list_or(&eps, &cfg.sweep.epsilons)?;
            let times = list_or(&times, &cfg.sweep.distance_times)?;
            let out = runner::sweep_epsilon(&cfg, &eps, &times, &source.out_dir, source.force)?;
            report_sweep(&source.out_dir, &out);
        }
        Command::SweepNu { source, nu, times } => {
            let cfg = source.load()?;
            let nus = list_or(&nu, &cfg.sweep.nus)?;
            let times = list_or(&times, &cfg.sweep.distance_times)?;
            let out = runner::sweep_nu(&cfg, &nus, &times, &source.out_dir, source.force)?;
            report_sweep(&source.out_dir, &out);
        }
        Command::Overlay { manifest, theta, times, out_dir } => {
            let path = if manifest.is_dir() { manifest.join(MANIFEST_FILE) } else { manifest };
            let theta = match theta {
                Some(t) => t,
                None => obstacle_cli::RunManifest::load(&path)?.scenario.overlay.threshold,
            };
            let times = list_or(&times, &[])?;
            let index = runner::overlay(&path, theta, &times, out_dir.as_deref())?;
            for e in &index.entries {
                let state = if e.empty_region { "no contact".to_string() } else { format!("{} interval(s)", e.intervals.len()) };
                println!("t={}: {} ({})", e.time, e.entry.file, state);
            }
        }
        Command::Scenarios => {
            for (name, about) in BUILTIN_SCENARIOS {
                println!("{name:<12} {about}");
            }
        }
    }
    Ok(())
}

fn report_sweep(dir: &Path, out: &runner::SweepOutcome) {
    for m in &out.manifest.members {
        println!("{}: eps={} nu={:?}, {} steps", m.dir, m.epsilon, m.nu, m.steps);
    }
    println!("{}", dir.join(runner::DISTANCES_FILE).display());
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
