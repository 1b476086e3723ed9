//! Experiment runner for the obstacle-constrained conservation law: TOML
//! scenario configuration, evolutions, parameter sweeps and CSV/JSON output.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{builtin_scenario, Preset, RunConfig};
pub use output::{FileEntry, RunManifest};
pub use runner::{overlay, run, sweep_epsilon, sweep_nu, RunOutcome, SweepOutcome};
