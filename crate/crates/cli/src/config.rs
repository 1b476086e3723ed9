//! Run configuration: TOML files, builtin scenarios and resolution presets.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use obstacle_core::model::{builtin_initial, builtin_obstacle, Grid, InitialDatum, Obstacle, Scenario, Table};
use obstacle_core::velocity::{VelocityKind, VelocityModel};
use serde::{Deserialize, Serialize};

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viscous: Option<ViscousSection>,
    #[serde(default)]
    pub fronts: FrontSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub overlay: OverlaySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "custom")]
    pub name: String,
    /// Builtin name, `constant:<value>` or `table:<csv path>`.
    pub obstacle: String,
    /// Builtin name or `table:<csv path>`.
    pub initial: String,
    #[serde(default = "exponential")]
    pub velocity: String,
    pub epsilon: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViscousSection {
    pub nu: f64,
    /// Defaults to `nu`, raised to two cells if the grid cannot resolve it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mollifier_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrontSection {
    pub enabled: bool,
    pub threshold: f64,
    pub trace_offset: usize,
    pub interval: usize,
    pub refine_right: bool,
    /// Spacing of the extra snapshots the tracker samples; they are not
    /// written as snapshot files.
    pub sample_interval: f64,
}

impl Default for FrontSection {
    fn default() -> Self {
        Self {
            enabled: true,
            threshold: obstacle_core::limit::DEFAULT_THRESHOLD,
            trace_offset: obstacle_core::limit::DEFAULT_TRACE_OFFSET,
            interval: 0,
            refine_right: true,
            sample_interval: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub epsilons: Vec<f64>,
    pub nus: Vec<f64>,
    pub distance_times: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            epsilons: [5, 6, 7, 8].iter().map(|&k| 2f64.powi(-k)).collect(),
            nus: vec![4e-3, 2e-3, 1e-3],
            distance_times: vec![0.9],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OverlaySection {
    pub threshold: f64,
    /// Empty means every snapshot.
    pub times: Vec<f64>,
}

impl Default for OverlaySection {
    fn default() -> Self {
        Self { threshold: obstacle_core::limit::DEFAULT_THRESHOLD, times: Vec::new() }
    }
}

fn custom() -> String {
    "custom".into()
}

fn exponential() -> String {
    VelocityKind::Exponential.as_str().into()
}

fn default_cfl() -> f64 {
    0.45
}

/// Grid spacing and regularization scale applied over a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Desk,
    Paper,
}

impl Preset {
    pub fn dx(self) -> f64 {
        match self {
            Self::Desk => 2e-3,
            Self::Paper => 1e-4,
        }
    }

    pub fn epsilon(self) -> f64 {
        match self {
            Self::Desk => 2f64.powi(-6),
            Self::Paper => 2f64.powi(-10),
        }
    }

    pub fn is_long_running(self) -> bool {
        self == Self::Paper
    }
}

impl FromStr for Preset {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Self::Desk),
            "paper" => Ok(Self::Paper),
            other => bail!("unknown preset '{other}', expected 'desk' or 'paper'"),
        }
    }
}

pub const FIGURE_TIMES: [f64; 8] = [0.0, 0.25, 0.5, 0.75, 1.0, 2.0, 3.0, 4.0];

/// `(name, description)` of every builtin scenario.
pub const BUILTIN_SCENARIOS: [(&str, &str); 4] = [
    ("fig_q01o1", "ramp datum q1 against the single stalactite o1"),
    ("fig_q01o2", "ramp datum q1 against the double stalactite o2"),
    ("fig_q02o2", "two bumps q2 against the double stalactite o2"),
    ("fig_q03o3", "indicator q3 against the nonsmooth obstacle o3 (outside the theory)"),
];

pub fn builtin_scenario(name: &str) -> Result<RunConfig> {
    let (obstacle, initial) = match name {
        "fig_q01o1" => ("o1", "q1"),
        "fig_q01o2" => ("o2", "q1"),
        "fig_q02o2" => ("o2", "q2"),
        "fig_q03o3" => ("o3", "q3"),
        other => {
            let names: Vec<_> = BUILTIN_SCENARIOS.iter().map(|(n, _)| *n).collect();
            bail!("unknown scenario '{other}', expected one of {names:?}")
        }
    };
    Ok(RunConfig {
        scenario: ScenarioConfig {
            name: name.into(),
            obstacle: obstacle.into(),
            initial: initial.into(),
            velocity: exponential(),
            epsilon: Preset::Desk.epsilon(),
            x_min: -4.0,
            x_max: 8.0,
            dx: Preset::Desk.dx(),
            t_end: 4.0,
            cfl: default_cfl(),
            snapshot_times: FIGURE_TIMES.to_vec(),
        },
        viscous: None,
        fronts: FrontSection::default(),
        sweep: SweepSection::default(),
        overlay: OverlaySection::default(),
    })
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// Makes `table:` paths relative to the config file absolute.
    fn resolve_paths(&mut self, base: &Path) {
        for spec in [&mut self.scenario.obstacle, &mut self.scenario.initial] {
            if let Some(p) = spec.strip_prefix("table:") {
                let p = PathBuf::from(p);
                if p.is_relative() {
                    *spec = format!("table:{}", base.join(p).display());
                }
            }
        }
    }

    pub fn apply_preset(&mut self, preset: Preset) {
        self.scenario.dx = preset.dx();
        self.scenario.epsilon = preset.epsilon();
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn velocity(&self) -> Result<VelocityModel<f64>> {
        let kind: VelocityKind = self.scenario.velocity.parse().context("scenario.velocity")?;
        VelocityModel::new(kind, self.scenario.epsilon).context("scenario.epsilon")
    }

    pub fn grid(&self) -> Result<Grid<f64>> {
        let s = &self.scenario;
        Grid::with_spacing(s.x_min, s.x_max, s.dx, 1).context("scenario grid (x_min, x_max, dx)")
    }

    pub fn obstacle(&self) -> Result<Obstacle<f64>> {
        let spec = &self.scenario.obstacle;
        if let Some(v) = spec.strip_prefix("constant:") {
            let c: f64 = v.trim().parse().with_context(|| format!("scenario.obstacle: bad constant '{v}'"))?;
            return Obstacle::constant(c).context("scenario.obstacle");
        }
        if let Some(p) = spec.strip_prefix("table:") {
            return Ok(Obstacle::tabulated(read_table(Path::new(p)).context("scenario.obstacle")?));
        }
        builtin_obstacle(spec).context("scenario.obstacle")
    }

    pub fn initial(&self) -> Result<InitialDatum<f64>> {
        let spec = &self.scenario.initial;
        if let Some(p) = spec.strip_prefix("table:") {
            return Ok(InitialDatum::tabulated(read_table(Path::new(p)).context("scenario.initial")?));
        }
        builtin_initial(spec).context("scenario.initial")
    }

    pub fn scenario(&self) -> Result<Scenario<f64>> {
        let s = &self.scenario;
        Scenario::new(
            self.obstacle()?,
            self.initial()?,
            self.velocity()?,
            self.grid()?,
            s.t_end,
            s.cfl,
            s.snapshot_times.clone(),
        )
        .context("scenario")
    }
}

/// Two-column `x,value` CSV with a header row.
pub fn read_table(path: &Path) -> Result<Table<f64>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.deserialize::<(f64, f64)>().enumerate() {
        let (x, y) = rec.with_context(|| format!("{}: row {}", path.display(), line + 2))?;
        xs.push(x);
        ys.push(y);
    }
    Ok(Table::new(xs, ys)?)
}

/// Accepts plain decimals and powers of two written `2^-k`.
pub fn parse_value(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some(exp) = s.strip_prefix("2^") {
        let k: i32 = exp.parse().with_context(|| format!("bad exponent in '{s}'"))?;
        return Ok(2f64.powi(k));
    }
    s.parse().with_context(|| format!("bad number '{s}'"))
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(parse_value).collect()
}
