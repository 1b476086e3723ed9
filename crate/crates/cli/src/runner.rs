//! Evolution orchestration: single runs, parameter sweeps and limit overlays.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use obstacle_core::diagnostics::{l1_distance, osl_reference, velocity_field, DiagnosticsRecord};
use obstacle_core::godunov::evolve;
use obstacle_core::limit::{
    detect_coincidence, limit_velocity_profile, track_snapshot_fronts, FrontOptions, FrontState, SLOPE_STENCIL,
};
use obstacle_core::model::{validate_scenario, CellField, Obstacle};
use obstacle_core::velocity::VelocityModel;
use obstacle_core::viscous::{evolve_viscous, ViscousConfig};
use obstacle_core::{Evolution, EvolveFailure};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, ViscousSection};
use crate::output::*;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SWEEP_MANIFEST_FILE: &str = "sweep.json";
pub const OVERLAY_INDEX_FILE: &str = "overlay.json";
pub const DISTANCES_FILE: &str = "distances.csv";

const TIME_TOL: f64 = 1e-12;

/// A finished run: its output directory, manifest and in-memory evolution.
#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub evolution: Evolution<f64>,
    pub fronts: Option<FrontState<f64>>,
}

impl RunOutcome {
    pub fn field_at(&self, t: f64) -> Result<&CellField<f64>> {
        self.evolution
            .snapshot_at(t)
            .map(|s| &s.field)
            .ok_or_else(|| anyhow!("{}: no snapshot at t={t}", self.dir.display()))
    }
}

fn merge_times(mut times: Vec<f64>) -> Vec<f64> {
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= TIME_TOL);
    times
}

/// Snapshot times of the evolution: the requested ones plus the tracker's
/// sampling grid.
fn evolution_times(cfg: &RunConfig) -> Vec<f64> {
    let s = &cfg.scenario;
    let requested = merge_times(s.snapshot_times.clone());
    let mut times = requested.clone();
    let h = cfg.fronts.sample_interval;
    if cfg.fronts.enabled && h > 0.0 {
        let n = (s.t_end / h + TIME_TOL).floor() as usize;
        times.extend(
            (0..=n)
                .map(|k| k as f64 * h)
                .filter(|&t| t <= s.t_end && requested.iter().all(|r| (r - t).abs() > TIME_TOL)),
        );
    }
    merge_times(times)
}

fn front_options(cfg: &RunConfig) -> FrontOptions<f64> {
    let f = &cfg.fronts;
    FrontOptions {
        threshold: f.threshold,
        trace_offset: f.trace_offset,
        interval: f.interval,
        refine_right: f.refine_right,
        ..Default::default()
    }
}

fn solver_error(f: EvolveFailure<f64>) -> anyhow::Error {
    anyhow!("solver failed at t={}: {}", f.time, f.error)
}

/// Evolves `cfg` without writing anything.
pub fn evolve_config(cfg: &RunConfig, force: bool) -> Result<Evolution<f64>> {
    let mut scenario = cfg.scenario()?;
    let violations = validate_scenario(&scenario);
    if !violations.is_empty() && !force {
        let list: Vec<String> = violations
            .iter()
            .map(|v| format!("{:?} ({:?}) on [{}, {}], worst {}", v.kind, v.severity, v.location.0, v.location.1, v.worst))
            .collect();
        bail!("scenario violates the standing assumptions (pass --force to acknowledge):\n  {}", list.join("\n  "));
    }
    scenario.snapshot_times = evolution_times(cfg);
    match &cfg.viscous {
        None => evolve(&scenario, true).map_err(solver_error),
        Some(ViscousSection { nu, mollifier_width }) => {
            let vc = match mollifier_width {
                Some(w) => ViscousConfig::with_mollifier_width(*nu, *w, scenario),
                None => ViscousConfig::new(*nu, scenario),
            }
            .context("viscous")?;
            evolve_viscous(&vc, true).map_err(solver_error)
        }
    }
}

fn snapshot_rows(state: &CellField<f64>, obstacle: &Obstacle<f64>, model: &VelocityModel<f64>) -> Vec<Vec<Option<f64>>> {
    let grid = state.grid();
    let v = velocity_field(state, obstacle, model);
    grid.centers()
        .zip(state.interior())
        .zip(v)
        .map(|((x, &q), v)| vec![Some(x), Some(q), Some(obstacle.eval(x)), Some(v)])
        .collect()
}

/// Evolves `cfg` and writes snapshots, diagnostics, fronts and the manifest
/// into `dir`.
pub fn run(cfg: &RunConfig, dir: &Path, force: bool) -> Result<RunOutcome> {
    let f = &cfg.fronts;
    ensure!(f.threshold > 0.0 && f.threshold < 1.0, "fronts.threshold must lie in (0, 1), got {}", f.threshold);
    ensure!(f.sample_interval >= 0.0, "fronts.sample_interval must be nonnegative");
    let obstacle = cfg.obstacle()?;
    let model = cfg.velocity()?;
    let evolution = evolve_config(cfg, force)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let snapshots = merge_times(cfg.scenario.snapshot_times.clone())
        .par_iter()
        .map(|&t| {
            let snap = evolution.snapshot_at(t).ok_or_else(|| anyhow!("missing snapshot at t={t}"))?;
            let entry = write_csv(dir, &snapshot_file_name(t), &SNAPSHOT_HEADER, snapshot_rows(&snap.field, &obstacle, &model))?;
            Ok(SnapshotEntry { time: t, entry })
        })
        .collect::<Result<Vec<_>>>()?;

    let diag_rows = evolution.snapshots.iter().map(|s| {
        let d = DiagnosticsRecord::measure(&s.field, &obstacle, &model);
        [
            d.time,
            d.mass,
            d.tv_q_minus_o,
            d.min_q,
            d.max_q_minus_o,
            d.osl_min_slope_q_minus_o,
            d.osl_max_slope_velocity,
            d.violation_l2,
        ]
        .map(Some)
        .to_vec()
    });
    let diagnostics = write_csv(dir, "diagnostics.csv", &DIAGNOSTICS_HEADER, diag_rows)?;

    let (mut fronts_entry, mut front_summary, mut front_note, mut fronts) = (None, None, None, None);
    if f.enabled {
        match track_snapshot_fronts(&evolution.snapshots, &obstacle, &model, front_options(cfg)) {
            Ok(state) => {
                let rows = state.samples.iter().map(|s| {
                    vec![
                        Some(s.time),
                        Some(s.gamma_l),
                        Some(s.gamma_r),
                        s.q_l,
                        s.q_r,
                        s.qx_r,
                        s.speed_l_measured,
                        s.speed_l_predicted,
                        s.speed_r_measured,
                        s.speed_r_predicted,
                    ]
                });
                fronts_entry = Some(write_csv(dir, "fronts.csv", &FRONT_HEADER, rows)?);
                front_summary = Some(FrontSummary {
                    truncated: state.truncated,
                    merge_events: state.merge_events.clone(),
                    trace_offset: state.options.trace_offset,
                    slope_stencil: SLOPE_STENCIL,
                    threshold: state.options.threshold,
                });
                fronts = Some(state);
            }
            Err(e) => {
                let stale = dir.join("fronts.csv");
                if stale.exists() {
                    fs::remove_file(&stale)?;
                }
                front_note = Some(e.to_string());
            }
        }
    }

    let osl = osl_reference(&model, &obstacle, &cfg.initial()?, &cfg.grid()?, cfg.scenario.t_end)
        .map(|r| OslReferenceEntry { k0: r.k0, c0: r.c0, v: r.v, c1: r.c1, c2: r.c2 });
    let manifest = RunManifest {
        scenario: cfg.clone(),
        code_version: CODE_VERSION.into(),
        steps: evolution.steps,
        wall_time_seconds: evolution.wall_time.as_secs_f64(),
        boundary_net_inflow: evolution.boundary_net_inflow,
        snapshots,
        diagnostics,
        fronts: fronts_entry,
        front_summary,
        front_note,
        osl_reference: osl,
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(RunOutcome { dir: dir.to_path_buf(), manifest, evolution, fronts })
}

/// One member of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMember {
    pub epsilon: f64,
    /// `None` for inviscid members.
    pub nu: Option<f64>,
    pub dir: String,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    /// `"epsilon"` or `"nu"`.
    pub parameter: String,
    pub code_version: String,
    pub members: Vec<SweepMember>,
    pub distance_times: Vec<f64>,
    pub distances: FileEntry,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub manifest: SweepManifest,
    pub runs: Vec<RunOutcome>,
}

/// Copy of `cfg` that also stores snapshots at `times`.
fn with_times(cfg: &RunConfig, times: &[f64]) -> Result<RunConfig> {
    let mut c = cfg.clone();
    for &t in times {
        ensure!(
            (0.0..=c.scenario.t_end).contains(&t),
            "distance time {t} outside [0, t_end={}]",
            c.scenario.t_end
        );
    }
    c.scenario.snapshot_times = merge_times([c.scenario.snapshot_times.clone(), times.to_vec()].concat());
    Ok(c)
}

fn run_members(members: &[(RunConfig, PathBuf)], force: bool) -> Result<Vec<RunOutcome>> {
    members.par_iter().map(|(c, d)| run(c, d, force)).collect()
}

fn member_record(out: &RunOutcome, root: &Path, nu: Option<f64>) -> SweepMember {
    SweepMember {
        epsilon: out.manifest.scenario.scenario.epsilon,
        nu,
        dir: out.dir.strip_prefix(root).unwrap_or(&out.dir).display().to_string(),
        steps: out.manifest.steps,
    }
}

/// Runs `cfg` once per regularization scale and tabulates pairwise L1
/// distances at `times`.
pub fn sweep_epsilon(cfg: &RunConfig, epsilons: &[f64], times: &[f64], dir: &Path, force: bool) -> Result<SweepOutcome> {
    ensure!(epsilons.len() >= 2, "an epsilon sweep needs at least 2 values, got {}", epsilons.len());
    let mut sorted = epsilons.to_vec();
    sorted.sort_by(f64::total_cmp);
    ensure!(sorted.windows(2).all(|w| w[0] < w[1]), "epsilon values must be distinct");
    let base = with_times(cfg, times)?;
    let members = epsilons
        .iter()
        .map(|&e| {
            let mut c = base.clone();
            c.scenario.epsilon = e;
            (c, dir.join(format!("eps_{e}")))
        })
        .collect::<Vec<_>>();
    let runs = run_members(&members, force)?;

    let mut rows = Vec::new();
    for &t in times {
        for (i, a) in runs.iter().enumerate() {
            for b in &runs[i + 1..] {
                let d = l1_distance(a.field_at(t)?, b.field_at(t)?)?;
                rows.push(vec![
                    Some(t),
                    Some(a.manifest.scenario.scenario.epsilon),
                    Some(b.manifest.scenario.scenario.epsilon),
                    Some(d),
                ]);
            }
        }
    }
    let distances = write_csv(dir, DISTANCES_FILE, &["t", "eps_a", "eps_b", "l1"], rows)?;
    let manifest = SweepManifest {
        parameter: "epsilon".into(),
        code_version: CODE_VERSION.into(),
        members: runs.iter().map(|r| member_record(r, dir, None)).collect(),
        distance_times: times.to_vec(),
        distances,
    };
    write_json(&dir.join(SWEEP_MANIFEST_FILE), &manifest)?;
    Ok(SweepOutcome { manifest, runs })
}

/// Runs the inviscid baseline and one viscous run per `nu`, tabulating the
/// L1 distance of each to the baseline at `times`. `nu = 0` denotes the
/// baseline itself.
pub fn sweep_nu(cfg: &RunConfig, nus: &[f64], times: &[f64], dir: &Path, force: bool) -> Result<SweepOutcome> {
    ensure!(!nus.is_empty(), "a viscosity sweep needs at least one value");
    ensure!(nus.iter().all(|&n| n >= 0.0 && n.is_finite()), "viscosities must be finite and nonnegative");
    let base = with_times(cfg, times)?;
    let width = cfg.viscous.as_ref().and_then(|v| v.mollifier_width);
    let mut inviscid = base.clone();
    inviscid.viscous = None;
    let mut members = vec![(inviscid, dir.join("inviscid"))];
    let mut viscous_nus = Vec::new();
    for &nu in nus.iter().filter(|&&n| n > 0.0) {
        let mut c = base.clone();
        c.viscous = Some(ViscousSection { nu, mollifier_width: width });
        members.push((c, dir.join(format!("nu_{nu}"))));
        viscous_nus.push(nu);
    }
    let runs = run_members(&members, force)?;
    let baseline = &runs[0];

    let mut rows = Vec::new();
    for &t in times {
        let b = baseline.field_at(t)?;
        for &nu in nus {
            let d = if nu == 0.0 {
                0.0
            } else {
                let k = viscous_nus.iter().position(|&n| n == nu).unwrap() + 1;
                l1_distance(runs[k].field_at(t)?, b)?
            };
            rows.push(vec![Some(t), Some(nu), Some(d)]);
        }
    }
    let distances = write_csv(dir, DISTANCES_FILE, &["t", "nu", "l1"], rows)?;
    let mut member_list = vec![member_record(baseline, dir, Some(0.0))];
    member_list.extend(runs[1..].iter().zip(&viscous_nus).map(|(r, &nu)| member_record(r, dir, Some(nu))));
    let manifest = SweepManifest {
        parameter: "nu".into(),
        code_version: CODE_VERSION.into(),
        members: member_list,
        distance_times: times.to_vec(),
        distances,
    };
    write_json(&dir.join(SWEEP_MANIFEST_FILE), &manifest)?;
    Ok(SweepOutcome { manifest, runs })
}

/// One overlay file with the detected region it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayEntry {
    pub time: f64,
    #[serde(flatten)]
    pub entry: FileEntry,
    /// No contact interval was detected; `v_star` is identically 1.
    pub empty_region: bool,
    /// Detected `[a, b]` per interval.
    pub intervals: Vec<[f64; 2]>,
    /// Right edge used for the limit profile, per interval.
    pub refined_right: Vec<f64>,
    pub outside_hypotheses: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayIndex {
    pub manifest: String,
    pub threshold: f64,
    pub entries: Vec<OverlayEntry>,
}

/// Writes `x,v_eps,v_star` for the snapshots of a finished run. An empty
/// `times` selects every snapshot.
pub fn overlay(manifest_path: &Path, threshold: f64, times: &[f64], out_dir: Option<&Path>) -> Result<OverlayIndex> {
    ensure!(threshold > 0.0 && threshold < 1.0, "threshold must lie in (0, 1), got {threshold}");
    let run_dir = manifest_path.parent().unwrap_or(Path::new("."));
    let out = out_dir.unwrap_or(run_dir);
    fs::create_dir_all(out)?;
    let manifest = RunManifest::load(manifest_path)?;
    let cfg = &manifest.scenario;
    let (obstacle, model, grid) = (cfg.obstacle()?, cfg.velocity()?, cfg.grid()?);

    let selected: Vec<&SnapshotEntry> = if times.is_empty() {
        manifest.snapshots.iter().collect()
    } else {
        times
            .iter()
            .map(|&t| {
                manifest
                    .snapshots
                    .iter()
                    .find(|s| (s.time - t).abs() <= TIME_TOL)
                    .ok_or_else(|| anyhow!("{}: no snapshot at t={t}", manifest_path.display()))
            })
            .collect::<Result<_>>()?
    };

    let entries = selected
        .par_iter()
        .map(|snap| {
            verify_entry(run_dir, &snap.entry)?;
            let cols = read_columns(&run_dir.join(&snap.entry.file), &SNAPSHOT_HEADER)?;
            let state = CellField::from_interior(grid, &cols[1], snap.time)
                .with_context(|| format!("{}: does not match the scenario grid", snap.entry.file))?;
            let detected = detect_coincidence(&state, &obstacle, &model, threshold)?;
            let refined = detected.refined(&state, &obstacle, &model);
            let profile = limit_velocity_profile(&obstacle, &refined, &grid)?;
            let v_eps = velocity_field(&state, &obstacle, &model);
            let rows = profile
                .x
                .iter()
                .zip(&v_eps)
                .zip(&profile.v)
                .map(|((&x, &ve), &vs)| vec![Some(x), Some(ve), Some(vs)]);
            let entry = write_csv(out, &overlay_file_name(snap.time), &OVERLAY_HEADER, rows)?;
            Ok(OverlayEntry {
                time: snap.time,
                entry,
                empty_region: detected.is_empty(),
                intervals: detected.intervals.iter().map(|iv| [iv.a, iv.b]).collect(),
                refined_right: refined.intervals.iter().map(|iv| iv.b).collect(),
                outside_hypotheses: profile.outside_hypotheses,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let index = OverlayIndex { manifest: manifest_path.display().to_string(), threshold, entries };
    write_json(&out.join(OVERLAY_INDEX_FILE), &index)?;
    Ok(index)
}
