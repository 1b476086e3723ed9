use std::fs;
use std::path::Path;
use std::process::Command;

use obstacle_cli::config::{builtin_scenario, RunConfig, ViscousSection};
use obstacle_cli::output::{read_columns, verify_entry, DIAGNOSTICS_HEADER, FRONT_HEADER, OVERLAY_HEADER, SNAPSHOT_HEADER};
use obstacle_cli::runner::{overlay, run, sweep_epsilon, sweep_nu, MANIFEST_FILE};
use obstacle_cli::RunManifest;

fn small() -> RunConfig {
    let mut c = builtin_scenario("fig_q01o1").unwrap();
    let s = &mut c.scenario;
    s.x_min = -2.0;
    s.x_max = 1.5;
    s.dx = 1e-2;
    s.t_end = 0.5;
    s.snapshot_times = vec![0.0, 0.25, 0.5];
    c.fronts.sample_interval = 0.05;
    c
}

fn file_hashes(dir: &Path) -> Vec<(String, String)> {
    let m = RunManifest::load(&dir.join(MANIFEST_FILE)).unwrap();
    m.files().map(|f| (f.file.clone(), f.sha256.clone())).collect()
}

#[test]
fn manifest_lists_every_output_with_matching_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&small(), dir.path(), true).unwrap();
    let m = RunManifest::load(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(m, out.manifest);
    assert_eq!(m.snapshots.len(), 3);
    assert!(m.fronts.is_some(), "{:?}", m.front_note);
    for f in m.files() {
        verify_entry(dir.path(), f).unwrap();
    }
    let cols = read_columns(&dir.path().join("snap_t0.25.csv"), &SNAPSHOT_HEADER).unwrap();
    assert_eq!(cols[0].len(), 350);
    read_columns(&dir.path().join("diagnostics.csv"), &DIAGNOSTICS_HEADER).unwrap();
    read_columns(&dir.path().join("fronts.csv"), &FRONT_HEADER).unwrap();
    // diagnostics cover the tracker samples as well
    assert_eq!(m.diagnostics.rows, 11);
    let text = fs::read_to_string(dir.path().join("snap_t0.5.csv")).unwrap();
    assert!(!text.contains('\r') && text.ends_with('\n'));
}

#[test]
fn identical_configs_give_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(&small(), a.path(), true).unwrap();
    run(&small(), b.path(), true).unwrap();
    assert_eq!(file_hashes(a.path()), file_hashes(b.path()));
}

#[test]
fn zero_horizon_keeps_only_the_initial_state() {
    let mut c = small();
    c.scenario.t_end = 0.0;
    c.scenario.snapshot_times = vec![0.0];
    let dir = tempfile::tempdir().unwrap();
    let out = run(&c, dir.path(), true).unwrap();
    assert_eq!(out.manifest.steps, 0);
    assert_eq!(out.manifest.snapshots.len(), 1);
    assert_eq!(out.manifest.diagnostics.rows, 1);
    assert!(out.manifest.fronts.is_none() && out.manifest.front_note.is_some());
}

#[test]
fn assumption_violations_need_force() {
    let mut c = small();
    c.scenario.obstacle = "constant:0.5".into();
    let dir = tempfile::tempdir().unwrap();
    let err = format!("{:#}", run(&c, dir.path(), false).unwrap_err());
    assert!(err.contains("StrictSeparation") && err.contains("--force"), "{err}");
}

#[test]
fn epsilon_sweep_tabulates_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let c = small();
    assert!(sweep_epsilon(&c, &[1.0 / 64.0], &[0.5], dir.path(), true).is_err());
    let out = sweep_epsilon(&c, &[1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0], &[0.25, 0.5], dir.path(), true).unwrap();
    assert_eq!(out.manifest.distances.rows, 6);
    verify_entry(dir.path(), &out.manifest.distances).unwrap();
    let cols = read_columns(&dir.path().join("distances.csv"), &["t", "eps_a", "eps_b", "l1"]).unwrap();
    assert!(cols[3].iter().all(|&d| d > 0.0));
    for m in &out.manifest.members {
        assert!(dir.path().join(&m.dir).join(MANIFEST_FILE).exists());
    }
}

#[test]
fn every_velocity_kind_runs() {
    for kind in ["exponential", "tanh", "clipped_linear"] {
        let mut c = small();
        c.scenario.velocity = kind.into();
        c.scenario.t_end = 0.1;
        c.scenario.snapshot_times = vec![0.1];
        let dir = tempfile::tempdir().unwrap();
        run(&c, dir.path(), true).unwrap_or_else(|e| panic!("{kind}: {e:#}"));
    }
}

#[test]
fn viscosity_sweep_measures_against_the_inviscid_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small();
    c.fronts.enabled = false;
    let out = sweep_nu(&c, &[0.0, 4e-2, 2e-2], &[0.5], dir.path(), true).unwrap();
    let cols = read_columns(&dir.path().join("distances.csv"), &["t", "nu", "l1"]).unwrap();
    assert_eq!(cols[2][0], 0.0);
    assert!(cols[2][1] > cols[2][2] && cols[2][2] > 0.0, "{:?}", cols[2]);
    assert_eq!(out.runs.len(), 3);

    c.viscous = Some(ViscousSection { nu: 1e-2, mollifier_width: Some(1e-3) });
    let err = format!("{:#}", run(&c, dir.path(), true).unwrap_err());
    assert!(err.contains("floor"), "{err}");
}

#[test]
fn overlay_flags_runs_without_contact() {
    let dir = tempfile::tempdir().unwrap();
    run(&small(), dir.path(), true).unwrap();
    let index = overlay(&dir.path().join(MANIFEST_FILE), 0.95, &[], None).unwrap();
    assert_eq!(index.entries.len(), 3);
    let first = &index.entries[0];
    assert!(first.empty_region && first.intervals.is_empty());
    let cols = read_columns(&dir.path().join(&first.entry.file), &OVERLAY_HEADER).unwrap();
    assert!(cols[2].iter().all(|&v| v == 1.0));
    let last = &index.entries[2];
    assert!(!last.empty_region);
    assert!(last.refined_right[0] >= last.intervals[0][1]);
    assert!(overlay(&dir.path().join(MANIFEST_FILE), 0.95, &[0.3], None).is_err());
}

#[test]
fn config_errors_name_the_offending_key() {
    let text = small().to_toml().unwrap().replace("dx = ", "dxx = ");
    let err = format!("{:#}", RunConfig::from_toml(&text).unwrap_err());
    assert!(err.contains("dxx"), "{err}");
    let text = small().to_toml().unwrap().replace("t_end = 0.5", "t_end = \"soon\"");
    let err = format!("{:#}", RunConfig::from_toml(&text).unwrap_err());
    assert!(err.contains("line") && err.contains("t_end"), "{err}");
}

#[test]
fn binary_runs_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small();
    c.scenario.t_end = 0.25;
    c.scenario.snapshot_times = vec![0.0, 0.25];
    let table = dir.path().join("datum.csv");
    fs::write(&table, "x,value\n-3,0\n-1.2,0\n-1.1,0.8\n-0.9,0.8\n-0.8,0\n2,0\n").unwrap();
    c.scenario.initial = "table:datum.csv".into();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, c.to_toml().unwrap()).unwrap();

    let exe = env!("CARGO_BIN_EXE_obstacle");
    let out_dir = dir.path().join("out");
    let status = Command::new(exe)
        .args(["--threads", "2", "run", "--force", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(out_dir.join("snap_t0.25.csv").exists());

    let listed = Command::new(exe).arg("scenarios").output().unwrap();
    assert!(String::from_utf8_lossy(&listed.stdout).contains("fig_q01o1"));
    let bad = Command::new(exe).args(["run", "--scenario", "nope"]).output().unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("unknown scenario"));
}
