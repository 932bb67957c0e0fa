use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wb_core::snapshot::save_snapshot;
use wb_core::{Field, Grid, WaveState};

const BASE: &str = r#"{
    "system": "wb1d",
    "grid": {"n": [64], "length": [6.283185307179586]},
    "params": {"kappa": 1.0},
    "initial_data": {"preset": "single_mode", "amplitude": 0.1, "mode": 1},
    "integrator": {"method": "exponential_rk4", "dt": 0.01},
    "horizon": 1.0,
    "report_every": 0.3
}"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn wb(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wb"))
        .args(args)
        .env("WB_OUTPUT_DIR", out)
        .env("WB_THREADS", "2")
        .output()
        .unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn run_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", BASE);
    let out = dir.path().join("out");
    let o = wb(&out, &["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("energy.csv")).unwrap();
    assert!(csv.starts_with("# wb "));
    assert!(csv.lines().next().unwrap().contains("config_hash="));
    let lines = data_lines(&csv);
    assert!(lines[0].starts_with("time,hamiltonian"));
    // ceil(1.0 / 0.3) + 1 report rows
    assert_eq!(lines.len() - 1, 5);
    let last: Vec<f64> = lines[5].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 1.0);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", &BASE.replace(
        r#"{"preset": "single_mode", "amplitude": 0.1, "mode": 1}"#,
        r#"{"preset": "random_bandlimited", "seed": 9, "band": 5, "amplitude": 0.05}"#,
    ));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(wb(&a, &["run", cfg.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(wb(&b, &["run", cfg.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(std::fs::read(a.join("energy.csv")).unwrap(), std::fs::read(b.join("energy.csv")).unwrap());
}

#[test]
fn bad_mu_exits_one_naming_mu() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", &BASE.replace(r#""kappa": 1.0"#, r#""kappa": 1.0, "mu": 1.5"#));
    let o = wb(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mu"));
}

#[test]
fn huge_amplitude_exits_two_with_blow_up_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "huge.json", &BASE.replace(r#""amplitude": 0.1"#, r#""amplitude": 1000.0"#));
    let o = wb(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run_summary.json")).unwrap()).unwrap();
    assert!(summary["blow_up"].as_f64().is_some());
    assert_eq!(summary["pass"], false);
}

#[test]
fn snapshots_are_written_and_reloadable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", &BASE.replace(r#""horizon""#, r#""snapshots": true, "horizon""#));
    let out = dir.path().join("out");
    assert_eq!(wb(&out, &["run", cfg.to_str().unwrap()]).status.code(), Some(0));
    let last = wb_core::snapshot::load_snapshot(out.join("snapshot_00004.wbsnap")).unwrap();
    assert_eq!(last.time, 1.0);
}

#[test]
fn conservation_study_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", BASE);
    let o = wb(dir.path(), &["study", "conservation", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("conservation.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["study"], "conservation");
    assert!(summary["config_hash"].as_str().unwrap().len() == 64);
}

#[test]
fn kappa_study_needs_three_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.json", &BASE.replace(r#""horizon""#, r#""study": {"values": [0.1, 0.01]}, "horizon""#));
    let o = wb(dir.path(), &["study", "kappa_limit", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains(">= 3"));
}

#[test]
fn kappa_study_writes_named_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "k.json",
        &BASE.replace(r#""horizon""#, r#""study": {"values": [0.1, 0.01, 0.001]}, "horizon""#),
    );
    let o = wb(dir.path(), &["study", "kappa_limit", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("kappa_limit_kappa.csv")).unwrap();
    assert_eq!(data_lines(&csv).len(), 4);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("kappa_limit_kappa.json")).unwrap()).unwrap();
    assert!(summary["fitted_order"].as_f64().unwrap() > 0.45);
    assert!(summary["residual"].as_f64().is_some());
}

#[test]
fn inequalities_study_counts_every_nonzero_mode() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "i.json", BASE);
    let o = wb(dir.path(), &["study", "inequalities", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("inequalities.csv")).unwrap();
    let row = data_lines(&csv).into_iter().find(|l| l.starts_with("symbol_comparison")).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[1], "63");
    assert_eq!(cols[2], "63");
}

#[test]
fn unknown_study_lists_valid_names() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", BASE);
    let o = wb(dir.path(), &["study", "bogus", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    for name in wb_core::cli::STUDIES {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn describe_echoes_snapshot_header() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new_1d(64, 2.0 * std::f64::consts::PI).unwrap();
    let eta = Field::from_fn(g.clone(), |x| 0.1 * x[0].sin()).unwrap();
    let st = WaveState::new_1d(eta, Field::zeros(g)).unwrap().with_time(2.5);
    save_snapshot(dir.path().join("u0.wbsnap"), &st).unwrap();
    let cfg = write(
        dir.path(),
        "snap.json",
        &BASE.replace(r#"{"preset": "single_mode", "amplitude": 0.1, "mode": 1}"#, r#"{"snapshot": "u0.wbsnap"}"#),
    );
    let o = wb(dir.path(), &["describe", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("dealias: on"));
    assert!(text.contains("snapshot header: dim = 1, n = [64]"), "{text}");
    assert!(text.contains("time = 2.5"));
    // describe has no side effects
    assert!(!dir.path().join("energy.csv").exists());
}

#[test]
fn describe_reports_parse_errors_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "broken.json", &BASE.replace(r#""horizon": 1.0,"#, r#""horizon": 1.0,,"#));
    let o = wb(dir.path(), &["describe", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}
