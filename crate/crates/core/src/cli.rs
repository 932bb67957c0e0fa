//! The `wb` command line: `run`, `study` and `describe`.
//!
//! Exit codes: 0 success, 1 configuration or precondition error, 2 blow-up
//! (or a study aborted by one), 3 a study ran but its criterion failed.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::config::{ComparisonNorm, InitialData, RunConfig, SweepParam};
use crate::dynamics::{evolve, Method, SystemSpec, Trajectory, CURL_TOLERANCE};
use crate::error::{Error, Result};
use crate::experiments::{
    dissipation_test, invariant_region_test, kappa_limit_study, mu_limit_study, small_data_family, stability_test,
    FamilyRun, SweepSpec,
};
use crate::field::Field;
use crate::functionals::{CSV_HEADER, DEFAULT_DELTA, DEFAULT_EPSILON};
use crate::grid::Grid;
use crate::inequalities::{inequality_ratio_report, Inequality, Sample};
use crate::presets::Preset;
use crate::snapshot::save_snapshot;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const STUDIES: [&str; 7] = [
    "kappa_limit",
    "mu_limit",
    "invariant_region",
    "dissipation",
    "stability",
    "inequalities",
    "conservation",
];

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_BLOW_UP: i32 = 2;
pub const EXIT_STUDY_FAILED: i32 = 3;

/// Relative drift allowed by the conservation study.
const CONSERVATION_TOLERANCE: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "wb", version, about = "Capillary Whitham-Boussinesq solver and verification studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate a configuration and write the energy CSV.
    Run { config: PathBuf },
    /// Run a named study.
    Study { name: String, config: PathBuf },
    /// Print the resolved plan without running anything.
    Describe { config: PathBuf },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BlowUp { .. } | Error::StudyAborted(_) => EXIT_BLOW_UP,
        _ => EXIT_CONFIG,
    }
}

/// Parse `args` (including the program name) and execute. Returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let result = match &cli.command {
        Command::Run { config } => cmd_run(config),
        Command::Study { name, config } => cmd_study(name, config),
        Command::Describe { config } => cmd_describe(config).map(|text| {
            print!("{text}");
            EXIT_OK
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("WB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call in the same process (tests) is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn output_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = std::env::var_os("WB_OUTPUT_DIR")
        .map(PathBuf::from)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("wb_output"));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn file_header(cfg: &RunConfig, extra: &str) -> String {
    format!("# wb {VERSION} config_hash={} seed={}{extra}\n", cfg.hash(), cfg.seed)
}

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_energy_csv(path: &Path, cfg: &RunConfig, traj: &Trajectory) -> Result<()> {
    let mut out = file_header(cfg, "");
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &traj.reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("json value serializes");
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn cmd_run(path: &Path) -> Result<i32> {
    let cfg = RunConfig::load(path)?;
    let dir = output_dir(&cfg)?;
    let u0 = cfg.initial_state()?;
    let spec = cfg.spec()?;
    let traj = evolve(&u0, &spec, &cfg.integrator, cfg.horizon, cfg.report_every)?;
    write_energy_csv(&dir.join("energy.csv"), &cfg, &traj)?;
    if cfg.snapshots {
        for (k, st) in traj.states.iter().enumerate() {
            save_snapshot(dir.join(format!("snapshot_{k:05}.wbsnap")), st)?;
        }
    }
    let final_time = traj.final_state().time;
    write_json(
        &dir.join("run_summary.json"),
        &json!({
            "config_hash": cfg.hash(),
            "version": VERSION,
            "steps": traj.steps,
            "reports": traj.reports.len(),
            "final_time": final_time,
            "blow_up": traj.blow_up,
            "pass": traj.blow_up.is_none(),
        }),
    )?;
    if let Some(t) = traj.blow_up {
        eprintln!("blow-up at t = {t}");
        return Ok(EXIT_BLOW_UP);
    }
    Ok(EXIT_OK)
}

/// What a study hands back to the driver.
struct StudyOutcome {
    /// Suffix for the output file names.
    tag: String,
    columns: &'static str,
    rows: Vec<String>,
    fitted_order: Option<f64>,
    residual: Option<f64>,
    pass: bool,
    details: serde_json::Value,
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report serializes")
}

fn cmd_study(name: &str, path: &Path) -> Result<i32> {
    if !STUDIES.contains(&name) {
        return Err(Error::Config(format!("unknown study `{name}`; valid studies: {}", STUDIES.join(", "))));
    }
    let cfg = RunConfig::load(path)?;
    let dir = output_dir(&cfg)?;
    let outcome = match name {
        "kappa_limit" => study_kappa(&cfg)?,
        "mu_limit" => study_mu(&cfg)?,
        "invariant_region" => study_invariant(&cfg)?,
        "dissipation" => study_dissipation(&cfg)?,
        "stability" => study_stability(&cfg)?,
        "inequalities" => study_inequalities(&cfg)?,
        "conservation" => study_conservation(&cfg)?,
        _ => unreachable!("checked against STUDIES"),
    };
    let stem = if outcome.tag.is_empty() { name.to_string() } else { format!("{name}_{}", outcome.tag) };
    let mut csv = file_header(&cfg, &format!(" study={name}"));
    csv.push_str(outcome.columns);
    csv.push('\n');
    for r in &outcome.rows {
        csv.push_str(r);
        csv.push('\n');
    }
    std::fs::write(dir.join(format!("{stem}.csv")), csv)?;
    write_json(
        &dir.join(format!("{stem}.json")),
        &json!({
            "study": name,
            "config_hash": cfg.hash(),
            "version": VERSION,
            "seed": cfg.seed,
            "fitted_order": outcome.fitted_order,
            "residual": outcome.residual,
            "pass": outcome.pass,
            "details": outcome.details,
        }),
    )?;
    println!("{name}: {}", if outcome.pass { "pass" } else { "FAIL" });
    Ok(if outcome.pass { EXIT_OK } else { EXIT_STUDY_FAILED })
}

fn rate_rows(values: &[f64], errors: &[f64]) -> Vec<String> {
    values.iter().zip(errors).map(|(v, e)| format!("{},{}", f(*v), f(*e))).collect()
}

fn study_kappa(cfg: &RunConfig) -> Result<StudyOutcome> {
    let sweep = SweepSpec::from_config(cfg, SweepParam::Kappa, ComparisonNorm::L2xH12)?;
    let r = kappa_limit_study(&sweep)?;
    Ok(StudyOutcome {
        tag: "kappa".into(),
        columns: "kappa,error",
        rows: rate_rows(&r.values, &r.errors),
        fitted_order: Some(r.fitted_order),
        residual: Some(r.residual),
        pass: r.fitted_order >= 0.45 && r.residual < 0.1,
        details: to_json(&r),
    })
}

fn study_mu(cfg: &RunConfig) -> Result<StudyOutcome> {
    let r = cfg.study().r.unwrap_or(0.5);
    let sweep = SweepSpec::from_config(cfg, SweepParam::Mu, ComparisonNorm::Sobolev { r })?;
    let rep = mu_limit_study(&sweep)?;
    Ok(StudyOutcome {
        tag: "mu".into(),
        columns: "mu,error",
        rows: rate_rows(&rep.rate.values, &rep.rate.errors),
        fitted_order: Some(rep.rate.fitted_order).filter(|v| v.is_finite()),
        residual: Some(rep.rate.residual).filter(|v| v.is_finite()),
        pass: rep.strictly_decreasing,
        details: to_json(&rep),
    })
}

fn family_run(cfg: &RunConfig) -> FamilyRun {
    FamilyRun { integrator: cfg.integrator, horizon: cfg.horizon, report_every: cfg.report_every }
}

fn study_invariant(cfg: &RunConfig) -> Result<StudyOutcome> {
    let study = cfg.study();
    let grid = cfg.grid()?;
    let epsilon = study.epsilon.unwrap_or(DEFAULT_EPSILON);
    let kappas = if study.kappas.is_empty() { vec![cfg.params.kappa] } else { study.kappas.clone() };
    let mus = [0.0, study.mu.unwrap_or(0.2)];
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut pass = true;
    for &kappa in &kappas {
        let family = small_data_family(&grid, study.family_size.unwrap_or(10), cfg.seed, kappa, epsilon, study.band.unwrap_or(3))?;
        let params = crate::state::Params { kappa, ..cfg.params };
        params.validate()?;
        let rep = invariant_region_test(&family, params, &mus, epsilon, &family_run(cfg))?;
        pass &= rep.pass;
        for r in &rep.rows {
            rows.push(format!(
                "{},{},{},{},{},{}",
                f(kappa),
                f(r.mu),
                r.index,
                f(r.initial_norm),
                f(r.max_norm),
                to_json(&r.status).as_str().unwrap_or("")
            ));
        }
        reports.push(json!({ "kappa": kappa, "report": rep }));
    }
    Ok(StudyOutcome {
        tag: String::new(),
        columns: "kappa,mu,index,initial_norm,max_norm,status",
        rows,
        fitted_order: None,
        residual: None,
        pass,
        details: json!({ "epsilon": epsilon, "runs": reports }),
    })
}

fn study_dissipation(cfg: &RunConfig) -> Result<StudyOutcome> {
    let study = cfg.study();
    let grid = cfg.grid()?;
    let epsilon = study.epsilon.unwrap_or(DEFAULT_EPSILON);
    let delta = study.delta.unwrap_or(DEFAULT_DELTA);
    let mu = study.mu.unwrap_or(if cfg.params.mu > 0.0 { cfg.params.mu } else { 0.2 });
    let params = crate::state::Params { mu, ..cfg.params };
    params.validate()?;
    let family = small_data_family(&grid, study.family_size.unwrap_or(10), cfg.seed, params.kappa, epsilon, study.band.unwrap_or(3))?;
    let rep = dissipation_test(&family, params, delta, &family_run(cfg))?;
    let rows = rep
        .rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{}",
                r.index,
                f(r.gate),
                f(r.max_relative_increase),
                f(r.total_change),
                f(r.control_drift),
                to_json(&r.status).as_str().unwrap_or("")
            )
        })
        .collect();
    Ok(StudyOutcome {
        tag: String::new(),
        columns: "index,gate,max_relative_increase,total_change,control_drift,status",
        rows,
        fitted_order: None,
        residual: None,
        pass: rep.pass,
        details: to_json(&rep),
    })
}

fn study_stability(cfg: &RunConfig) -> Result<StudyOutcome> {
    let study = cfg.study();
    let grid = cfg.grid()?;
    let u0 = cfg.initial_state()?;
    let direction = Preset::RandomBandlimited { seed: cfg.seed, band: study.band.unwrap_or(3), amplitude: 1.0 }.build(&grid)?;
    let sizes = if study.sizes.is_empty() { vec![1e-2, 1e-3, 1e-4] } else { study.sizes.clone() };
    let r = study.r.unwrap_or(0.5);
    let rep = stability_test(&u0, &direction, &sizes, r, cfg.params, &family_run(cfg))?;
    let rows = rep
        .rows
        .iter()
        .map(|row| format!("{},{},{},{}", f(row.size), f(row.initial), f(row.sup), f(row.growth_rate)))
        .collect();
    Ok(StudyOutcome {
        tag: "size".into(),
        columns: "size,initial,sup,growth_rate",
        rows,
        fitted_order: Some(rep.slope).filter(|v| v.is_finite()),
        residual: Some(rep.residual).filter(|v| v.is_finite()),
        pass: rep.pass,
        details: to_json(&rep),
    })
}

fn study_inequalities(cfg: &RunConfig) -> Result<StudyOutcome> {
    let grid = Grid::new_1d(cfg.grid.n[0], cfg.grid.length[0])?;
    let band = cfg.study().band.unwrap_or(3);
    let field = |seed: u64| -> Result<Field> {
        Ok(Preset::RandomBandlimited { seed, band, amplitude: 1.0 }.build(&grid)?.eta)
    };
    let count = cfg.study().family_size.unwrap_or(10) as u64;
    let mut family = Vec::new();
    for k in 0..count {
        let base = cfg.seed.wrapping_add(3 * k);
        family.push(Sample::triple(field(base)?, field(base + 1)?, field(base + 2)?));
    }
    let checks = [
        Inequality::KatoPonce { s: 1.0, p: 2.0, p1: f64::INFINITY, p2: 2.0, p3: 2.0, p4: f64::INFINITY },
        Inequality::Leibniz { sigma1: 0.25, sigma2: 0.25, p: 2.0, p1: 4.0, p2: 4.0 },
        Inequality::Trilinear { a: 0.5, b: 0.5, c: 0.0 },
        Inequality::BrezisGallouet { s: 1.0 },
        Inequality::SymbolComparison,
    ];
    let mut rows = Vec::new();
    let mut details = Vec::new();
    let mut pass = true;
    for which in checks {
        let rep = inequality_ratio_report(&family, which)?;
        match &rep.symbol_chain {
            Some(chain) => {
                pass &= chain.passed == chain.checked;
                rows.push(format!(
                    "{},{},{},{}",
                    rep.inequality,
                    chain.checked,
                    chain.passed,
                    f(chain.max_violation_ulps)
                ));
            }
            None => {
                pass &= rep.max_ratio.is_finite();
                rows.push(format!("{},{},{},{}", rep.inequality, rep.samples.len(), rep.samples.len(), f(rep.max_ratio)));
            }
        }
        details.push(to_json(&rep));
    }
    Ok(StudyOutcome {
        tag: String::new(),
        columns: "inequality,checked,passed,max_ratio_or_ulps",
        rows,
        fitted_order: None,
        residual: None,
        pass,
        details: serde_json::Value::Array(details),
    })
}

fn study_conservation(cfg: &RunConfig) -> Result<StudyOutcome> {
    let spec = cfg.spec()?;
    if spec.regularized {
        return Err(Error::param("mu", cfg.params.mu, "the conservation study runs the unregularized system"));
    }
    let u0 = cfg.initial_state()?;
    let traj = evolve(&u0, &spec, &cfg.integrator, cfg.horizon, cfg.report_every)?;
    let tol = cfg.study().tolerance.unwrap_or(CONSERVATION_TOLERANCE);
    let h0 = traj.reports[0].hamiltonian;
    let i0 = traj.reports[0].momentum;
    let drift_h = traj
        .reports
        .iter()
        .map(|r| if h0 == 0.0 { r.hamiltonian.abs() } else { (r.hamiltonian - h0).abs() / h0.abs() })
        .fold(0.0, f64::max);
    let drift_i = if spec.dim == 1 {
        traj.reports.iter().map(|r| (r.momentum - i0).abs() / (1.0 + i0.abs())).fold(0.0, f64::max)
    } else {
        0.0
    };
    let curl = traj.states.iter().map(|s| s.curl_residue()).fold(0.0, f64::max);
    let pass = traj.blow_up.is_none() && drift_h <= tol && drift_i <= tol && curl <= CURL_TOLERANCE;
    Ok(StudyOutcome {
        tag: String::new(),
        columns: CSV_HEADER,
        rows: traj.reports.iter().map(|r| r.csv_row()).collect(),
        fitted_order: None,
        residual: None,
        pass,
        details: json!({
            "hamiltonian_drift": drift_h,
            "momentum_drift": if spec.dim == 1 { Some(drift_i) } else { None },
            "curl_residue": curl,
            "tolerance": tol,
            "blow_up": traj.blow_up,
        }),
    })
}

fn symbols_line(spec: &SystemSpec) -> String {
    let mut s = String::from("K_kappa(xi) = sqrt(tanh|xi| / |xi|) sqrt(1 + kappa |xi|^2)");
    if spec.dim == 1 {
        s.push_str(", -i tanh D, D / tanh D");
    } else {
        s.push_str(", K_0^2 grad, K_0^2 div");
    }
    if spec.regularized {
        s.push_str(&format!(", -kappa mu |D|^{}", spec.params.p));
    }
    s
}

fn cmd_describe(path: &Path) -> Result<String> {
    let cfg = RunConfig::load(path)?;
    let grid = cfg.grid()?;
    let spec = cfg.spec()?;
    let p = cfg.params;
    let dim = grid.dim();
    let mut out = String::new();
    let regularized = if spec.regularized { "regularized" } else { "unregularized" };
    let _ = writeln!(out, "config: {} (hash {})", path.display(), cfg.hash());
    let _ = writeln!(out, "system: {:?} ({dim}D, {regularized})", spec.kind());
    let _ = writeln!(
        out,
        "grid: n = {:?}, L = {:?}, points = {}, max |xi| = {:.6}",
        grid.shape(),
        grid.lengths(),
        grid.len(),
        grid.max_abs_wavenumber()
    );
    let _ = writeln!(out, "params: kappa = {}, mu = {}, p = {}, s = {}", p.kappa, p.mu, p.p, p.s);
    let _ = writeln!(out, "symbols: {}", symbols_line(&spec));
    let ig = &cfg.integrator;
    let _ = write!(out, "integrator: {}, dt = {}", ig.method.name(), ig.dt);
    if ig.method == Method::PicardDuhamel {
        let _ = write!(out, ", picard_tol = {}, picard_max_iter = {}", ig.picard_tol, ig.picard_max_iter);
    }
    out.push('\n');
    let _ = writeln!(out, "dealias: {}", if ig.dealias { "on (two-thirds rule)" } else { "off" });
    if dim == 2 {
        let _ = writeln!(out, "curl-free projection: active (velocity curl residue tolerance {CURL_TOLERANCE:e})");
    }
    let reports = (cfg.horizon / cfg.report_every - 1e-9).ceil().max(1.0) as usize + 1;
    let _ = writeln!(out, "horizon: {}, report_every: {}, reports: {reports}", cfg.horizon, cfg.report_every);
    match &cfg.initial_data {
        InitialData::Preset(pr) => {
            let _ = writeln!(out, "initial data: {} {}", pr.name(), serde_json::to_string(pr).expect("preset serializes"));
        }
        InitialData::Snapshot(s) => {
            let _ = writeln!(out, "initial data: snapshot {}", s.snapshot.display());
            if let Some(h) = cfg.snapshot_header()? {
                let _ = writeln!(
                    out,
                    "snapshot header: dim = {}, n = {:?}, L = {:?}, time = {}",
                    h.dim, h.n, h.lengths, h.time
                );
            }
        }
    }
    let fields = 1 + dim;
    let state_bytes = fields * grid.len() * 8;
    let working = 12 * fields * grid.len() * 16;
    let total = state_bytes * reports + working;
    let _ = writeln!(out, "estimated memory: {:.2} MiB", total as f64 / (1024.0 * 1024.0));
    let _ = writeln!(out, "seed: {}", cfg.seed);
    if let Some(dir) = &cfg.output_dir {
        let _ = writeln!(out, "output_dir: {}", dir.display());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_cfg(dir: &Path, text: &str) -> PathBuf {
        let p = dir.join("cfg.json");
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn describe_mentions_dealias_and_projection() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_cfg(dir.path(), crate::config::tests::SMALL);
        let text = cmd_describe(&p).unwrap();
        assert!(text.contains("dealias: on"), "{text}");
        assert!(!text.contains("curl-free"));
        let two = crate::config::tests::SMALL
            .replace(r#""wb1d""#, r#""wb2d""#)
            .replace("[64]", "[16, 16]")
            .replace("[6.283185307179586]", "[6.283185307179586, 6.283185307179586]");
        let p = write_cfg(dir.path(), &two);
        assert!(cmd_describe(&p).unwrap().contains("curl-free projection: active"));
    }

    #[test]
    fn unknown_study_is_a_config_error() {
        let e = cmd_study("nope", Path::new("missing.json")).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_CONFIG);
        assert!(e.to_string().contains("kappa_limit"));
    }
}
