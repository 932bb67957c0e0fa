use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ComparisonNorm, SweepParam};
use crate::dynamics::{evolve, IntegratorConfig, Method, SystemSpec, Trajectory};
use crate::error::{Error, Result};
use crate::state::{Params, WaveState};

use super::{comparison_distance, fit_rate, RateReport, SweepSpec};

fn sup_distance(a: &Trajectory, b: &Trajectory, norm: ComparisonNorm) -> Result<f64> {
    if a.states.len() != b.states.len() {
        return Err(Error::StudyAborted("trajectories have different report grids".into()));
    }
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| comparison_distance(x, y, norm))
        .try_fold(0.0_f64, |m, d| d.map(|d| m.max(d)))
}

fn run(u0: &WaveState, spec: &SystemSpec, cfg: &IntegratorConfig, sweep: &SweepSpec) -> Result<Trajectory> {
    evolve(u0, spec, cfg, sweep.base.horizon, sweep.base.report_every)
}

/// Runs `u^kappa` for every swept `kappa` and the `kappa = 0` system once,
/// and fits the sup-in-time error against `kappa`.
pub fn kappa_limit_study(sweep: &SweepSpec) -> Result<RateReport> {
    if sweep.sweep_param != SweepParam::Kappa {
        return Err(Error::Config("kappa_limit: study.sweep_param must be `kappa`".into()));
    }
    if let Some(&k) = sweep.values.iter().find(|&&k| !(k > 0.0 && k <= 1.0)) {
        return Err(Error::param("kappa", k, "swept values must lie in (0, 1]"));
    }
    let base = &sweep.base;
    if base.params.mu != 0.0 {
        return Err(Error::param("mu", base.params.mu, "the kappa study runs the unregularized system"));
    }
    let u0 = base.initial_state()?;
    let dim = base.system.dim();
    let at = |kappa: f64| SystemSpec::new(dim, Params { kappa, ..base.params }, false);

    let mut kappas = vec![0.0];
    kappas.extend(&sweep.values);
    let runs: Vec<Result<Trajectory>> = kappas
        .par_iter()
        .map(|&k| run(&u0, &at(k)?, &base.integrator, sweep))
        .collect();
    let mut trajs = Vec::with_capacity(runs.len());
    for (k, r) in kappas.iter().zip(runs) {
        let t = r?;
        if let Some(time) = t.blow_up {
            return Err(Error::StudyAborted(format!("kappa = {k}: run blew up at t = {time}")));
        }
        trajs.push(t);
    }
    let errors = trajs[1..]
        .iter()
        .map(|t| sup_distance(t, &trajs[0], sweep.comparison_norm))
        .collect::<Result<Vec<_>>>()?;
    let (fitted_order, residual) = fit_rate(&sweep.values, &errors)?;
    Ok(RateReport {
        param: SweepParam::Kappa,
        values: sweep.values.clone(),
        errors,
        fitted_order,
        residual,
        notes: Vec::new(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MuLimitReport {
    pub rate: RateReport,
    /// Errors strictly decrease along the sweep.
    pub strictly_decreasing: bool,
}

/// Runs the regularized system for every swept `mu` and the `mu = 0`
/// system once; errors are sup-in-time distances in `sweep.comparison_norm`.
/// Points whose Picard iteration fails are rerun with the exponential
/// integrator and noted.
pub fn mu_limit_study(sweep: &SweepSpec) -> Result<MuLimitReport> {
    if sweep.sweep_param != SweepParam::Mu {
        return Err(Error::Config("mu_limit: study.sweep_param must be `mu`".into()));
    }
    if let Some(&m) = sweep.values.iter().find(|&&m| !(m > 0.0 && m < 1.0)) {
        return Err(Error::param("mu", m, "swept values must lie in (0, 1)"));
    }
    if !sweep.values.windows(2).all(|w| w[1] < w[0]) {
        return Err(Error::Config("mu_limit: study.values must decrease".into()));
    }
    let base = &sweep.base;
    if base.params.p != 1.0 {
        return Err(Error::param("p", base.params.p, "the mu study runs with p = 1"));
    }
    let u0 = base.initial_state()?;
    let dim = base.system.dim();
    let exponential = IntegratorConfig { method: Method::ExponentialRk4, ..base.integrator };

    let reference_cfg = if base.integrator.method == Method::PicardDuhamel { &exponential } else { &base.integrator };
    let reference = run(&u0, &SystemSpec::new(dim, Params { mu: 0.0, ..base.params }, false)?, reference_cfg, sweep)?;
    if let Some(time) = reference.blow_up {
        return Err(Error::StudyAborted(format!("mu = 0: run blew up at t = {time}")));
    }

    let runs: Vec<Result<(Trajectory, bool)>> = sweep
        .values
        .par_iter()
        .map(|&mu| {
            let spec = SystemSpec::new(dim, Params { mu, ..base.params }, true)?;
            let first = run(&u0, &spec, &base.integrator, sweep)?;
            if first.blow_up.is_some() && base.integrator.method == Method::PicardDuhamel {
                Ok((run(&u0, &spec, &exponential, sweep)?, true))
            } else {
                Ok((first, false))
            }
        })
        .collect();
    let mut notes = Vec::new();
    let mut errors = Vec::with_capacity(runs.len());
    for (mu, r) in sweep.values.iter().zip(runs) {
        let (t, fell_back) = r?;
        if fell_back {
            notes.push(format!("mu = {mu}: picard did not converge, used exponential_rk4"));
        }
        if let Some(time) = t.blow_up {
            return Err(Error::StudyAborted(format!("mu = {mu}: run blew up at t = {time}")));
        }
        errors.push(sup_distance(&t, &reference, sweep.comparison_norm)?);
    }
    let strictly_decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let (fitted_order, residual) = match fit_rate(&sweep.values, &errors) {
        Ok(f) => f,
        Err(e) => {
            notes.push(format!("no rate fit: {e}"));
            (f64::NAN, f64::NAN)
        }
    };
    Ok(MuLimitReport {
        rate: RateReport {
            param: SweepParam::Mu,
            values: sweep.values.clone(),
            errors,
            fitted_order,
            residual,
            notes,
        },
        strictly_decreasing,
    })
}
