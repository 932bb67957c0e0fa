use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{evolve, IntegratorConfig, SystemSpec, Trajectory};
use crate::error::{Error, Result};
use crate::functionals::weighted_norm;
use crate::norms::sobolev_norm;
use crate::state::{Params, WaveState};

/// Roundoff allowance for increases of the Hamiltonian.
const MONOTONE_TOLERANCE: f64 = 1e-10;
/// Allowed relative Hamiltonian drift of the unregularized control runs.
const CONTROL_DRIFT: f64 = 1e-8;

/// Time stepping shared by every member of a data family.
#[derive(Clone, Copy, Debug)]
pub struct FamilyRun {
    pub integrator: IntegratorConfig,
    pub horizon: f64,
    pub report_every: f64,
}

impl FamilyRun {
    pub(super) fn evolve(&self, u0: &WaveState, spec: &SystemSpec) -> Result<Trajectory> {
        evolve(u0, spec, &self.integrator, self.horizon, self.report_every)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Pass,
    Fail,
    /// The datum did not meet the smallness precondition.
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionRow {
    pub index: usize,
    pub mu: f64,
    pub initial_norm: f64,
    pub max_norm: f64,
    pub status: RowStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantRegionReport {
    pub epsilon: f64,
    pub rows: Vec<RegionRow>,
    /// No row failed.
    pub pass: bool,
}

/// Evolves each datum with each `mu` and checks that the
/// `H_kappa^1 x H^{1/2}` norm stays at or below `epsilon` at every report
/// time. Data with initial norm above `epsilon / 2` are skipped.
pub fn invariant_region_test(
    family: &[WaveState],
    params: Params,
    mus: &[f64],
    epsilon: f64,
    run: &FamilyRun,
) -> Result<InvariantRegionReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", epsilon, "must be positive and finite"));
    }
    let jobs: Vec<(usize, f64)> = (0..family.len()).flat_map(|i| mus.iter().map(move |&m| (i, m))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(index, mu)| {
            let u0 = &family[index];
            let norm = |s: &WaveState| weighted_norm(s, 0.5, params.kappa);
            let initial_norm = norm(u0);
            if initial_norm > 0.5 * epsilon {
                return Ok(RegionRow { index, mu, initial_norm, max_norm: initial_norm, status: RowStatus::Skipped });
            }
            let spec = SystemSpec::new(u0.dim(), Params { mu, ..params }, mu > 0.0)?;
            let t = run.evolve(u0, &spec)?;
            let max_norm = if t.blow_up.is_some() { f64::INFINITY } else { t.states.iter().map(norm).fold(0.0, f64::max) };
            let status = if max_norm <= epsilon { RowStatus::Pass } else { RowStatus::Fail };
            Ok(RegionRow { index, mu, initial_norm, max_norm, status })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().all(|r| r.status != RowStatus::Fail);
    Ok(InvariantRegionReport { epsilon, rows, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct DissipationRow {
    pub index: usize,
    /// `||eta||_{L^2} + ||v||_{H^{1/2}}` of the datum.
    pub gate: f64,
    /// Largest `(H(t_{k+1}) - H(t_k)) / |H(t_k)|` over the run.
    pub max_relative_increase: f64,
    /// `H(T) - H(0)`.
    pub total_change: f64,
    /// Largest `|H(t) - H(0)| / |H(0)|` of the same datum with `mu = 0`.
    pub control_drift: f64,
    pub status: RowStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct DissipationReport {
    pub delta: f64,
    pub rows: Vec<DissipationRow>,
    pub control_drift: f64,
    pub pass: bool,
}

fn gate(u: &WaveState) -> Result<f64> {
    let v: f64 = u.vel.iter().map(|v| sobolev_norm(v, 0.5, false).map(|x| x * x)).sum::<Result<f64>>()?;
    Ok(u.eta.l2_norm() + v.sqrt())
}

/// Checks that the Hamiltonian of the regularized flow is non-increasing
/// across report times, and that the same data conserve it when `mu = 0`.
pub fn dissipation_test(family: &[WaveState], params: Params, delta: f64, run: &FamilyRun) -> Result<DissipationReport> {
    if params.mu <= 0.0 {
        return Err(Error::param("mu", params.mu, "the dissipation test needs mu > 0"));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", delta, "must be positive and finite"));
    }
    let rows = family
        .par_iter()
        .enumerate()
        .map(|(index, u0)| {
            let g = gate(u0)?;
            if g > delta {
                return Ok(DissipationRow {
                    index,
                    gate: g,
                    max_relative_increase: f64::NAN,
                    total_change: f64::NAN,
                    control_drift: f64::NAN,
                    status: RowStatus::Skipped,
                });
            }
            let t = run.evolve(u0, &SystemSpec::new(u0.dim(), params, true)?)?;
            let h: Vec<f64> = t.reports.iter().map(|r| r.hamiltonian).collect();
            let max_relative_increase = h
                .windows(2)
                .map(|w| if w[0] == 0.0 { w[1] - w[0] } else { (w[1] - w[0]) / w[0].abs() })
                .fold(f64::NEG_INFINITY, f64::max)
                .max(0.0);

            let control = run.evolve(u0, &SystemSpec::new(u0.dim(), Params { mu: 0.0, ..params }, false)?)?;
            let h0 = control.reports[0].hamiltonian;
            let control_drift = control
                .reports
                .iter()
                .map(|r| if h0 == 0.0 { r.hamiltonian.abs() } else { (r.hamiltonian - h0).abs() / h0.abs() })
                .fold(0.0, f64::max);

            let monotone = t.blow_up.is_none() && max_relative_increase <= MONOTONE_TOLERANCE;
            let conserved = control.blow_up.is_none() && control_drift <= CONTROL_DRIFT;
            Ok(DissipationRow {
                index,
                gate: g,
                max_relative_increase,
                total_change: h[h.len() - 1] - h[0],
                control_drift,
                status: if monotone && conserved { RowStatus::Pass } else { RowStatus::Fail },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let control_drift = rows.iter().map(|r| r.control_drift).filter(|d| !d.is_nan()).fold(0.0, f64::max);
    let pass = rows.iter().all(|r| r.status != RowStatus::Fail);
    Ok(DissipationReport { delta, rows, control_drift, pass })
}
