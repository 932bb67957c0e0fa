use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::functionals::{check_noncavitation, weighted_norm, NoncavitationBounds, NoncavitationCheck};
use crate::state::{Params, WaveState};

/// User-supplied constants of the existence-time heuristic. None of them is
/// computable from the data; the result is never a certified bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExistenceConstants {
    /// Upper coercivity constant of the energy.
    #[serde(default = "one")]
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// Lower depth bound: `1 + eta >= h0`.
    pub h0: f64,
    /// Upper bound on `eta`.
    pub upper0: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for ExistenceConstants {
    fn default() -> Self {
        Self { c0: 1.0, c1: 2.0, c2: 1.0, h0: 0.5, upper0: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExistenceEstimate {
    /// `||u0||` in `H_kappa^{s+1/2} x H^s`.
    pub norm: f64,
    pub t1: f64,
    pub t2: f64,
    pub t0: f64,
    /// Present when `s > 3/2`.
    pub noncavitation: Option<NoncavitationCheck>,
}

/// `T0 = min(T1, T2)` with
/// `T1 = log(1 + 1 / (1 + C1 (1 + kappa) C0 N^2)) / (C1 (1 + kappa))` and
/// `T2 = h0 / (C2 (N + N^2))` when `s > 3/2`, `T2 = 1` otherwise.
pub fn existence_time_estimate(u0: &WaveState, params: &Params, k: &ExistenceConstants) -> Result<ExistenceEstimate> {
    params.validate()?;
    for (name, v) in [("c0", k.c0), ("c1", k.c1), ("c2", k.c2)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::param(name, v, "must be positive and finite"));
        }
    }
    let bounds = NoncavitationBounds::new(k.h0, k.upper0)?;
    let norm = weighted_norm(u0, params.s, params.kappa);
    let a = k.c1 * (1.0 + params.kappa);
    let t1 = (1.0 / (1.0 + a * k.c0 * norm * norm)).ln_1p() / a;
    let (t2, noncavitation) = if params.s > 1.5 {
        let check = check_noncavitation(u0, &bounds);
        if !check.pass {
            return Err(Error::HypothesisViolated(format!(
                "noncavitation: eta ranges over [{}, {}], bounds need [{}, {}]",
                check.eta_min,
                check.eta_max,
                k.h0 - 1.0,
                k.upper0
            )));
        }
        let t2 = if norm == 0.0 { f64::INFINITY } else { k.h0 / (k.c2 * (norm + norm * norm)) };
        (t2, Some(check))
    } else {
        (1.0, None)
    };
    Ok(ExistenceEstimate { norm, t1, t2, t0: t1.min(t2), noncavitation })
}

/// Largest constant tried when fitting an envelope.
const MAX_CONSTANT: f64 = 50.0;

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub s: f64,
    pub times: Vec<f64>,
    /// `||u(t)||` in `H_kappa^{s+1/2} x H^s`.
    pub norms: Vec<f64>,
    /// Smallest constant whose envelope dominates the history, infinite if none.
    pub constant: f64,
    pub envelope: Vec<f64>,
    /// `min_t envelope / norm`.
    pub margin: f64,
    pub dominated: bool,
}

/// Fits the persistence-of-regularity envelope to a trajectory:
/// `exp(C e^{C (1 + kappa) t})` for `s < 1`, and
/// `N0 exp(C (1 + kappa) (t + int_0^t ||u||^2))` with the inner norm taken in
/// `H_kappa^{s+1/4} x H^{s-1/4}` for `s >= 1`. The minimal `C` is found by
/// bisection. A run flagged as blown up is never dominated.
pub fn growth_bound_monitor(traj: &Trajectory, s: f64, params: &Params) -> Result<GrowthReport> {
    if !(s >= 0.5 && s.is_finite()) {
        return Err(Error::param("s", s, "must be finite and >= 1/2"));
    }
    let kappa = params.kappa;
    let times = traj.times();
    let norms: Vec<f64> = traj.states.iter().map(|u| weighted_norm(u, s, kappa)).collect();
    let t0 = times.first().copied().unwrap_or(0.0);

    // int_0^{t_k} ||u||^2 by the trapezoid rule on the report grid
    let mut integral = vec![0.0; times.len()];
    if s >= 1.0 {
        let inner: Vec<f64> = traj.states.iter().map(|u| weighted_norm(u, s - 0.25, kappa).powi(2)).collect();
        for k in 1..times.len() {
            integral[k] = integral[k - 1] + 0.5 * (times[k] - times[k - 1]) * (inner[k] + inner[k - 1]);
        }
    }
    let envelope = |c: f64| -> Vec<f64> {
        times
            .iter()
            .zip(&integral)
            .map(|(&t, &int)| {
                let t = t - t0;
                if s < 1.0 {
                    (c * (c * (1.0 + kappa) * t).exp()).exp()
                } else {
                    norms[0] * (c * (1.0 + kappa) * (t + int)).exp()
                }
            })
            .collect()
    };
    let dominates = |c: f64| envelope(c).iter().zip(&norms).all(|(e, n)| e >= n);

    let finite = norms.iter().all(|n| n.is_finite());
    let dominated = traj.blow_up.is_none() && finite && dominates(MAX_CONSTANT);
    if !dominated {
        return Ok(GrowthReport {
            s,
            times,
            norms,
            constant: f64::INFINITY,
            envelope: Vec::new(),
            margin: 0.0,
            dominated: false,
        });
    }
    let constant = if dominates(0.0) {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, MAX_CONSTANT);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if dominates(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let env = envelope(constant);
    let margin = env
        .iter()
        .zip(&norms)
        .map(|(e, n)| if *n == 0.0 { f64::INFINITY } else { e / n })
        .fold(f64::INFINITY, f64::min);
    Ok(GrowthReport { s, times, norms, constant, envelope: env, margin, dominated })
}
