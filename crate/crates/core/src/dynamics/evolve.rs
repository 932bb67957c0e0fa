use crate::error::{Error, Result};
use crate::functionals::EnergyReport;
use crate::state::WaveState;

use super::integrators::{rk4_step, IntegratorConfig, LawsonStep, Method};
use super::model::{Coeffs, Model};
use super::picard::picard_solve;
use super::SystemSpec;

pub const DEFAULT_BLOW_UP_CEILING: f64 = 1e6;

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// States at the report times.
    pub states: Vec<WaveState>,
    pub reports: Vec<EnergyReport>,
    /// Time at which the weighted norm crossed the ceiling or became NaN.
    pub blow_up: Option<f64>,
    pub steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &WaveState {
        self.states.last().expect("a trajectory holds at least the initial state")
    }

    pub fn times(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.time).collect()
    }
}

/// Report times `t0, t0 + r, ..., t0 + T` (the last interval may be short).
pub(crate) fn report_times(t0: f64, horizon: f64, every: f64) -> Vec<f64> {
    let count = (horizon / every - 1e-9).ceil().max(1.0) as usize;
    (0..=count)
        .map(|k| if k == count { t0 + horizon } else { t0 + k as f64 * every })
        .collect()
}

pub fn evolve(
    u0: &WaveState,
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    horizon: f64,
    report_every: f64,
) -> Result<Trajectory> {
    evolve_with(u0, spec, cfg, horizon, report_every, DEFAULT_BLOW_UP_CEILING)
}

/// Integrate to `u0.time + horizon`, reporting every `report_every`. Each
/// report interval is split into equal steps no longer than `cfg.dt`. On a
/// non-finite state or a weighted norm above `ceiling` the run stops and the
/// partial trajectory is returned with `blow_up` set.
pub fn evolve_with(
    u0: &WaveState,
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    horizon: f64,
    report_every: f64,
    ceiling: f64,
) -> Result<Trajectory> {
    cfg.validate()?;
    spec.check_state(u0)?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::param("horizon", horizon, "must be finite and >= 0"));
    }
    if !(report_every > 0.0 && report_every.is_finite()) {
        return Err(Error::param("report_every", report_every, "must be positive and finite"));
    }
    let grid = u0.grid().clone();
    let params = spec.params;
    let model = Model::new(&grid, spec, cfg.dealias);
    let mut traj = Trajectory {
        states: vec![u0.clone()],
        reports: vec![EnergyReport::new(u0, &params)?],
        blow_up: None,
        steps: 0,
    };
    if horizon == 0.0 {
        return Ok(traj);
    }
    let times = report_times(u0.time, horizon, report_every);
    let mut u = Coeffs::from_state(u0);
    let mut cache: Option<LawsonStep> = None;
    for w in times.windows(2) {
        let (a, b) = (w[0], w[1]);
        let count = ((b - a) / cfg.dt - 1e-9).ceil().max(1.0) as usize;
        let h = (b - a) / count as f64;
        if cfg.method == Method::PicardDuhamel {
            let start = u.to_state(&grid, a)?;
            match picard_solve(&start, spec, cfg, b - a) {
                Ok(sol) => {
                    u = Coeffs::from_state(sol.final_state());
                    traj.steps += sol.times.len() - 1;
                }
                Err(Error::PicardDiverged { .. }) => {
                    traj.blow_up = Some(a);
                    return Ok(traj);
                }
                Err(e) => return Err(e),
            }
        } else {
            if cfg.method == Method::ExponentialRk4 && cache.as_ref().map_or(true, |c| c.h != h) {
                cache = Some(LawsonStep::new(&model, h));
            }
            for k in 0..count {
                u = match (&cfg.method, &cache) {
                    (Method::ExponentialRk4, Some(step)) => step.step(&model, &u),
                    _ => rk4_step(&model, &u, h),
                };
                traj.steps += 1;
                if !u.is_finite() || model.norm(&u) > ceiling {
                    traj.blow_up = Some(a + (k + 1) as f64 * h);
                    return Ok(traj);
                }
            }
        }
        if !u.is_finite() || model.norm(&u) > ceiling {
            traj.blow_up = Some(b);
            return Ok(traj);
        }
        let state = u.to_state(&grid, b)?;
        traj.reports.push(EnergyReport::new(&state, &params)?);
        traj.states.push(state);
    }
    Ok(traj)
}
