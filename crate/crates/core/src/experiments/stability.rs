use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::SystemSpec;
use crate::error::{Error, Result};
use crate::functionals::difference_energy;
use crate::state::{Params, WaveState};

use super::{fit_rate, FamilyRun};

#[derive(Clone, Debug, Serialize)]
pub struct StabilityRow {
    pub size: f64,
    /// `E^r` of the pair at the initial time.
    pub initial: f64,
    /// `sup_t E^r(t)`.
    pub sup: f64,
    /// `max_{t > 0} (ln E^r(t) - ln E^r(0)) / t`, NaN for a zero perturbation.
    pub growth_rate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub r: f64,
    pub rows: Vec<StabilityRow>,
    /// Log-log slope of `sup E^r` against the perturbation size.
    pub slope: f64,
    pub residual: f64,
    /// Every growth rate lies within 50% of their mean.
    pub growth_rate_stable: bool,
    /// `sup E^r` decreases with the perturbation size.
    pub monotone: bool,
    /// Slope within `2 +- 0.2`, stable growth rates and monotone sups.
    pub pass: bool,
}

/// Evolves `u0` and `u0 + size * direction` for each size and tracks the
/// difference energy `E^r` of each pair.
pub fn stability_test(
    u0: &WaveState,
    direction: &WaveState,
    sizes: &[f64],
    r: f64,
    params: Params,
    run: &FamilyRun,
) -> Result<StabilityReport> {
    if !(r > 0.0 && r <= params.s - 0.5) {
        return Err(Error::param("r", r, format!("must lie in (0, s - 1/2] with s = {}", params.s)));
    }
    if let Some(&s) = sizes.iter().find(|&&s| !(s >= 0.0 && s.is_finite())) {
        return Err(Error::param("size", s, "perturbation sizes must be finite and >= 0"));
    }
    let spec = SystemSpec::from_params(u0.dim(), params)?;
    let base = run.evolve(u0, &spec)?;
    if let Some(time) = base.blow_up {
        return Err(Error::StudyAborted(format!("unperturbed run blew up at t = {time}")));
    }
    let rows = sizes
        .par_iter()
        .map(|&size| {
            let up = u0.axpy(size, direction)?;
            let t = run.evolve(&up, &spec)?;
            if let Some(time) = t.blow_up {
                return Err(Error::StudyAborted(format!("size = {size}: run blew up at t = {time}")));
            }
            let e = t
                .states
                .iter()
                .zip(&base.states)
                .map(|(a, b)| difference_energy(a, b, r, &params))
                .collect::<Result<Vec<_>>>()?;
            let sup = e.iter().copied().fold(0.0, f64::max);
            let growth_rate = if e[0] > 0.0 {
                t.states[1..]
                    .iter()
                    .zip(&e[1..])
                    .map(|(s, &ek)| (ek.ln() - e[0].ln()) / (s.time - u0.time))
                    .fold(f64::NEG_INFINITY, f64::max)
            } else {
                f64::NAN
            };
            Ok(StabilityRow { size, initial: e[0], sup, growth_rate })
        })
        .collect::<Result<Vec<_>>>()?;

    let positive: Vec<&StabilityRow> = rows.iter().filter(|r| r.size > 0.0).collect();
    let xs: Vec<f64> = positive.iter().map(|r| r.size).collect();
    let ys: Vec<f64> = positive.iter().map(|r| r.sup).collect();
    let (slope, residual) = fit_rate(&xs, &ys).unwrap_or((f64::NAN, f64::NAN));
    let rates: Vec<f64> = positive.iter().map(|r| r.growth_rate).collect();
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    let growth_rate_stable = rates.iter().all(|a| a.is_finite() && (a - mean).abs() <= 0.5 * mean.abs());
    let mut by_size = positive.clone();
    by_size.sort_by(|a, b| a.size.total_cmp(&b.size));
    let monotone = by_size.windows(2).all(|w| w[0].sup < w[1].sup);
    let pass = (slope - 2.0).abs() <= 0.2 && growth_rate_stable && monotone;
    Ok(StabilityReport { r, rows, slope, residual, growth_rate_stable, monotone, pass })
}
