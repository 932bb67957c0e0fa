//! Scripted studies: limits in `kappa` and `mu`, invariant regions,
//! dissipation, continuous dependence, existence-time heuristics and growth
//! envelopes.

mod existence;
mod limits;
mod regions;
mod stability;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

use crate::config::{ComparisonNorm, InitialData, RunConfig, SweepParam};
use crate::error::{Error, Result};
use crate::functionals::weighted_norm;
use crate::grid::Grid;
use crate::norms::sobolev_norm;
use crate::presets::Preset;
use crate::state::WaveState;

pub use existence::{existence_time_estimate, growth_bound_monitor, ExistenceConstants, ExistenceEstimate, GrowthReport};
pub use limits::{kappa_limit_study, mu_limit_study, MuLimitReport};
pub use regions::{
    dissipation_test, invariant_region_test, DissipationReport, DissipationRow, FamilyRun,
    InvariantRegionReport, RegionRow, RowStatus,
};
pub use stability::{stability_test, StabilityReport, StabilityRow};

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `ln error` against `ln value`.
    pub fitted_order: f64,
    /// Root mean square of the natural-log residuals of the fit.
    pub residual: f64,
    pub notes: Vec<String>,
}

/// Least-squares line through `(ln x, ln y)`: returns `(slope, rms residual)`.
pub fn fit_rate(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::HypothesisViolated("rate fit needs as many errors as values".into()));
    }
    if x.len() < 3 {
        return Err(Error::HypothesisViolated(format!("rate fit needs >= 3 points, got {}", x.len())));
    }
    if let Some(v) = x.iter().chain(y).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::HypothesisViolated(format!("rate fit needs positive finite data, got {v}")));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::HypothesisViolated("rate fit needs distinct values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    Ok((slope, (rss / n).sqrt()))
}

/// Distance between two states in the chosen norm.
pub fn comparison_distance(a: &WaveState, b: &WaveState, norm: ComparisonNorm) -> Result<f64> {
    let d = a.difference(b)?;
    Ok(match norm {
        ComparisonNorm::L2xH12 => weighted_norm(&d, 0.5, 0.0),
        ComparisonNorm::H1xH12 => weighted_norm(&d, 0.5, 1.0),
        ComparisonNorm::HsKappa { s, kappa } => weighted_norm(&d, s, kappa),
        ComparisonNorm::Sobolev { r } => {
            let e = sobolev_norm(&d.eta, r + 0.5, false)?;
            let v: f64 = d
                .vel
                .iter()
                .map(|v| sobolev_norm(v, r, false).map(|x| x * x))
                .sum::<Result<f64>>()?;
            (e * e + v).sqrt()
        }
    })
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub base: RunConfig,
    pub sweep_param: SweepParam,
    pub values: Vec<f64>,
    pub comparison_norm: ComparisonNorm,
}

impl SweepSpec {
    pub fn new(base: RunConfig, sweep_param: SweepParam, values: Vec<f64>, comparison_norm: ComparisonNorm) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::Config(format!("study.values: a sweep needs >= 3 values, got {}", values.len())));
        }
        let up = values.windows(2).all(|w| w[1] > w[0]);
        let down = values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::Config("study.values: must be strictly monotone".into()));
        }
        Ok(Self { base, sweep_param, values, comparison_norm })
    }

    /// Read the sweep from the `study` section of `cfg`.
    pub fn from_config(cfg: &RunConfig, default_param: SweepParam, default_norm: ComparisonNorm) -> Result<Self> {
        let study = cfg.study();
        Self::new(
            cfg.clone(),
            study.sweep_param.unwrap_or(default_param),
            study.values.clone(),
            study.comparison_norm.unwrap_or(default_norm),
        )
    }

    /// The base configuration with the swept parameter set to `value`.
    pub fn point_config(&self, value: f64) -> Result<RunConfig> {
        let mut cfg = self.base.clone();
        match self.sweep_param {
            SweepParam::Kappa => cfg.params.kappa = value,
            SweepParam::Mu => cfg.params.mu = value,
            SweepParam::Dt => cfg.integrator.dt = value,
            SweepParam::N => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(Error::param("n", value, "must be a positive integer"));
                }
                cfg.grid.n.iter_mut().for_each(|n| *n = value as usize);
            }
            SweepParam::Amplitude => match &mut cfg.initial_data {
                InitialData::Preset(
                    Preset::SingleMode { amplitude, .. }
                    | Preset::GaussianBump { amplitude, .. }
                    | Preset::RandomBandlimited { amplitude, .. },
                ) => *amplitude = value,
                InitialData::Snapshot(_) => {
                    return Err(Error::Config("amplitude sweeps need preset initial data".into()));
                }
            },
        }
        Ok(cfg)
    }
}

/// `count` random band-limited states, each rescaled so that its
/// `H_kappa^1 x H^{1/2}` norm is `epsilon / 2` times a uniform draw from
/// `[0.5, 1]`.
pub fn small_data_family(
    grid: &Arc<Grid>,
    count: usize,
    seed: u64,
    kappa: f64,
    epsilon: f64,
    band: u32,
) -> Result<Vec<WaveState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let raw = Preset::RandomBandlimited {
                seed: seed.wrapping_add(1 + i as u64),
                band,
                amplitude: 1.0,
            }
            .build(grid)?;
            let target = 0.5 * epsilon * rng.random_range(0.5..=1.0);
            let norm = weighted_norm(&raw, 0.5, kappa);
            Ok(raw.scaled(target / norm))
        })
        .collect()
}
