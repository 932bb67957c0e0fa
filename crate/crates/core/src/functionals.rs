//! Conserved and monitored quantities.
//!
//! Quadratic terms are evaluated as exact coefficient sums. Cubic terms are
//! integrals of products of trigonometric interpolants, evaluated exactly by
//! `product_integral`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::norms::{sobolev_norm_sq_coeffs, weighted_norm_sq_coeffs};
use crate::ops::product_integral;
use crate::state::{Params, WaveState};
use crate::symbol::d_over_tanh_value;

/// Default smallness level of the invariant-region experiments.
pub const DEFAULT_EPSILON: f64 = 0.05;
/// Default dissipation threshold of the regularized runs.
pub const DEFAULT_DELTA: f64 = 0.05;

fn bessel_scaled(grid: &Grid, c: &[Complex64], order: f64) -> Vec<Complex64> {
    if order == 0.0 {
        return c.to_vec();
    }
    c.iter()
        .zip(grid.abs_wavenumbers())
        .map(|(&c, &r)| c * (1.0 + r * r).powf(order / 2.0))
        .collect()
}

/// `sum_j int eta (J^order v_j)^2`.
fn cubic_modifier(grid: &Grid, eta: &[Complex64], vel: &[&[Complex64]], order: f64) -> f64 {
    vel.iter()
        .map(|v| {
            let jv = bessel_scaled(grid, v, order);
            product_integral(grid, &[eta, &jv, &jv])
        })
        .sum()
}

fn vel_coeffs(state: &WaveState) -> Vec<&[Complex64]> {
    state.vel.iter().map(|v| v.coefficients()).collect()
}

/// The Hamiltonian `1/2 int (eta^2 + kappa |grad eta|^2 + |K^-1 v|^2 + eta |v|^2)`.
/// In one dimension `|K^-1 v|^2` integrates to `v (D / tanh D) v`.
pub fn hamiltonian(state: &WaveState, params: &Params) -> f64 {
    let grid = state.grid();
    let eta = state.eta.coefficients();
    let vel = vel_coeffs(state);
    0.5 * (weighted_norm_sq_coeffs(grid, eta, &vel, 0.5, params.kappa) + cubic_modifier(grid, eta, &vel, 0.0))
}

/// `int eta (D / tanh D) v`, defined for one-dimensional states only.
pub fn momentum(state: &WaveState) -> Result<f64> {
    if state.dim() != 1 {
        return Err(Error::Unsupported("momentum is defined for 1D states only".into()));
    }
    let grid = state.grid();
    let (eta, v) = (state.eta.coefficients(), state.vel[0].coefficients());
    Ok(eta
        .iter()
        .zip(v)
        .zip(grid.abs_wavenumbers())
        .map(|((e, v), &r)| d_over_tanh_value(r) * (e.conj() * v).re)
        .sum())
}

/// `E^s = 1/2 ||eta, v||^2 + 1/2 int eta (J^{s-1/2} v)^2`, using `params.s`.
pub fn modified_energy(state: &WaveState, params: &Params) -> Result<f64> {
    params.validate()?;
    let grid = state.grid();
    let eta = state.eta.coefficients();
    let vel = vel_coeffs(state);
    let s = params.s;
    Ok(0.5 * weighted_norm_sq_coeffs(grid, eta, &vel, s, params.kappa)
        + 0.5 * cubic_modifier(grid, eta, &vel, s - 0.5))
}

/// Energy of the difference `theta = eta1 - eta2`, `w = v1 - v2`:
/// `kappa/2 ||theta||^2_{H^{r+1/2}} + 1/2 ||w||^2_{H^r} + 1/2 int eta1 (J^{r-1/2} w)^2`.
pub fn difference_energy(state1: &WaveState, state2: &WaveState, r: f64, params: &Params) -> Result<f64> {
    params.validate()?;
    if !(r > 0.0 && r <= params.s - 0.5 + 1e-14) {
        return Err(Error::param("r", r, "must lie in (0, s - 1/2]"));
    }
    if !state1.same_grid(state2) {
        return Err(Error::GridMismatch);
    }
    let diff = state1.difference(state2)?;
    let grid = state1.grid();
    let theta = diff.eta.coefficients();
    let w = vel_coeffs(&diff);
    let quad_theta = params.kappa * sobolev_norm_sq_coeffs(grid, theta, r + 0.5, false);
    let quad_w: f64 = w.iter().map(|w| sobolev_norm_sq_coeffs(grid, w, r, false)).sum();
    let cubic = cubic_modifier(grid, state1.eta.coefficients(), &w, r - 0.5);
    Ok(0.5 * (quad_theta + quad_w + cubic))
}

/// `E^s / (1/2 ||eta, v||^2)`.
pub fn coercivity_ratio(state: &WaveState, params: &Params) -> Result<f64> {
    params.validate()?;
    let vel = vel_coeffs(state);
    let norm_sq = weighted_norm_sq_coeffs(state.grid(), state.eta.coefficients(), &vel, params.s, params.kappa);
    if norm_sq == 0.0 {
        return Err(Error::param("state", 0.0, "coercivity ratio is undefined for the zero state"));
    }
    Ok(modified_energy(state, params)? / (0.5 * norm_sq))
}

/// The smallness level for invariant-region runs: the override if given,
/// otherwise [`DEFAULT_EPSILON`].
pub fn smallness_threshold(override_epsilon: Option<f64>) -> Result<f64> {
    match override_epsilon {
        None => Ok(DEFAULT_EPSILON),
        Some(e) if e > 0.0 && e.is_finite() => Ok(e),
        Some(e) => Err(Error::param("epsilon", e, "must be positive and finite")),
    }
}

/// Bounds `h - 1 <= eta <= upper`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoncavitationBounds {
    pub h: f64,
    pub upper: f64,
}

impl NoncavitationBounds {
    pub fn new(h: f64, upper: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::param("h", h, "must lie in (0, 1]"));
        }
        if !(upper > 0.0 && upper.is_finite()) {
            return Err(Error::param("upper", upper, "must be positive and finite"));
        }
        Ok(Self { h, upper })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoncavitationCheck {
    pub pass: bool,
    pub eta_min: f64,
    pub eta_max: f64,
    /// Grid coordinates of the minimum and maximum of eta.
    pub argmin: Vec<f64>,
    pub argmax: Vec<f64>,
}

pub fn check_noncavitation(state: &WaveState, bounds: &NoncavitationBounds) -> NoncavitationCheck {
    let values = state.eta.values();
    let (mut imin, mut imax) = (0, 0);
    for (i, &v) in values.iter().enumerate() {
        if v < values[imin] {
            imin = i;
        }
        if v > values[imax] {
            imax = i;
        }
    }
    let grid = state.grid();
    let point = |idx: usize| -> Vec<f64> {
        let shape = grid.shape();
        let mut rem = idx;
        let mut x = vec![0.0; shape.len()];
        for axis in (0..shape.len()).rev() {
            let i = rem % shape[axis];
            rem /= shape[axis];
            x[axis] = grid.lengths()[axis] * i as f64 / shape[axis] as f64;
        }
        x
    };
    let (eta_min, eta_max) = (values[imin], values[imax]);
    NoncavitationCheck {
        pass: eta_min >= bounds.h - 1.0 && eta_max <= bounds.upper,
        eta_min,
        eta_max,
        argmin: point(imin),
        argmax: point(imax),
    }
}

/// All monitored quantities at one time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub time: f64,
    pub hamiltonian: f64,
    /// NaN for 2D states.
    pub momentum: f64,
    pub modified_energy: f64,
    pub weighted_norm: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub linf_v: f64,
}

pub const CSV_HEADER: &str = "time,hamiltonian,momentum,modified_energy,weighted_norm,eta_min,eta_max,linf_v";

impl EnergyReport {
    pub fn new(state: &WaveState, params: &Params) -> Result<Self> {
        let vel = vel_coeffs(state);
        let norm_sq = weighted_norm_sq_coeffs(state.grid(), state.eta.coefficients(), &vel, params.s, params.kappa);
        Ok(Self {
            time: state.time,
            hamiltonian: hamiltonian(state, params),
            momentum: momentum(state).unwrap_or(f64::NAN),
            modified_energy: modified_energy(state, params)?,
            weighted_norm: norm_sq.sqrt(),
            eta_min: state.eta.min(),
            eta_max: state.eta.max(),
            linf_v: state.linf_velocity(),
        })
    }

    /// One CSV row with 17 significant digits per value.
    pub fn csv_row(&self) -> String {
        [
            self.time,
            self.hamiltonian,
            self.momentum,
            self.modified_energy,
            self.weighted_norm,
            self.eta_min,
            self.eta_max,
            self.linf_v,
        ]
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
    }
}

/// Squared weighted norm of a state, exposed for the experiments.
pub fn weighted_norm(state: &WaveState, s: f64, kappa: f64) -> f64 {
    let vel = vel_coeffs(state);
    weighted_norm_sq_coeffs(state.grid(), state.eta.coefficients(), &vel, s, kappa).sqrt()
}

/// The Hamiltonian's quadratic part.
#[cfg(test)]
fn quadratic_hamiltonian(state: &WaveState, params: &Params) -> f64 {
    0.5 * weighted_norm(state, 0.5, params.kappa).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::symbol::{apply_multiplier, Symbol};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn g1(n: usize) -> Arc<Grid> {
        Grid::new_1d(n, 2.0 * PI).unwrap()
    }

    fn st(g: &Arc<Grid>, e: impl Fn(f64) -> f64, v: impl Fn(f64) -> f64) -> WaveState {
        WaveState::new_1d(
            Field::from_fn(g.clone(), |x| e(x[0])).unwrap(),
            Field::from_fn(g.clone(), |x| v(x[0])).unwrap(),
        )
        .unwrap()
    }

    const COTH1: f64 = 1.313_035_285_499_331_3;

    #[test]
    fn hamiltonian_examples() {
        let g = g1(16);
        let p = Params::with_kappa(1.0);
        assert!((hamiltonian(&st(&g, f64::cos, |_| 0.0), &p) - PI).abs() < 1e-13);
        for kappa in [0.0, 0.3, 2.0] {
            let h = hamiltonian(&st(&g, |_| 0.0, f64::cos), &Params::with_kappa(kappa));
            assert!((h - PI / 2.0 * COTH1).abs() < 1e-13);
        }
        assert!((PI / 2.0 * COTH1 - 2.062_511_003_414_438).abs() < 1e-14);
        assert_eq!(hamiltonian(&WaveState::zeros(g), &p), 0.0);
    }

    #[test]
    fn momentum_examples() {
        let g = g1(16);
        let m = momentum(&st(&g, f64::cos, f64::cos)).unwrap();
        assert!((m - PI * COTH1).abs() < 1e-13);
        assert_eq!(momentum(&st(&g, f64::cos, |_| 0.0)).unwrap(), 0.0);
        assert!(momentum(&st(&g, f64::cos, |x| (2.0 * x).cos())).unwrap().abs() < 1e-14);
        let g2 = Grid::new_2d(8, 2.0 * PI).unwrap();
        assert!(matches!(momentum(&WaveState::zeros(g2)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn modified_energy_at_half_is_hamiltonian() {
        let g = g1(32);
        let s = st(&g, |x| 0.3 * x.sin() + 0.1 * (3.0 * x).cos(), |x| 0.2 * (2.0 * x).cos() - 0.05);
        let p = Params::new(0.7, 0.0, 1.0, 0.5).unwrap();
        let (h, e) = (hamiltonian(&s, &p), modified_energy(&s, &p).unwrap());
        assert!((h - e).abs() <= 1e-14 * h.abs());
        assert!((quadratic_hamiltonian(&s, &p) + 0.5 * cubic_modifier(&g, s.eta.coefficients(), &vel_coeffs(&s), 0.0) - h).abs() < 1e-15);
    }

    #[test]
    fn modified_energy_matches_dense_quadrature() {
        // eta = v = cos x, s = 3/2, kappa = 1. J^1 cos = sqrt2 cos.
        let g = g1(16);
        let s = st(&g, f64::cos, f64::cos);
        let p = Params::new(1.0, 0.0, 1.0, 1.5).unwrap();
        let e = modified_energy(&s, &p).unwrap();
        let fine = g1(64);
        let dense = st(&fine, f64::cos, f64::cos);
        let jv = apply_multiplier(&Symbol::bessel(1.0), &dense.vel[0]).unwrap();
        let cubic: Vec<f64> = (0..64).map(|i| dense.eta.values()[i] * jv.values()[i].powi(2)).collect();
        // weighted norm: <1>^2 * ((1 + 1)|eta|^2 + coth(1)|v|^2) * pi
        let quad = 2.0 * (2.0 + COTH1) * PI;
        let oracle = 0.5 * quad + 0.5 * fine.integrate(&cubic);
        assert!((e - oracle).abs() < 1e-12 * oracle, "{e} {oracle}");
        let zero_eta = st(&g, |_| 0.0, f64::cos);
        let e0 = modified_energy(&zero_eta, &p).unwrap();
        assert!((e0 - 0.5 * weighted_norm(&zero_eta, 1.5, 1.0).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn difference_energy_cases() {
        let g = g1(32);
        let p = Params::new(0.5, 0.0, 1.0, 1.5).unwrap();
        let a = st(&g, |x| 0.2 * x.cos(), |x| 0.1 * (2.0 * x).sin());
        assert_eq!(difference_energy(&a, &a, 1.0, &p).unwrap(), 0.0);
        let z = WaveState::zeros(g.clone());
        let r = 0.75;
        let direct = 0.5 * p.kappa * sobolev_norm_sq_coeffs(&g, a.eta.coefficients(), r + 0.5, false)
            + 0.5 * sobolev_norm_sq_coeffs(&g, a.vel[0].coefficients(), r, false)
            + 0.5 * cubic_modifier(&g, a.eta.coefficients(), &vel_coeffs(&a), r - 0.5);
        assert!((difference_energy(&a, &z, r, &p).unwrap() - direct).abs() < 1e-15);
        assert!(difference_energy(&a, &z, 1.2, &p).is_err());
        assert!(difference_energy(&a, &z, 0.0, &p).is_err());
        let other = WaveState::zeros(g1(16));
        assert!(matches!(difference_energy(&a, &other, 0.5, &p), Err(Error::GridMismatch)));
    }

    #[test]
    fn difference_energy_dense_oracle() {
        let g = g1(32);
        let p = Params::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let a = st(&g, |x| 0.3 * x.cos(), |x| 0.2 * x.sin());
        let b = st(&g, |x| 0.3 * x.cos() + 0.01 * (2.0 * x).sin(), |x| 0.2 * x.sin() - 0.02 * (3.0 * x).cos());
        let r = 0.5;
        let fine = g1(128);
        let theta = Field::from_fn(fine.clone(), |x| -0.01 * (2.0 * x[0]).sin()).unwrap();
        let w = Field::from_fn(fine.clone(), |x| 0.02 * (3.0 * x[0]).cos()).unwrap();
        let eta1 = Field::from_fn(fine.clone(), |x| 0.3 * x[0].cos()).unwrap();
        let jt = apply_multiplier(&Symbol::bessel(r + 0.5), &theta).unwrap();
        let jw = apply_multiplier(&Symbol::bessel(r), &w).unwrap();
        let sq = |f: &Field| fine.integrate(&f.values().iter().map(|v| v * v).collect::<Vec<_>>());
        let cubic = fine.integrate(&(0..128).map(|i| eta1.values()[i] * w.values()[i].powi(2)).collect::<Vec<_>>());
        let oracle = 0.5 * sq(&jt) + 0.5 * sq(&jw) + 0.5 * cubic;
        let e = difference_energy(&a, &b, r, &p).unwrap();
        assert!((e - oracle).abs() < 1e-12 * oracle, "{e} {oracle}");
    }

    #[test]
    fn noncavitation_cases() {
        let g = g1(64);
        let b = NoncavitationBounds::new(0.5, 1.0).unwrap();
        assert!(check_noncavitation(&WaveState::zeros(g.clone()), &b).pass);
        let dip = st(&g, |x| if (x - PI).abs() < 0.05 { -1.2 } else { 0.0 }, |_| 0.0);
        let c = check_noncavitation(&dip, &b);
        assert!(!c.pass);
        assert_eq!(c.eta_min, -1.2);
        assert!((c.argmin[0] - PI).abs() < 0.05);
        assert!(!check_noncavitation(&st(&g, f64::cos, |_| 0.0), &b).pass);
        assert!(NoncavitationBounds::new(1.5, 1.0).is_err());
    }

    #[test]
    fn smallness_threshold_cases() {
        assert_eq!(smallness_threshold(None).unwrap(), 0.05);
        assert_eq!(smallness_threshold(Some(0.01)).unwrap(), 0.01);
        assert!(smallness_threshold(Some(-0.1)).is_err());
    }

    #[test]
    fn coercivity_cases() {
        let g = g1(32);
        let p = Params::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let v_only = st(&g, |_| 0.0, |x| 0.4 * x.sin());
        assert_eq!(coercivity_ratio(&v_only, &p).unwrap(), 1.0);
        let small = st(&g, |x| 0.01 * x.cos(), |x| 0.01 * (2.0 * x).sin());
        let r = coercivity_ratio(&small, &p).unwrap();
        assert!((0.9..=1.1).contains(&r));
        let deep = st(&g, |_| -1.0, |x| 3.0 * x.sin());
        assert!(coercivity_ratio(&deep, &p).unwrap() < 1.0);
        assert!(coercivity_ratio(&WaveState::zeros(g), &p).is_err());
    }

    #[test]
    fn report_row_has_eight_columns() {
        let g = g1(16);
        let r = EnergyReport::new(&st(&g, f64::cos, f64::cos), &Params::default()).unwrap();
        assert_eq!(r.csv_row().split(',').count(), 8);
        assert_eq!(CSV_HEADER.split(',').count(), 8);
        let g2 = Grid::new_2d(8, 2.0 * PI).unwrap();
        assert!(EnergyReport::new(&WaveState::zeros(g2), &Params::default()).unwrap().momentum.is_nan());
    }
}
