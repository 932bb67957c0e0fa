//! Sobolev norms computed from spectral coefficients.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::state::WaveState;
use crate::symbol::k_value;

/// Relative size of the mean coefficient below which a field counts as mean free.
const MEAN_TOLERANCE: f64 = 1e-12;

/// `||f||_{H^s}` (or `||f||_{\dot H^s}` when `homogeneous`).
pub fn sobolev_norm(f: &Field, s: f64, homogeneous: bool) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::param("s", s, "order must be finite"));
    }
    let grid = f.grid();
    let c = f.coefficients();
    if homogeneous && s < 0.0 {
        let total = f.l2_norm();
        if c[0].norm() > MEAN_TOLERANCE * total.max(f64::MIN_POSITIVE) {
            return Err(Error::NonzeroMean { mean: c[0].norm() });
        }
    }
    Ok(sobolev_norm_sq_coeffs(grid, c, s, homogeneous).sqrt())
}

pub(crate) fn sobolev_norm_sq_coeffs(grid: &Grid, c: &[Complex64], s: f64, homogeneous: bool) -> f64 {
    let r = grid.abs_wavenumbers();
    c.iter()
        .zip(r)
        .map(|(c, &r)| {
            let w = if homogeneous {
                if r == 0.0 {
                    if s == 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    r.powf(2.0 * s)
                }
            } else {
                (1.0 + r * r).powf(s)
            };
            w * c.norm_sqr()
        })
        .sum()
}

/// Squared energy norm `kappa ||grad eta||^2 + ||eta||^2 + ||K^-1 v||^2`, all
/// measured in `H^{s-1/2}`, from coefficient arrays.
pub(crate) fn weighted_norm_sq_coeffs(
    grid: &Grid,
    eta: &[Complex64],
    vel: &[&[Complex64]],
    s: f64,
    kappa: f64,
) -> f64 {
    let r = grid.abs_wavenumbers();
    // <xi>^{2s-1} = (1 + xi^2)^{s-1/2}
    let order = s - 0.5;
    (0..grid.len())
        .map(|i| {
            let r2 = r[i] * r[i];
            let bessel = if order == 0.0 { 1.0 } else { (1.0 + r2).powf(order) };
            let kinv2 = 1.0 / (k_value(r[i]) * k_value(r[i]));
            let v2: f64 = vel.iter().map(|v| v[i].norm_sqr()).sum();
            bessel * ((1.0 + kappa * r2) * eta[i].norm_sqr() + kinv2 * v2)
        })
        .sum()
}

/// Energy-space norm `||eta, v||` of `H_kappa^{s+1/2} x H^s`.
pub fn weighted_pair_norm(state: &WaveState, s: f64, kappa: f64) -> Result<f64> {
    if !(s >= 0.5 && s.is_finite()) {
        return Err(Error::param("s", s, "must be finite and >= 1/2"));
    }
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::param("kappa", kappa, "must be finite and >= 0"));
    }
    let vel: Vec<&[Complex64]> = state.vel.iter().map(|v| v.coefficients()).collect();
    Ok(weighted_norm_sq_coeffs(state.grid(), state.eta.coefficients(), &vel, s, kappa).sqrt())
}

/// `L^p` norm by grid quadrature (`p = inf` gives the max norm).
pub fn lp_norm(f: &Field, p: f64) -> f64 {
    lp_norm_values(f.grid(), f.values(), p)
}

pub(crate) fn lp_norm_values(grid: &Grid, values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let sum: f64 = values.iter().map(|v| v.abs().powf(p)).sum();
    (grid.cell_volume() * sum).powf(1.0 / p)
}
