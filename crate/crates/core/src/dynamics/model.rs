//! Coefficient-space representation of the systems.
//!
//! Every mode is written in the variables `(eta, a, t)` where `a = e . v` is
//! the velocity along the unit vector `e` of `xi~` (the wavevector with odd
//! symbols zeroed on Nyquist slots) and `t = v - a e` is the remainder. With
//! `|xi~|` and `K_kappa = K_kappa(|xi|)` the linear part reads
//!
//! ```text
//! eta_t = -i |xi~| a            - gamma eta
//! a_t   = -i |xi~| K_kappa^2 eta - gamma a
//! t_t   =                        - gamma t
//! ```
//!
//! which covers the 1D system (`e = sgn xi~`) and the 2D system alike. The
//! nonlinear part is `-i g . (eta v)^` and `-i g (|v|^2/2)^` with
//! `g = K^2(|xi|) xi~`, which equals `tanh xi~` in one dimension.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::field::Field;
use crate::grid::Grid;
use crate::norms::weighted_norm_sq_coeffs;
use crate::state::WaveState;
use crate::symbol::{k_kappa_value, k_value};

use super::SystemSpec;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Coeffs {
    pub eta: Vec<Complex64>,
    pub vel: Vec<Vec<Complex64>>,
}

impl Coeffs {
    pub fn zeros(len: usize, dim: usize) -> Self {
        Self {
            eta: vec![ZERO; len],
            vel: vec![vec![ZERO; len]; dim],
        }
    }

    pub fn from_state(state: &WaveState) -> Self {
        Self {
            eta: state.eta.coefficients().to_vec(),
            vel: state.vel.iter().map(|v| v.coefficients().to_vec()).collect(),
        }
    }

    pub fn to_state(&self, grid: &Arc<Grid>, time: f64) -> Result<WaveState> {
        let eta = Field::from_coefficients(grid.clone(), self.eta.clone())?;
        let vel = self
            .vel
            .iter()
            .map(|v| Field::from_coefficients(grid.clone(), v.clone()))
            .collect::<Result<Vec<_>>>()?;
        WaveState::new(eta, vel, time)
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Coeffs) {
        fn go(x: &mut [Complex64], a: f64, y: &[Complex64]) {
            x.iter_mut().zip(y).for_each(|(x, y)| *x += a * y);
        }
        go(&mut self.eta, a, &other.eta);
        for (x, y) in self.vel.iter_mut().zip(&other.vel) {
            go(x, a, y);
        }
    }

    pub fn plus(&self, a: f64, other: &Coeffs) -> Coeffs {
        let mut out = self.clone();
        out.axpy(a, other);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.eta
            .iter()
            .chain(self.vel.iter().flatten())
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn weighted_norm(&self, grid: &Grid, s: f64, kappa: f64) -> f64 {
        let vel: Vec<&[Complex64]> = self.vel.iter().map(|v| v.as_slice()).collect();
        weighted_norm_sq_coeffs(grid, &self.eta, &vel, s, kappa).sqrt()
    }
}

/// Per-mode `[[c, -i s / K], [-i K s, c]]` on `(eta, a)` and `t` on the remainder.
#[derive(Clone, Debug)]
pub(crate) struct ModeMatrix {
    pub c: Vec<f64>,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
}

pub(crate) struct Model {
    pub grid: Arc<Grid>,
    pub dim: usize,
    pub kappa: f64,
    pub s_index: f64,
    /// `|xi~|`
    pub xi_t: Vec<f64>,
    /// unit vector of `xi~` (zero where `xi~ = 0`)
    pub dir: Vec<[f64; 2]>,
    /// `K_kappa(|xi|)`
    pub kk: Vec<f64>,
    /// `|xi~| K_kappa(|xi|)`
    pub omega: Vec<f64>,
    /// `kappa mu |xi|^p`, zero for unregularized systems
    pub gamma: Vec<f64>,
    /// `K^2(|xi|) xi~`
    pub g: Vec<[f64; 2]>,
    pub mask: Vec<bool>,
}

impl Model {
    pub fn new(grid: &Arc<Grid>, spec: &SystemSpec, dealias: bool) -> Self {
        let params = spec.params;
        let len = grid.len();
        let mut m = Model {
            grid: grid.clone(),
            dim: grid.dim(),
            kappa: params.kappa,
            s_index: params.s,
            xi_t: vec![0.0; len],
            dir: vec![[0.0; 2]; len],
            kk: vec![0.0; len],
            omega: vec![0.0; len],
            gamma: vec![0.0; len],
            g: vec![[0.0; 2]; len],
            mask: if dealias { grid.dealias_mask() } else { vec![true; len] },
        };
        let rate = if spec.regularized { params.kappa * params.mu } else { 0.0 };
        for idx in 0..len {
            let r = grid.abs_wavenumbers()[idx];
            let xi = if grid.is_nyquist(idx) { [0.0, 0.0] } else { grid.wavevector(idx) };
            let rt = xi[0].hypot(xi[1]);
            m.xi_t[idx] = rt;
            if rt > 0.0 {
                m.dir[idx] = [xi[0] / rt, xi[1] / rt];
            }
            m.kk[idx] = k_kappa_value(params.kappa, r);
            m.omega[idx] = rt * m.kk[idx];
            m.gamma[idx] = if rate == 0.0 || r == 0.0 { 0.0 } else { rate * r.powf(params.p) };
            let k2 = k_value(r).powi(2);
            m.g[idx] = [k2 * xi[0], k2 * xi[1]];
        }
        m
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn zeros(&self) -> Coeffs {
        Coeffs::zeros(self.len(), self.dim)
    }

    pub fn norm(&self, u: &Coeffs) -> f64 {
        u.weighted_norm(&self.grid, self.s_index, self.kappa)
    }

    fn along(&self, u: &Coeffs, idx: usize) -> Complex64 {
        let d = self.dir[idx];
        (0..self.dim).map(|j| d[j] * u.vel[j][idx]).sum()
    }

    /// Apply a per-mode matrix.
    pub fn apply(&self, m: &ModeMatrix, u: &Coeffs) -> Coeffs {
        let mut out = self.zeros();
        for idx in 0..self.len() {
            let (c, s, t, k) = (m.c[idx], m.s[idx], m.t[idx], self.kk[idx]);
            let eta = u.eta[idx];
            let a = self.along(u, idx);
            out.eta[idx] = c * eta - I * (s / k) * a;
            let a_new = -I * (k * s) * eta + c * a;
            let d = self.dir[idx];
            for j in 0..self.dim {
                let v = u.vel[j][idx];
                out.vel[j][idx] = d[j] * a_new + t * (v - d[j] * a);
            }
        }
        out
    }

    /// The exact linear flow over time `h`.
    pub fn propagator(&self, h: f64) -> ModeMatrix {
        let n = self.len();
        let mut m = ModeMatrix {
            c: vec![0.0; n],
            s: vec![0.0; n],
            t: vec![0.0; n],
        };
        for idx in 0..n {
            let damp = (-self.gamma[idx] * h).exp();
            let (sin, cos) = (self.omega[idx] * h).sin_cos();
            m.c[idx] = damp * cos;
            m.s[idx] = damp * sin;
            m.t[idx] = damp;
        }
        m
    }

    pub fn linear(&self, u: &Coeffs) -> Coeffs {
        let mut out = self.zeros();
        for idx in 0..self.len() {
            let (rt, k, gam) = (self.xi_t[idx], self.kk[idx], self.gamma[idx]);
            let eta = u.eta[idx];
            let a = self.along(u, idx);
            out.eta[idx] = -I * rt * a - gam * eta;
            let d = self.dir[idx];
            let push = -I * (rt * k * k) * eta;
            for j in 0..self.dim {
                out.vel[j][idx] = d[j] * push - gam * u.vel[j][idx];
            }
        }
        out
    }

    pub fn nonlinear(&self, u: &Coeffs) -> Coeffs {
        let grid = &self.grid;
        let keep = |c: &[Complex64]| -> Vec<f64> {
            let masked: Vec<Complex64> = c.iter().zip(&self.mask).map(|(&c, &m)| if m { c } else { ZERO }).collect();
            grid.inverse_real(&masked)
        };
        let eta = keep(&u.eta);
        let vel: Vec<Vec<f64>> = u.vel.iter().map(|v| keep(v)).collect();
        let project = |values: Vec<f64>| -> Vec<Complex64> {
            let mut c = grid.forward(&values);
            c.iter_mut().zip(&self.mask).for_each(|(c, &m)| {
                if !m {
                    *c = ZERO;
                }
            });
            c
        };
        let flux: Vec<Vec<Complex64>> = vel
            .iter()
            .map(|v| project(eta.iter().zip(v).map(|(e, v)| e * v).collect()))
            .collect();
        let kinetic = project(
            (0..self.len())
                .map(|i| 0.5 * vel.iter().map(|v| v[i] * v[i]).sum::<f64>())
                .collect(),
        );
        let mut out = self.zeros();
        for idx in 0..self.len() {
            let g = self.g[idx];
            let div: Complex64 = (0..self.dim).map(|j| g[j] * flux[j][idx]).sum();
            out.eta[idx] = -I * div;
            for j in 0..self.dim {
                out.vel[j][idx] = -I * g[j] * kinetic[idx];
            }
        }
        out
    }

    pub fn rhs(&self, u: &Coeffs) -> Coeffs {
        let mut out = self.linear(u);
        out.axpy(1.0, &self.nonlinear(u));
        out
    }
}
