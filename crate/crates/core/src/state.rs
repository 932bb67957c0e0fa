use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;

/// Surface deflection and velocity at one instant. The velocity has one
/// component per spatial dimension.
#[derive(Clone, Debug)]
pub struct WaveState {
    pub eta: Field,
    pub vel: Vec<Field>,
    pub time: f64,
}

impl WaveState {
    pub fn new(eta: Field, vel: Vec<Field>, time: f64) -> Result<Self> {
        let dim = eta.grid().dim();
        if vel.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "a {dim}D state needs {dim} velocity component(s), got {}",
                vel.len()
            )));
        }
        if vel.iter().any(|v| !v.same_grid(&eta)) {
            return Err(Error::GridMismatch);
        }
        if !time.is_finite() {
            return Err(Error::param("time", time, "must be finite"));
        }
        Ok(Self { eta, vel, time })
    }

    pub fn new_1d(eta: Field, v: Field) -> Result<Self> {
        Self::new(eta, vec![v], 0.0)
    }

    pub fn new_2d(eta: Field, v1: Field, v2: Field) -> Result<Self> {
        Self::new(eta, vec![v1, v2], 0.0)
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let vel = (0..grid.dim()).map(|_| Field::zeros(grid.clone())).collect();
        Self {
            eta: Field::zeros(grid),
            vel,
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.eta.grid()
    }

    pub fn dim(&self) -> usize {
        self.vel.len()
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn same_grid(&self, other: &WaveState) -> bool {
        self.eta.same_grid(&other.eta) && self.dim() == other.dim()
    }

    /// `self + a * other`, keeping the time of `self`.
    pub fn axpy(&self, a: f64, other: &WaveState) -> Result<WaveState> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let eta = self.eta.axpy(a, &other.eta)?;
        let vel = self
            .vel
            .iter()
            .zip(&other.vel)
            .map(|(x, y)| x.axpy(a, y))
            .collect::<Result<Vec<_>>>()?;
        Ok(WaveState {
            eta,
            vel,
            time: self.time,
        })
    }

    pub fn difference(&self, other: &WaveState) -> Result<WaveState> {
        self.axpy(-1.0, other)
    }

    pub fn scaled(&self, a: f64) -> WaveState {
        WaveState {
            eta: self.eta.scaled(a),
            vel: self.vel.iter().map(|v| v.scaled(a)).collect(),
            time: self.time,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.eta.values().iter().chain(self.vel.iter().flat_map(|v| v.values())).all(|&x| x == 0.0)
    }

    /// Largest pointwise velocity magnitude.
    pub fn linf_velocity(&self) -> f64 {
        let n = self.grid().len();
        (0..n)
            .map(|i| {
                self.vel
                    .iter()
                    .map(|v| v.values()[i] * v.values()[i])
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `||curl v|| / || |D| v ||` in 2D (0 in 1D and for a constant velocity).
    /// Per mode `|xi x v|^2 + |xi . v|^2 = |xi|^2 |v|^2`, so the ratio lies in [0, 1].
    pub fn curl_residue(&self) -> f64 {
        if self.dim() < 2 {
            return 0.0;
        }
        let grid = self.grid();
        let (c1, c2) = (self.vel[0].coefficients(), self.vel[1].coefficients());
        let mut curl = 0.0;
        let mut grad = 0.0;
        for idx in 0..grid.len() {
            if grid.is_nyquist(idx) {
                continue;
            }
            let xi = grid.wavevector(idx);
            curl += (xi[0] * c2[idx] - xi[1] * c1[idx]).norm_sqr();
            grad += (xi[0] * xi[0] + xi[1] * xi[1]) * (c1[idx].norm_sqr() + c2[idx].norm_sqr());
        }
        if grad == 0.0 {
            0.0
        } else {
            (curl / grad).sqrt()
        }
    }
}

/// Physical and regularisation parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Surface tension.
    pub kappa: f64,
    /// Viscosity of the parabolic regularisation; 0 disables it.
    #[serde(default)]
    pub mu: f64,
    /// Power of `|D|` in the regularisation.
    #[serde(default = "default_p")]
    pub p: f64,
    /// Regularity index of the energy space.
    #[serde(default = "default_s")]
    pub s: f64,
}

fn default_p() -> f64 {
    1.0
}

fn default_s() -> f64 {
    0.5
}

impl Default for Params {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            mu: 0.0,
            p: 1.0,
            s: 0.5,
        }
    }
}

impl Params {
    pub fn new(kappa: f64, mu: f64, p: f64, s: f64) -> Result<Self> {
        let params = Self { kappa, mu, p, s };
        params.validate()?;
        Ok(params)
    }

    pub fn with_kappa(kappa: f64) -> Self {
        Self {
            kappa,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(Error::param("kappa", self.kappa, "must be finite and >= 0"));
        }
        if !(self.mu >= 0.0 && self.mu < 1.0) {
            return Err(Error::param("mu", self.mu, "must lie in [0, 1)"));
        }
        if !(self.p > 0.5 && self.p <= 1.0) {
            return Err(Error::param("p", self.p, "must lie in (1/2, 1]"));
        }
        if !(self.s.is_finite() && self.s >= 0.5) {
            return Err(Error::param("s", self.s, "must be finite and >= 1/2"));
        }
        Ok(())
    }

    pub fn regularized(&self) -> bool {
        self.mu > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn params_ranges() {
        assert!(Params::new(1.0, 0.0, 1.0, 0.5).is_ok());
        assert!(matches!(
            Params::new(1.0, 1.5, 1.0, 0.5),
            Err(Error::InvalidParameter { name: "mu", .. })
        ));
        assert!(Params::new(-1.0, 0.0, 1.0, 0.5).is_err());
        assert!(Params::new(1.0, 0.1, 0.5, 0.5).is_err());
        assert!(Params::new(1.0, 0.1, 1.0, 0.4).is_err());
    }

    #[test]
    fn component_count_matches_dimension() {
        let g = Grid::new_2d(8, 2.0 * PI).unwrap();
        let f = Field::zeros(g);
        assert!(WaveState::new(f.clone(), vec![f.clone()], 0.0).is_err());
        assert!(WaveState::new_2d(f.clone(), f.clone(), f).is_ok());
    }

    #[test]
    fn gradient_is_curl_free_and_rotated_gradient_is_not() {
        let g = Grid::new_2d(16, 2.0 * PI).unwrap();
        let eta = Field::zeros(g.clone());
        // v = grad(cos x cos y)
        let v1 = Field::from_fn(g.clone(), |x| -x[0].sin() * x[1].cos()).unwrap();
        let v2 = Field::from_fn(g.clone(), |x| -x[0].cos() * x[1].sin()).unwrap();
        let s = WaveState::new_2d(eta.clone(), v1.clone(), v2.clone()).unwrap();
        assert!(s.curl_residue() < 1e-14);
        let r = WaveState::new_2d(eta, v2.scaled(-1.0), v1).unwrap();
        assert!((r.curl_residue() - 1.0).abs() < 1e-12);
    }
}
