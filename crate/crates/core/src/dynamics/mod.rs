//! Right-hand sides, the linear semigroup, time integrators and the
//! Duhamel/Picard solver.

mod energy_check;
mod evolve;
mod integrators;
mod model;
mod picard;
mod projection;
mod semigroup;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{Params, WaveState};

pub use energy_check::{energy_derivative_check, EnergyDerivativeReport};
pub use evolve::{evolve, evolve_with, Trajectory, DEFAULT_BLOW_UP_CEILING};
pub use integrators::{IntegratorConfig, Method};
pub use picard::{picard_solve, PicardSolution};
pub use projection::curl_free_project;
pub use semigroup::{semigroup_apply, SemigroupOperator};

pub(crate) use model::{Coeffs, Model};

/// Relative curl residue above which a 2D velocity is rejected.
pub const CURL_TOLERANCE: f64 = 1e-10;

/// Which system is integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Wb1d,
    Wb1dRegularized,
    Wb2d,
}

impl SystemKind {
    pub fn dim(self) -> usize {
        match self {
            SystemKind::Wb2d => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemSpec {
    pub dim: usize,
    pub params: Params,
    /// Adds `-kappa mu |D|^p` to both equations.
    pub regularized: bool,
}

impl SystemSpec {
    pub fn new(dim: usize, params: Params, regularized: bool) -> Result<Self> {
        params.validate()?;
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if regularized && params.mu <= 0.0 {
            return Err(Error::param("mu", params.mu, "a regularized system needs mu in (0, 1)"));
        }
        Ok(Self {
            dim,
            params,
            regularized,
        })
    }

    /// Regularized iff `params.mu > 0`.
    pub fn from_params(dim: usize, params: Params) -> Result<Self> {
        Self::new(dim, params, params.mu > 0.0)
    }

    pub fn wb1d(params: Params) -> Result<Self> {
        Self::from_params(1, params)
    }

    pub fn wb2d(params: Params) -> Result<Self> {
        Self::from_params(2, params)
    }

    pub fn kind(&self) -> SystemKind {
        match (self.dim, self.regularized) {
            (2, _) => SystemKind::Wb2d,
            (_, true) => SystemKind::Wb1dRegularized,
            _ => SystemKind::Wb1d,
        }
    }

    pub(crate) fn check_state(&self, state: &WaveState) -> Result<()> {
        if state.dim() != self.dim {
            return Err(Error::InvalidGrid(format!(
                "system is {}D but the state is {}D",
                self.dim,
                state.dim()
            )));
        }
        if self.dim == 2 {
            let residue = state.curl_residue();
            if residue > CURL_TOLERANCE {
                return Err(Error::NotCurlFree { residue });
            }
        }
        Ok(())
    }
}

/// Time derivative of `state` under `spec`, with two-thirds dealiasing.
pub fn rhs(state: &WaveState, spec: &SystemSpec) -> Result<WaveState> {
    spec.check_state(state)?;
    let model = Model::new(state.grid(), spec, true);
    model.rhs(&Coeffs::from_state(state)).to_state(state.grid(), state.time)
}

/// The linear part of [`rhs`].
pub fn linear_rhs(state: &WaveState, spec: &SystemSpec) -> Result<WaveState> {
    spec.check_state(state)?;
    let model = Model::new(state.grid(), spec, true);
    model.linear(&Coeffs::from_state(state)).to_state(state.grid(), state.time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::grid::Grid;
    use crate::state::Params;
    use std::f64::consts::PI;

    const TANH1: f64 = 0.761_594_155_955_764_9;

    #[test]
    fn zero_is_an_equilibrium() {
        for g in [Grid::new_1d(32, 2.0 * PI).unwrap(), Grid::new_2d(16, 2.0 * PI).unwrap()] {
            let spec = SystemSpec::from_params(g.dim(), Params::new(1.0, 0.1, 1.0, 0.5).unwrap()).unwrap();
            let d = rhs(&WaveState::zeros(g), &spec).unwrap();
            assert!(d.is_zero());
        }
    }

    #[test]
    fn single_mode_rhs() {
        // -i tanh D (1 + kappa D^2) cos x = (1 + kappa) tanh(1) sin x
        let g = Grid::new_1d(32, 2.0 * PI).unwrap();
        let eta = Field::from_fn(g.clone(), |x| x[0].cos()).unwrap();
        let st = WaveState::new_1d(eta, Field::zeros(g.clone())).unwrap();
        let spec = SystemSpec::wb1d(Params::with_kappa(1.0)).unwrap();
        let d = rhs(&st, &spec).unwrap();
        assert!(d.eta.linf() < 1e-15);
        let expected = Field::from_fn(g, |x| 2.0 * TANH1 * x[0].sin()).unwrap();
        let err = d.vel[0].sub(&expected).unwrap().linf();
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn nonlinear_terms_by_hand() {
        // eta = v = cos x, kappa = 0:
        // eta_t = -v_x - i tanh D (cos^2) = sin x + tanh(2)/2 sin 2x
        // v_t = -i tanh D cos x - i tanh D (cos^2 / 2) = tanh(1) sin x + tanh(2)/4 sin 2x
        let g = Grid::new_1d(32, 2.0 * PI).unwrap();
        let c = Field::from_fn(g.clone(), |x| x[0].cos()).unwrap();
        let st = WaveState::new_1d(c.clone(), c).unwrap();
        let d = rhs(&st, &SystemSpec::wb1d(Params::with_kappa(0.0)).unwrap()).unwrap();
        let t2 = 2f64.tanh();
        let e = Field::from_fn(g.clone(), |x| x[0].sin() + t2 / 2.0 * (2.0 * x[0]).sin()).unwrap();
        let v = Field::from_fn(g, |x| TANH1 * x[0].sin() + t2 / 4.0 * (2.0 * x[0]).sin()).unwrap();
        assert!(d.eta.sub(&e).unwrap().linf() < 1e-14);
        assert!(d.vel[0].sub(&v).unwrap().linf() < 1e-14);
    }

    #[test]
    fn linearization_limit() {
        let g = Grid::new_1d(32, 2.0 * PI).unwrap();
        let eta = Field::from_fn(g.clone(), |x| (x[0].sin()).exp() - 1.0).unwrap();
        let v = Field::from_fn(g, |x| (2.0 * x[0]).cos() * 0.5).unwrap();
        let u = WaveState::new_1d(eta, v).unwrap();
        let spec = SystemSpec::wb1d(Params::with_kappa(0.5)).unwrap();
        let lin = linear_rhs(&u, &spec).unwrap();
        let err = |a: f64| {
            let d = rhs(&u.scaled(a), &spec).unwrap().scaled(1.0 / a);
            let diff = d.difference(&lin).unwrap();
            diff.eta.l2_norm() + diff.vel[0].l2_norm()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        // first order in the amplitude
        assert!((e1 / e2 - 2.0).abs() < 1e-6, "{}", e1 / e2);
    }

    #[test]
    fn two_d_rhs_is_a_gradient() {
        let g = Grid::new_2d(32, 2.0 * PI).unwrap();
        let eta = Field::from_fn(g.clone(), |x| 0.2 * (x[0] + 2.0 * x[1]).cos()).unwrap();
        let v1 = Field::from_fn(g.clone(), |x| -0.3 * x[0].sin() * x[1].cos()).unwrap();
        let v2 = Field::from_fn(g, |x| -0.3 * x[0].cos() * x[1].sin()).unwrap();
        let st = WaveState::new_2d(eta, v1, v2).unwrap();
        let d = rhs(&st, &SystemSpec::wb2d(Params::with_kappa(1.0)).unwrap()).unwrap();
        assert!(d.curl_residue() < 1e-13);
        let bad = WaveState::new_2d(st.eta.clone(), st.vel[1].scaled(-1.0), st.vel[0].clone()).unwrap();
        assert!(matches!(rhs(&bad, &SystemSpec::wb2d(Params::default()).unwrap()), Err(Error::NotCurlFree { .. })));
    }

    #[test]
    fn spec_validation() {
        assert!(SystemSpec::new(1, Params::default(), true).is_err());
        assert!(SystemSpec::new(3, Params::default(), false).is_err());
        assert_eq!(SystemSpec::wb1d(Params::new(1.0, 0.1, 1.0, 0.5).unwrap()).unwrap().kind(), SystemKind::Wb1dRegularized);
    }
}
