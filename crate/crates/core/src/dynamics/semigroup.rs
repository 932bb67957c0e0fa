use crate::error::{Error, Result};
use crate::state::WaveState;

use super::{Coeffs, Model, SystemSpec};

/// Exact solution operator of the linear part of a system over time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemigroupOperator {
    pub spec: SystemSpec,
    pub t: f64,
}

impl SemigroupOperator {
    pub fn new(spec: SystemSpec, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::param("t", t, "must be finite"));
        }
        if spec.regularized && t < 0.0 {
            return Err(Error::param("t", t, "the regularized semigroup is only defined for t >= 0"));
        }
        Ok(Self { spec, t })
    }
}

/// `S(t) u`. In 2D the input velocity must be curl free; its mean is carried
/// unchanged (it does not couple to `eta`).
pub fn semigroup_apply(op: &SemigroupOperator, state: &WaveState) -> Result<WaveState> {
    op.spec.check_state(state)?;
    let model = Model::new(state.grid(), &op.spec, true);
    let out = model.apply(&model.propagator(op.t), &Coeffs::from_state(state));
    out.to_state(state.grid(), state.time + op.t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::linear_rhs;
    use crate::field::Field;
    use crate::functionals::weighted_norm;
    use crate::grid::Grid;
    use crate::state::Params;
    use crate::symbol::k_kappa_value;
    use std::f64::consts::PI;

    fn state_1d(n: usize) -> WaveState {
        let g = Grid::new_1d(n, 2.0 * PI).unwrap();
        let eta = Field::from_fn(g.clone(), |x| 0.3 * x[0].cos() + 0.1 * (3.0 * x[0]).sin() + 0.05).unwrap();
        let v = Field::from_fn(g, |x| 0.2 * (2.0 * x[0]).cos() - 0.1 * x[0].sin() + 0.02).unwrap();
        WaveState::new_1d(eta, v).unwrap()
    }

    fn close(a: &WaveState, b: &WaveState) -> f64 {
        let d = a.difference(b).unwrap();
        d.eta.linf() + d.vel.iter().map(|v| v.linf()).sum::<f64>()
    }

    #[test]
    fn identity_at_zero() {
        let u = state_1d(32);
        let spec = SystemSpec::wb1d(Params::with_kappa(1.0)).unwrap();
        let out = semigroup_apply(&SemigroupOperator::new(spec, 0.0).unwrap(), &u).unwrap();
        assert!(close(&out, &u) < 1e-15);
    }

    #[test]
    fn group_law() {
        let u = state_1d(32);
        for mu in [0.0, 0.2] {
            let spec = SystemSpec::wb1d(Params::new(0.7, mu, 1.0, 0.5).unwrap()).unwrap();
            let s = |t| SemigroupOperator::new(spec, t).unwrap();
            let two = semigroup_apply(&s(0.4), &semigroup_apply(&s(0.9), &u).unwrap()).unwrap();
            let one = semigroup_apply(&s(1.3), &u).unwrap();
            assert!(close(&two, &one) < 1e-13);
        }
    }

    #[test]
    fn single_mode_rotation() {
        // eta = cos x, v = 0: eta(t) = cos(wt) cos x and v(t) = K sin(wt) sin x
        // with w = K = K_kappa(1).
        let g = Grid::new_1d(16, 2.0 * PI).unwrap();
        let eta = Field::from_fn(g.clone(), |x| x[0].cos()).unwrap();
        let u = WaveState::new_1d(eta, Field::zeros(g.clone())).unwrap();
        let kappa = 1.0;
        let spec = SystemSpec::wb1d(Params::with_kappa(kappa)).unwrap();
        let t = 0.8;
        let out = semigroup_apply(&SemigroupOperator::new(spec, t).unwrap(), &u).unwrap();
        let k = k_kappa_value(kappa, 1.0);
        let e = Field::from_fn(g.clone(), |x| (k * t).cos() * x[0].cos()).unwrap();
        let v = Field::from_fn(g, |x| k * (k * t).sin() * x[0].sin()).unwrap();
        assert!(out.eta.sub(&e).unwrap().linf() < 1e-15);
        assert!(out.vel[0].sub(&v).unwrap().linf() < 1e-15);
        let q = |s: &WaveState| weighted_norm(s, 0.5, kappa);
        assert!((q(&out) - q(&u)).abs() < 1e-14);
    }

    #[test]
    fn derivative_matches_linear_part() {
        let u = state_1d(32);
        let h = 1e-4;
        for mu in [0.0, 0.3] {
            let spec = SystemSpec::wb1d(Params::new(1.0, mu, 1.0, 0.5).unwrap()).unwrap();
            let t0 = 0.5;
            let at = |t: f64| semigroup_apply(&SemigroupOperator::new(spec, t).unwrap(), &u).unwrap();
            let fd = at(t0 + h).difference(&at(t0 - h)).unwrap().scaled(0.5 / h);
            let lin = linear_rhs(&at(t0), &spec).unwrap();
            let d = fd.difference(&lin).unwrap();
            assert!(d.eta.linf() + d.vel[0].linf() < 1e-6);
        }
    }

    #[test]
    fn quadratic_energy_is_preserved_and_heat_decays() {
        let u = state_1d(64);
        let spec = SystemSpec::wb1d(Params::with_kappa(0.5)).unwrap();
        let out = semigroup_apply(&SemigroupOperator::new(spec, 3.7).unwrap(), &u).unwrap();
        let q = |s: &WaveState| weighted_norm(s, 0.5, 0.5);
        assert!((q(&out) - q(&u)).abs() < 1e-10 * q(&u));

        let g = Grid::new_1d(64, 2.0 * PI).unwrap();
        let eta = Field::from_fn(g.clone(), |x| x[0].sin() + 0.5 * (4.0 * x[0]).cos()).unwrap();
        let mean_free = WaveState::new_1d(eta, Field::zeros(g)).unwrap();
        let spec = SystemSpec::wb1d(Params::new(1.0, 0.2, 1.0, 0.5).unwrap()).unwrap();
        let mut prev = f64::INFINITY;
        for t in [0.0, 0.5, 1.0, 2.0] {
            let s = semigroup_apply(&SemigroupOperator::new(spec, t).unwrap(), &mean_free).unwrap();
            let norm = weighted_norm(&s, 0.5, 1.0);
            assert!(norm < prev);
            prev = norm;
        }
    }

    #[test]
    fn two_d_plane_wave_matches_one_d() {
        // a plane wave along x1 evolves like the 1D system
        let kappa = 0.8;
        let g2 = Grid::new_2d(16, 2.0 * PI).unwrap();
        let g1 = Grid::new_1d(16, 2.0 * PI).unwrap();
        let e2 = Field::from_fn(g2.clone(), |x| (2.0 * x[0]).cos()).unwrap();
        let v2 = Field::from_fn(g2.clone(), |x| 0.5 * x[0].sin()).unwrap();
        let u2 = WaveState::new_2d(e2, v2, Field::zeros(g2)).unwrap();
        let e1 = Field::from_fn(g1.clone(), |x| (2.0 * x[0]).cos()).unwrap();
        let v1 = Field::from_fn(g1, |x| 0.5 * x[0].sin()).unwrap();
        let u1 = WaveState::new_1d(e1, v1).unwrap();
        let p = Params::with_kappa(kappa);
        let o2 = semigroup_apply(&SemigroupOperator::new(SystemSpec::wb2d(p).unwrap(), 1.1).unwrap(), &u2).unwrap();
        let o1 = semigroup_apply(&SemigroupOperator::new(SystemSpec::wb1d(p).unwrap(), 1.1).unwrap(), &u1).unwrap();
        // row-major with x1 slowest: the x1 line at x2 = 0 is every 16th sample
        for i in 0..16 {
            assert!((o2.eta.values()[16 * i] - o1.eta.values()[i]).abs() < 1e-14);
            assert!((o2.vel[0].values()[16 * i] - o1.vel[0].values()[i]).abs() < 1e-14);
        }
        assert!(o2.vel[1].linf() < 1e-15);
    }
}
