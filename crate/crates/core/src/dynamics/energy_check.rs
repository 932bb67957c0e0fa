use serde::Serialize;

use crate::error::Result;
use crate::functionals::{modified_energy, weighted_norm};
use crate::state::{Params, WaveState};

use super::integrators::LawsonStep;
use super::model::{Coeffs, Model};
use super::SystemSpec;

/// Finite-difference step for both routes; halved once for Richardson extrapolation.
const STEP: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct EnergyDerivativeReport {
    /// Directional derivative of `E^s` along `rhs(state)`.
    pub chain_rule: f64,
    /// Time derivative of `E^s` along short evolution steps.
    pub evolution: f64,
    /// `|chain_rule - evolution| / max(|chain_rule|, |evolution|)`, 0 when both vanish.
    pub relative_difference: f64,
    pub weighted_norm: f64,
    /// `chain_rule / ((1 + kappa)(N^2 + N^4))`, 0 for the zero state.
    pub ratio: f64,
}

fn richardson(d: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let coarse = d(STEP)?;
    let fine = d(STEP / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// `dE^s/dt` at `state`, computed by symmetric differences of `E^s` along
/// the straight line `state +- delta rhs(state)` and along the flow
/// `Phi(+-delta) state`, each Richardson-extrapolated.
pub fn energy_derivative_check(state: &WaveState, spec: &SystemSpec, s: f64) -> Result<EnergyDerivativeReport> {
    spec.check_state(state)?;
    let params = Params { s, ..spec.params };
    params.validate()?;
    let grid = state.grid();
    let model = Model::new(grid, spec, true);
    let u = Coeffs::from_state(state);
    let f = model.rhs(&u);
    let energy = |c: &Coeffs| -> Result<f64> { modified_energy(&c.to_state(grid, state.time)?, &params) };

    let chain_rule = richardson(|d| Ok((energy(&u.plus(d, &f))? - energy(&u.plus(-d, &f))?) / (2.0 * d)))?;
    let evolution = richardson(|d| {
        let fwd = LawsonStep::new(&model, d).step(&model, &u);
        let bwd = LawsonStep::new(&model, -d).step(&model, &u);
        Ok((energy(&fwd)? - energy(&bwd)?) / (2.0 * d))
    })?;
    let scale = chain_rule.abs().max(evolution.abs());
    let relative_difference = if scale == 0.0 { 0.0 } else { (chain_rule - evolution).abs() / scale };
    let n = weighted_norm(state, s, params.kappa);
    let denom = (1.0 + params.kappa) * (n * n + n.powi(4));
    Ok(EnergyDerivativeReport {
        chain_rule,
        evolution,
        relative_difference,
        weighted_norm: n,
        ratio: if denom == 0.0 { 0.0 } else { chain_rule / denom },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn small_state() -> WaveState {
        let g = Grid::new_1d(64, 2.0 * PI).unwrap();
        let eta = Field::from_fn(g.clone(), |x| 0.05 * x[0].cos() + 0.02 * (2.0 * x[0]).sin()).unwrap();
        let v = Field::from_fn(g, |x| 0.04 * (x[0] + 0.3).sin() - 0.01 * (3.0 * x[0]).cos()).unwrap();
        WaveState::new_1d(eta, v).unwrap()
    }

    #[test]
    fn zero_state_has_zero_derivative() {
        let g = Grid::new_1d(32, 2.0 * PI).unwrap();
        let spec = SystemSpec::wb1d(Params::default()).unwrap();
        let r = energy_derivative_check(&WaveState::zeros(g), &spec, 1.0).unwrap();
        assert_eq!(r.chain_rule, 0.0);
        assert_eq!(r.evolution, 0.0);
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn hamiltonian_derivative_vanishes() {
        let spec = SystemSpec::wb1d(Params::with_kappa(1.0)).unwrap();
        let st = small_state();
        let r = energy_derivative_check(&st, &spec, 0.5).unwrap();
        let n2 = r.weighted_norm.powi(2);
        assert!(r.chain_rule.abs() < 1e-10 * n2, "{}", r.chain_rule);
        assert!(r.evolution.abs() < 1e-10 * n2, "{}", r.evolution);
    }

    #[test]
    fn routes_agree() {
        for mu in [0.0, 0.1] {
            let spec = SystemSpec::wb1d(Params::new(0.5, mu, 1.0, 0.5).unwrap()).unwrap();
            let r = energy_derivative_check(&small_state(), &spec, 1.0).unwrap();
            assert!(r.relative_difference < 1e-6, "mu {mu}: {r:?}");
        }
    }
}
