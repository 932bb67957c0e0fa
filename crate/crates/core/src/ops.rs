//! Products, commutators and the spectral mollifier.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::state::WaveState;
use crate::symbol::{apply_multiplier, Symbol};

/// Product of two coefficient arrays with both inputs and the output
/// restricted to `mask`. With the two-thirds mask the retained modes of the
/// product are alias free.
pub fn masked_product(grid: &Grid, a: &[Complex64], b: &[Complex64], mask: &[bool]) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let keep = |c: &[Complex64]| -> Vec<Complex64> {
        c.iter().zip(mask).map(|(&c, &m)| if m { c } else { zero }).collect()
    };
    let fa = grid.inverse_real(&keep(a));
    let fb = grid.inverse_real(&keep(b));
    let prod: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    let mut out = grid.forward(&prod);
    out.iter_mut().zip(mask).for_each(|(c, &m)| {
        if !m {
            *c = zero;
        }
    });
    out
}

/// Two-thirds-rule product of two fields.
pub fn dealiased_product(f: &Field, g: &Field) -> Result<Field> {
    if !f.same_grid(g) {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid();
    let c = masked_product(grid, f.coefficients(), g.coefficients(), &grid.dealias_mask());
    Field::from_coefficients(grid.clone(), c)
}

/// Exact integral of the product of the trigonometric interpolants of the
/// given coefficient arrays (up to three factors), evaluated on a grid
/// refined twice so no product mode aliases onto the mean.
pub fn product_integral(grid: &Grid, factors: &[&[Complex64]]) -> f64 {
    let fine = grid.refined(2).expect("refining a valid grid");
    let mut acc = vec![1.0; fine.len()];
    for c in factors {
        let padded = grid.pad_coefficients(c, &fine).expect("same box");
        let vals = fine.inverse_real(&padded);
        acc.iter_mut().zip(&vals).for_each(|(a, v)| *a *= v);
    }
    fine.integrate(&acc)
}

/// `sigma(D)(f g) - f sigma(D) g`, with dealiased products.
pub fn commutator(sym: &Symbol, f: &Field, g: &Field) -> Result<Field> {
    if !f.same_grid(g) {
        return Err(Error::GridMismatch);
    }
    let fg = dealiased_product(f, g)?;
    let first = apply_multiplier(sym, &fg)?;
    let sg = apply_multiplier(sym, g)?;
    let second = dealiased_product(f, &sg)?;
    first.sub(&second)
}

/// Sharp spectral cutoff keeping modes with `|xi| <= 1/epsilon`.
pub fn mollify(state: &WaveState, epsilon: f64) -> Result<WaveState> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param("epsilon", epsilon, "must lie in (0, 1)"));
    }
    let cutoff = 1.0 / epsilon;
    let grid = state.grid().clone();
    let cut = |f: &Field| -> Result<Field> {
        let c = f
            .coefficients()
            .iter()
            .zip(grid.abs_wavenumbers())
            .map(|(&c, &r)| if r <= cutoff { c } else { Complex64::new(0.0, 0.0) })
            .collect();
        Field::from_coefficients(grid.clone(), c)
    };
    WaveState::new(
        cut(&state.eta)?,
        state.vel.iter().map(cut).collect::<Result<Vec<_>>>()?,
        state.time,
    )
}
