//! Fourier multiplier symbols and their application to grid fields.
//!
//! A [`Symbol`] is a function of the wavevector with a declared parity.
//! Removable singularities are patched inside each catalog entry. Odd symbols
//! vanish on Nyquist slots: the unpaired mode cannot carry the odd image of a
//! real field.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{hermitian_part, Field};
use crate::grid::Grid;

/// Relative non-Hermitian residue above which an operator output is not real.
pub const REALNESS_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn combine(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

type SymbolFn = dyn Fn([f64; 2], f64) -> Complex64 + Send + Sync;

#[derive(Clone)]
pub struct Symbol {
    name: String,
    parity: Parity,
    eval: Arc<SymbolFn>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("name", &self.name)
            .field("parity", &self.parity)
            .finish()
    }
}

impl Symbol {
    /// `eval` receives the wavevector and its magnitude.
    pub fn new(
        name: impl Into<String>,
        parity: Parity,
        eval: impl Fn([f64; 2], f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            parity,
            eval: Arc::new(eval),
        }
    }

    fn real(
        name: impl Into<String>,
        parity: Parity,
        eval: impl Fn([f64; 2], f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, parity, move |xi, r| Complex64::new(eval(xi, r), 0.0))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Raw value at a wavevector, without the Nyquist convention.
    pub fn eval(&self, xi: [f64; 2]) -> Complex64 {
        (self.eval)(xi, xi[0].hypot(xi[1]))
    }

    /// Value at a grid slot, honouring the Nyquist convention for odd symbols.
    pub fn at(&self, grid: &Grid, idx: usize) -> Complex64 {
        if self.parity == Parity::Odd && grid.is_nyquist(idx) {
            return Complex64::new(0.0, 0.0);
        }
        (self.eval)(grid.wavevector(idx), grid.abs_wavenumbers()[idx])
    }

    /// Values at every grid slot; fails on the first non-finite one.
    pub fn values_on(&self, grid: &Grid) -> Result<Vec<Complex64>> {
        (0..grid.len())
            .map(|idx| {
                let v = self.at(grid, idx);
                if v.re.is_finite() && v.im.is_finite() {
                    Ok(v)
                } else {
                    let xi = grid.wavevector(idx);
                    Err(Error::SymbolNotFinite {
                        symbol: self.name.clone(),
                        wavenumber: xi[..grid.dim()].to_vec(),
                    })
                }
            })
            .collect()
    }

    /// Pointwise product of two symbols (composition of the operators).
    pub fn times(&self, other: &Symbol) -> Symbol {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Symbol {
            name: format!("{}*{}", self.name, other.name),
            parity: self.parity.combine(other.parity),
            eval: Arc::new(move |xi, r| a(xi, r) * b(xi, r)),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Symbol {
        let a = self.eval.clone();
        Symbol {
            name: format!("({c})*{}", self.name),
            parity: self.parity,
            eval: Arc::new(move |xi, r| c * a(xi, r)),
        }
    }

    /// Multiply by `-i`; turns real odd symbols into real-preserving operators.
    pub fn times_minus_i(&self) -> Symbol {
        let mut s = self.scaled(Complex64::new(0.0, -1.0));
        s.name = format!("-i*{}", self.name);
        s
    }

    // --- catalog -------------------------------------------------------

    pub fn identity() -> Symbol {
        Symbol::real("1", Parity::Even, |_, _| 1.0)
    }

    /// `tanh(xi_1)`, the 1D operator `tanh D`.
    pub fn tanh() -> Symbol {
        Symbol::real("tanh(xi)", Parity::Odd, |xi, _| xi[0].tanh())
    }

    /// `tanh|xi|`.
    pub fn tanh_abs() -> Symbol {
        Symbol::real("tanh|xi|", Parity::Even, |_, r| r.tanh())
    }

    /// `xi_axis`, the operator `D_axis = -i d/dx_axis`.
    pub fn d(axis: usize) -> Symbol {
        Symbol::real(format!("xi_{}", axis + 1), Parity::Odd, move |xi, _| xi[axis])
    }

    /// `i xi_axis`, the derivative `d/dx_axis`.
    pub fn partial(axis: usize) -> Symbol {
        Symbol::new(format!("i*xi_{}", axis + 1), Parity::Odd, move |xi, _| {
            Complex64::new(0.0, xi[axis])
        })
    }

    pub fn sgn() -> Symbol {
        Symbol::real("sgn(xi)", Parity::Odd, |xi, _| {
            if xi[0] > 0.0 {
                1.0
            } else if xi[0] < 0.0 {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// Riesz potential `|xi|^alpha`. The zero mode maps to 0 for `alpha != 0`
    /// (for negative orders the mean is annihilated).
    pub fn riesz(alpha: f64) -> Symbol {
        Symbol::real(format!("|xi|^{alpha}"), Parity::Even, move |_, r| {
            if alpha == 0.0 {
                1.0
            } else if r == 0.0 {
                0.0
            } else {
                r.powf(alpha)
            }
        })
    }

    /// Bessel potential `<xi>^alpha = (1 + |xi|^2)^(alpha/2)`.
    pub fn bessel(alpha: f64) -> Symbol {
        Symbol::real(format!("<xi>^{alpha}"), Parity::Even, move |_, r| {
            (1.0 + r * r).powf(0.5 * alpha)
        })
    }

    /// `K = sqrt(tanh|xi| / |xi|)`, `K(0) = 1`.
    pub fn k() -> Symbol {
        Symbol::real("K", Parity::Even, |_, r| k_value(r))
    }

    pub fn k_inv() -> Symbol {
        Symbol::real("K^-1", Parity::Even, |_, r| 1.0 / k_value(r))
    }

    /// `K_kappa = sqrt((1 + kappa |xi|^2) tanh|xi| / |xi|)`, `K_kappa(0) = 1`.
    pub fn k_kappa(kappa: f64) -> Symbol {
        Symbol::real(format!("K_{kappa}"), Parity::Even, move |_, r| {
            k_kappa_value(kappa, r)
        })
    }

    pub fn k_kappa_inv(kappa: f64) -> Symbol {
        Symbol::real(format!("K_{kappa}^-1"), Parity::Even, move |_, r| {
            1.0 / k_kappa_value(kappa, r)
        })
    }

    /// `xi / tanh(xi) = |xi| / tanh|xi|`, equal to 1 at the origin.
    pub fn d_over_tanh() -> Symbol {
        Symbol::real("xi/tanh(xi)", Parity::Even, |_, r| d_over_tanh_value(r))
    }

    /// Heat factor `exp(-kappa mu t |xi|^p)`.
    pub fn heat(kappa: f64, mu: f64, t: f64, p: f64) -> Symbol {
        Symbol::real("heat", Parity::Even, move |_, r| heat_value(kappa * mu * t, p, r))
    }
}

pub fn k_value(r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else {
        (r.tanh() / r).sqrt()
    }
}

pub fn k_kappa_value(kappa: f64, r: f64) -> f64 {
    (1.0 + kappa * r * r).sqrt() * k_value(r)
}

pub fn d_over_tanh_value(r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else {
        r / r.tanh()
    }
}

/// `exp(-rate |xi|^p)`.
pub fn heat_value(rate: f64, p: f64, r: f64) -> f64 {
    if rate == 0.0 || r == 0.0 {
        1.0
    } else {
        (-rate * r.powf(p)).exp()
    }
}

/// Multiply coefficients by a symbol's grid values.
pub fn apply_to_coefficients(sym: &Symbol, grid: &Grid, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let s = sym.values_on(grid)?;
    Ok(coeffs.iter().zip(&s).map(|(c, s)| c * s).collect())
}

/// Relative size of the anti-Hermitian part of a coefficient array.
pub fn non_hermitian_residue(grid: &Grid, coeffs: &[Complex64]) -> f64 {
    let total: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let herm = hermitian_part(grid, coeffs);
    let anti: f64 = coeffs.iter().zip(&herm).map(|(c, h)| (c - h).norm_sqr()).sum();
    (anti / total).sqrt()
}

/// `F(out)(xi) = sigma(xi) F(f)(xi)`; rejects operators whose output is not real.
pub fn apply_multiplier(sym: &Symbol, f: &Field) -> Result<Field> {
    let grid = f.grid();
    let out = apply_to_coefficients(sym, grid, f.coefficients())?;
    let residue = non_hermitian_residue(grid, &out);
    if residue > REALNESS_TOLERANCE {
        return Err(Error::NotRealPreserving {
            symbol: sym.name().to_string(),
            residue,
        });
    }
    Field::from_coefficients(grid.clone(), out)
}
