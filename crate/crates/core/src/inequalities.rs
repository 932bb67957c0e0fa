//! Ratio diagnostics for the bilinear and trilinear estimates used by the
//! energy method. The constants in these estimates are not known, so each
//! diagnostic reports `LHS / RHS` (right side without its constant) over a
//! family of samples; only boundedness of the ratio is meaningful.
//!
//! The symbol comparison is different: it checks the pointwise chain
//! `0 <= <xi> - xi/tanh(xi) <= <xi> - |xi| <= 1/(2|xi|)` exactly.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::norms::{lp_norm, sobolev_norm};
use crate::ops::{commutator, dealiased_product};
use crate::symbol::{apply_multiplier, Symbol};

const EXPONENT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Inequality {
    /// `||[J^s, f] g||_p <= ||f'||_p1 ||J^{s-1} g||_p2 + ||J^s f||_p3 ||g||_p4`.
    KatoPonce {
        s: f64,
        p: f64,
        p1: f64,
        p2: f64,
        p3: f64,
        p4: f64,
    },
    /// `|| |D|^sigma(fg) - f |D|^sigma g - g |D|^sigma f ||_p <= || |D|^s1 f ||_p1 || |D|^s2 g ||_p2`.
    Leibniz {
        sigma1: f64,
        sigma2: f64,
        p: f64,
        p1: f64,
        p2: f64,
    },
    /// `||f g h||_{L^1} <= ||f||_{H^a} ||g||_{H^b} ||h||_{H^c}`.
    Trilinear { a: f64, b: f64, c: f64 },
    /// `||f||_inf <= 1 + ||f||_{H^1/2} sqrt(log(1 + ||f||_{H^s}))`.
    BrezisGallouet { s: f64 },
    SymbolComparison,
}

impl Inequality {
    pub fn name(&self) -> &'static str {
        match self {
            Inequality::KatoPonce { .. } => "kato_ponce",
            Inequality::Leibniz { .. } => "leibniz",
            Inequality::Trilinear { .. } => "trilinear",
            Inequality::BrezisGallouet { .. } => "brezis_gallouet",
            Inequality::SymbolComparison => "symbol_comparison",
        }
    }

    /// Reject parameter choices outside the estimate's hypotheses.
    pub fn check_hypotheses(&self) -> Result<()> {
        let open = |name: &str, p: f64| -> Result<()> {
            if p > 1.0 && p.is_finite() {
                Ok(())
            } else {
                Err(Error::HypothesisViolated(format!("{name} = {p} must lie in (1, inf)")))
            }
        };
        let half_open = |name: &str, p: f64| -> Result<()> {
            if p > 1.0 {
                Ok(())
            } else {
                Err(Error::HypothesisViolated(format!("{name} = {p} must lie in (1, inf]")))
            }
        };
        let holder = |lhs: f64, a: f64, b: f64, what: &str| -> Result<()> {
            if (1.0 / lhs - 1.0 / a - 1.0 / b).abs() <= EXPONENT_TOLERANCE {
                Ok(())
            } else {
                Err(Error::HypothesisViolated(format!("Hoelder relation {what} fails")))
            }
        };
        match *self {
            Inequality::KatoPonce { s, p, p1, p2, p3, p4 } => {
                if s < 1.0 {
                    return Err(Error::HypothesisViolated(format!("s = {s} must be >= 1")));
                }
                open("p", p)?;
                open("p2", p2)?;
                open("p3", p3)?;
                half_open("p1", p1)?;
                half_open("p4", p4)?;
                holder(p, p1, p2, "1/p = 1/p1 + 1/p2")?;
                holder(p, p3, p4, "1/p = 1/p3 + 1/p4")
            }
            Inequality::Leibniz { sigma1, sigma2, p, p1, p2 } => {
                let sigma = sigma1 + sigma2;
                if !(sigma > 0.0 && sigma < 1.0) {
                    return Err(Error::HypothesisViolated(format!(
                        "sigma = sigma1 + sigma2 = {sigma} must lie in (0, 1)"
                    )));
                }
                open("p", p)?;
                open("p1", p1)?;
                let endpoint = sigma2 == 0.0 && p2.is_infinite();
                if !endpoint {
                    if !(sigma1 > 0.0 && sigma1 < sigma && sigma2 > 0.0 && sigma2 < sigma) {
                        return Err(Error::HypothesisViolated(
                            "sigma1, sigma2 must lie in (0, sigma) (or sigma2 = 0 with p2 = inf)".into(),
                        ));
                    }
                    open("p2", p2)?;
                }
                holder(p, p1, p2, "1/p = 1/p1 + 1/p2")
            }
            Inequality::Trilinear { a, b, c } => {
                if a + b + c <= 0.5 {
                    return Err(Error::HypothesisViolated(format!("a + b + c = {} must exceed 1/2", a + b + c)));
                }
                if a + b < 0.0 || a + c < 0.0 || b + c < 0.0 {
                    return Err(Error::HypothesisViolated("pairwise sums of a, b, c must be >= 0".into()));
                }
                Ok(())
            }
            Inequality::BrezisGallouet { s } => {
                if s > 0.5 {
                    Ok(())
                } else {
                    Err(Error::HypothesisViolated(format!("s = {s} must exceed 1/2")))
                }
            }
            Inequality::SymbolComparison => Ok(()),
        }
    }
}

/// One sample of a family: up to three fields on a shared grid.
#[derive(Clone, Debug)]
pub struct Sample {
    pub f: Field,
    pub g: Option<Field>,
    pub h: Option<Field>,
}

impl Sample {
    pub fn one(f: Field) -> Self {
        Self { f, g: None, h: None }
    }
    pub fn pair(f: Field, g: Field) -> Self {
        Self { f, g: Some(g), h: None }
    }
    pub fn triple(f: Field, g: Field, h: Field) -> Self {
        Self {
            f,
            g: Some(g),
            h: Some(h),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleRatio {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// For the trilinear estimate: the signed integral of `f g h`.
    pub signed_integral: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolChainReport {
    pub checked: usize,
    pub passed: usize,
    /// Worst violation over the three inequalities, in ulps of the larger side.
    pub max_violation_ulps: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub inequality: &'static str,
    pub samples: Vec<SampleRatio>,
    pub max_ratio: f64,
    pub symbol_chain: Option<SymbolChainReport>,
}

/// Evaluate one inequality over a family of samples.
pub fn inequality_ratio_report(family: &[Sample], which: Inequality) -> Result<InequalityReport> {
    which.check_hypotheses()?;
    if let Inequality::SymbolComparison = which {
        let grid = family
            .first()
            .map(|s| s.f.grid().clone())
            .ok_or_else(|| Error::HypothesisViolated("symbol comparison needs a grid sample".into()))?;
        let chain = symbol_chain_check(&grid);
        return Ok(InequalityReport {
            inequality: which.name(),
            samples: Vec::new(),
            max_ratio: 0.0,
            symbol_chain: Some(chain),
        });
    }
    let samples = family
        .iter()
        .map(|s| evaluate(s, which))
        .collect::<Result<Vec<_>>>()?;
    let max_ratio = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
    Ok(InequalityReport {
        inequality: which.name(),
        samples,
        max_ratio,
        symbol_chain: None,
    })
}

fn need<'a>(f: &'a Option<Field>, name: &str) -> Result<&'a Field> {
    f.as_ref()
        .ok_or_else(|| Error::HypothesisViolated(format!("sample is missing field `{name}`")))
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

fn evaluate(sample: &Sample, which: Inequality) -> Result<SampleRatio> {
    let f = &sample.f;
    match which {
        Inequality::KatoPonce { s, p, p1, p2, p3, p4 } => {
            let g = need(&sample.g, "g")?;
            let lhs = lp_norm(&commutator(&Symbol::bessel(s), f, g)?, p);
            let df = apply_multiplier(&Symbol::partial(0), f)?;
            let jg = apply_multiplier(&Symbol::bessel(s - 1.0), g)?;
            let jf = apply_multiplier(&Symbol::bessel(s), f)?;
            let rhs = lp_norm(&df, p1) * lp_norm(&jg, p2) + lp_norm(&jf, p3) * lp_norm(g, p4);
            Ok(SampleRatio {
                lhs,
                rhs,
                ratio: ratio(lhs, rhs),
                signed_integral: None,
            })
        }
        Inequality::Leibniz { sigma1, sigma2, p, p1, p2 } => {
            let g = need(&sample.g, "g")?;
            let sigma = sigma1 + sigma2;
            let ds = Symbol::riesz(sigma);
            let whole = apply_multiplier(&ds, &dealiased_product(f, g)?)?;
            let a = dealiased_product(f, &apply_multiplier(&ds, g)?)?;
            let b = dealiased_product(g, &apply_multiplier(&ds, f)?)?;
            let lhs = lp_norm(&whole.sub(&a)?.sub(&b)?, p);
            let rhs = lp_norm(&apply_multiplier(&Symbol::riesz(sigma1), f)?, p1)
                * lp_norm(&apply_multiplier(&Symbol::riesz(sigma2), g)?, p2);
            Ok(SampleRatio {
                lhs,
                rhs,
                ratio: ratio(lhs, rhs),
                signed_integral: None,
            })
        }
        Inequality::Trilinear { a, b, c } => {
            let g = need(&sample.g, "g")?;
            let h = need(&sample.h, "h")?;
            if !(f.same_grid(g) && f.same_grid(h)) {
                return Err(Error::GridMismatch);
            }
            let grid = f.grid();
            let fine = grid.refined(2)?;
            let vals = |x: &Field| -> Result<Vec<f64>> {
                Ok(fine.inverse_real(&grid.pad_coefficients(x.coefficients(), &fine)?))
            };
            let (vf, vg, vh) = (vals(f)?, vals(g)?, vals(h)?);
            let prod: Vec<f64> = (0..fine.len()).map(|i| vf[i] * vg[i] * vh[i]).collect();
            let lhs = fine.integrate(&prod.iter().map(|v| v.abs()).collect::<Vec<_>>());
            let signed = fine.integrate(&prod);
            let rhs = sobolev_norm(f, a, false)? * sobolev_norm(g, b, false)? * sobolev_norm(h, c, false)?;
            Ok(SampleRatio {
                lhs,
                rhs,
                ratio: ratio(lhs, rhs),
                signed_integral: Some(signed),
            })
        }
        Inequality::BrezisGallouet { s } => {
            let lhs = f.linf();
            let rhs = 1.0 + sobolev_norm(f, 0.5, false)? * (1.0 + sobolev_norm(f, s, false)?).ln().sqrt();
            Ok(SampleRatio {
                lhs,
                rhs,
                ratio: ratio(lhs, rhs),
                signed_integral: None,
            })
        }
        Inequality::SymbolComparison => unreachable!("handled by the caller"),
    }
}

/// The three sides of the chain at one nonzero wavenumber, evaluated in
/// cancellation-free form.
pub fn symbol_chain_values(xi: f64) -> [f64; 4] {
    let r = xi.abs();
    let bessel_minus_abs = 1.0 / ((1.0 + r * r).sqrt() + r);
    // <xi> - r coth r = (<xi> - r) - r (coth r - 1) = (<xi> - r) - 2r / expm1(2r)
    let bessel_minus_d_tanh = bessel_minus_abs - 2.0 * r / (2.0 * r).exp_m1();
    [0.0, bessel_minus_d_tanh, bessel_minus_abs, 0.5 / r]
}

fn violation_ulps(lower: f64, upper: f64) -> f64 {
    if lower <= upper {
        0.0
    } else {
        let scale = lower.abs().max(upper.abs());
        let ulp = if scale == 0.0 { f64::MIN_POSITIVE } else { scale * f64::EPSILON };
        (lower - upper) / ulp
    }
}

/// Check the symbol chain at every nonzero wavenumber of the grid. A slot
/// passes when each inequality holds to within 4 ulps.
pub fn symbol_chain_check(grid: &Arc<Grid>) -> SymbolChainReport {
    let mut checked = 0;
    let mut passed = 0;
    let mut worst: f64 = 0.0;
    for &r in grid.abs_wavenumbers() {
        if r == 0.0 {
            continue;
        }
        checked += 1;
        let v = symbol_chain_values(r);
        let w = (0..3).map(|i| violation_ulps(v[i], v[i + 1])).fold(0.0, f64::max);
        worst = worst.max(w);
        if w <= 4.0 {
            passed += 1;
        }
    }
    SymbolChainReport {
        checked,
        passed,
        max_violation_ulps: worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn chain_at_one() {
        let v = symbol_chain_values(1.0);
        assert!((v[1] - 0.101_178_276_873_763_75).abs() < 1e-15, "{}", v[1]);
        assert!((v[2] - 0.414_213_562_373_095_05).abs() < 1e-15);
        assert_eq!(v[3], 0.5);
        // direct (cancellation-prone) evaluation agrees at moderate xi
        let direct = 2f64.sqrt() - 1.0 / 1f64.tanh();
        assert!((v[1] - direct).abs() < 1e-15);
    }

    #[test]
    fn chain_on_large_grid() {
        let g = Grid::new_1d(4096, 2.0 * PI).unwrap();
        let r = symbol_chain_check(&g);
        assert_eq!(r.checked, 4095);
        assert_eq!(r.passed, r.checked);
    }

    #[test]
    fn kato_ponce_constant_f() {
        let g = Grid::new_1d(32, 2.0 * PI).unwrap();
        let f = Field::from_fn(g.clone(), |_| 1.5).unwrap();
        let h = Field::from_fn(g, |x| x[0].sin()).unwrap();
        let kp = Inequality::KatoPonce {
            s: 1.0,
            p: 2.0,
            p1: f64::INFINITY,
            p2: 2.0,
            p3: 2.0,
            p4: f64::INFINITY,
        };
        let rep = inequality_ratio_report(&[Sample::pair(f, h)], kp).unwrap();
        assert!(rep.samples[0].lhs < 1e-13);
        assert!(rep.max_ratio < 1e-13);
    }

    #[test]
    fn trilinear_cosines() {
        let g = Grid::new_1d(32, 2.0 * PI).unwrap();
        let f = Field::from_fn(g, |x| x[0].cos()).unwrap();
        let rep = inequality_ratio_report(
            &[Sample::triple(f.clone(), f.clone(), f)],
            Inequality::Trilinear { a: 0.5, b: 0.5, c: 0.5 },
        )
        .unwrap();
        let s = &rep.samples[0];
        assert!(s.signed_integral.unwrap().abs() < 1e-14);
        // int |cos|^3 = 8/3; the padded quadrature of |.| is only approximate
        assert!((s.lhs - 8.0 / 3.0).abs() < 1e-2);
        assert!(rep.max_ratio.is_finite() && rep.max_ratio > 0.0);
    }

    #[test]
    fn hypotheses_are_enforced() {
        let bad = [
            Inequality::KatoPonce { s: 0.5, p: 2.0, p1: f64::INFINITY, p2: 2.0, p3: 2.0, p4: f64::INFINITY },
            Inequality::KatoPonce { s: 1.0, p: 2.0, p1: 4.0, p2: 2.0, p3: 2.0, p4: f64::INFINITY },
            Inequality::Leibniz { sigma1: 0.6, sigma2: 0.6, p: 2.0, p1: 4.0, p2: 4.0 },
            Inequality::Trilinear { a: 0.1, b: 0.1, c: 0.1 },
            Inequality::Trilinear { a: 1.0, b: -0.5, c: -0.6 },
            Inequality::BrezisGallouet { s: 0.5 },
        ];
        for b in bad {
            assert!(matches!(b.check_hypotheses(), Err(Error::HypothesisViolated(_))), "{b:?}");
        }
        assert!(Inequality::Leibniz { sigma1: 0.5, sigma2: 0.0, p: 2.0, p1: 2.0, p2: f64::INFINITY }
            .check_hypotheses()
            .is_ok());
    }
}
