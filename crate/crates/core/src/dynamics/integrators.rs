use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::model::{Coeffs, ModeMatrix, Model};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Integrating-factor (Lawson) fourth-order Runge-Kutta: the linear part
    /// is propagated exactly by the semigroup.
    ExponentialRk4,
    /// Classical fourth-order Runge-Kutta on the full right-hand side.
    ReferenceRk4,
    /// Picard iteration of the discretized Duhamel formula.
    PicardDuhamel,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ExponentialRk4 => "exponential_rk4",
            Method::ReferenceRk4 => "reference_rk4",
            Method::PicardDuhamel => "picard_duhamel",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt: f64,
    #[serde(default = "default_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_max_iter")]
    pub picard_max_iter: usize,
    #[serde(default = "default_dealias")]
    pub dealias: bool,
}

fn default_tol() -> f64 {
    1e-12
}

fn default_max_iter() -> usize {
    50
}

fn default_dealias() -> bool {
    true
}

impl IntegratorConfig {
    pub fn new(method: Method, dt: f64) -> Result<Self> {
        let cfg = Self {
            method,
            dt,
            picard_tol: default_tol(),
            picard_max_iter: default_max_iter(),
            dealias: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn exponential(dt: f64) -> Result<Self> {
        Self::new(Method::ExponentialRk4, dt)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", self.dt, "must be positive and finite"));
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::param("picard_tol", self.picard_tol, "must be positive"));
        }
        if self.picard_max_iter == 0 {
            return Err(Error::param("picard_max_iter", 0.0, "must be at least 1"));
        }
        Ok(())
    }
}

/// Propagators for one Lawson step of size `h`.
pub(crate) struct LawsonStep {
    pub h: f64,
    half: ModeMatrix,
    full: ModeMatrix,
}

impl LawsonStep {
    pub fn new(model: &Model, h: f64) -> Self {
        Self {
            h,
            half: model.propagator(h / 2.0),
            full: model.propagator(h),
        }
    }

    pub fn step(&self, model: &Model, u: &Coeffs) -> Coeffs {
        let h = self.h;
        let k1 = model.nonlinear(u);
        let k2 = model.nonlinear(&model.apply(&self.half, &u.plus(h / 2.0, &k1)));
        let half_u = model.apply(&self.half, u);
        let k3 = model.nonlinear(&half_u.plus(h / 2.0, &k2));
        let full_u = model.apply(&self.full, u);
        let k4 = model.nonlinear(&full_u.plus(h, &model.apply(&self.half, &k3)));
        let mut mid = k2;
        mid.axpy(1.0, &k3);
        let mut out = full_u;
        out.axpy(h / 6.0, &model.apply(&self.full, &k1));
        out.axpy(h / 3.0, &model.apply(&self.half, &mid));
        out.axpy(h / 6.0, &k4);
        out
    }
}

pub(crate) fn rk4_step(model: &Model, u: &Coeffs, h: f64) -> Coeffs {
    let k1 = model.rhs(u);
    let k2 = model.rhs(&u.plus(h / 2.0, &k1));
    let k3 = model.rhs(&u.plus(h / 2.0, &k2));
    let k4 = model.rhs(&u.plus(h, &k3));
    let mut out = u.clone();
    out.axpy(h / 6.0, &k1);
    out.axpy(h / 3.0, &k2);
    out.axpy(h / 3.0, &k3);
    out.axpy(h / 6.0, &k4);
    out
}
