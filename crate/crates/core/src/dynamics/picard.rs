//! Picard iteration of the Duhamel formula
//!
//! ```text
//! u(t) = S(t) u0 + int_0^t S(t - t') N(u(t')) dt'
//! ```
//!
//! on a uniform time grid `t_j = j h`. The forcing is replaced by its
//! piecewise cubic Lagrange interpolant through four neighbouring nodes, and
//! the integral over each interval is done exactly per mode (product
//! integration), so the discrete map is fourth order in `h`. The recurrence
//! `U_j = S(h) U_{j-1} + int_{t_{j-1}}^{t_j} S(t_j - t') N~(t') dt'` evaluates
//! the full Duhamel integral in linear time.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::state::WaveState;

use super::integrators::IntegratorConfig;
use super::model::{Coeffs, ModeMatrix, Model};
use super::SystemSpec;

/// Interpolation nodes relative to the left end of an interval.
const STENCILS: [[f64; 4]; 3] = [[0.0, 1.0, 2.0, 3.0], [-1.0, 0.0, 1.0, 2.0], [-2.0, -1.0, 0.0, 1.0]];

const GAUSS_POINTS: usize = 8;

#[derive(Clone, Debug)]
pub struct PicardSolution {
    pub times: Vec<f64>,
    pub states: Vec<WaveState>,
    pub iterations: usize,
    /// Sup over the time grid of the weighted-norm change, per iteration.
    pub differences: Vec<f64>,
}

impl PicardSolution {
    pub fn last_difference(&self) -> f64 {
        self.differences.last().copied().unwrap_or(0.0)
    }

    pub fn final_state(&self) -> &WaveState {
        self.states.last().expect("a Picard solution has at least one state")
    }
}

/// Gauss-Legendre nodes and weights on [0, 1].
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn lagrange(nodes: &[f64; 4], m: usize, x: f64) -> f64 {
    (0..4)
        .filter(|&k| k != m)
        .map(|k| (x - nodes[k]) / (nodes[m] - nodes[k]))
        .product()
}

/// Per-stencil, per-node weight matrices: `h int_0^1 S(h(1 - sigma)) l_m(sigma) d sigma`.
fn duhamel_weights(model: &Model, h: f64) -> Vec<[ModeMatrix; 4]> {
    let (gx, gw) = gauss_legendre(GAUSS_POINTS);
    let len = model.len();
    let empty = || ModeMatrix {
        c: vec![0.0; len],
        s: vec![0.0; len],
        t: vec![0.0; len],
    };
    let mut out: Vec<[ModeMatrix; 4]> = (0..3).map(|_| [empty(), empty(), empty(), empty()]).collect();
    for idx in 0..len {
        let (w, g) = (model.omega[idx] * h, model.gamma[idx] * h);
        let panels = 1 + ((w.abs() + g) / 2.0).ceil() as usize;
        let width = 1.0 / panels as f64;
        let mut acc = [[[0.0f64; 3]; 4]; 3];
        for p in 0..panels {
            for (x, wt) in gx.iter().zip(&gw) {
                let sigma = (p as f64 + x) * width;
                let lag = 1.0 - sigma;
                let damp = (-g * lag).exp();
                let (sin, cos) = (w * lag).sin_cos();
                let base = [damp * cos, damp * sin, damp];
                for (st, nodes) in STENCILS.iter().enumerate() {
                    for m in 0..4 {
                        let l = lagrange(nodes, m, sigma) * wt * width * h;
                        for q in 0..3 {
                            acc[st][m][q] += base[q] * l;
                        }
                    }
                }
            }
        }
        for st in 0..3 {
            for m in 0..4 {
                out[st][m].c[idx] = acc[st][m][0];
                out[st][m].s[idx] = acc[st][m][1];
                out[st][m].t[idx] = acc[st][m][2];
            }
        }
    }
    out
}

/// Solve the Duhamel fixed point on `[0, horizon]` with `ceil(horizon / dt)`
/// (at least 3) uniform intervals.
pub fn picard_solve(u0: &WaveState, spec: &SystemSpec, cfg: &IntegratorConfig, horizon: f64) -> Result<PicardSolution> {
    cfg.validate()?;
    spec.check_state(u0)?;
    if !spec.regularized {
        return Err(Error::HypothesisViolated(
            "the Duhamel solver needs a regularized system (mu > 0)".into(),
        ));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::param("horizon", horizon, "must be positive and finite"));
    }
    let grid = u0.grid();
    let model = Model::new(grid, spec, cfg.dealias);
    let intervals = ((horizon / cfg.dt - 1e-9).ceil() as usize).max(3);
    let h = horizon / intervals as f64;
    let step = model.propagator(h);
    let weights = duhamel_weights(&model, h);
    let start = Coeffs::from_state(u0);

    let mut traj = Vec::with_capacity(intervals + 1);
    traj.push(start.clone());
    for j in 1..=intervals {
        let next = model.apply(&step, &traj[j - 1]);
        traj.push(next);
    }

    let mut differences = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.picard_max_iter {
        let forcing: Vec<Coeffs> = traj.par_iter().map(|u| model.nonlinear(u)).collect();
        let mut next = Vec::with_capacity(intervals + 1);
        next.push(start.clone());
        for j in 1..=intervals {
            let left = j - 1;
            let (st, first) = if left == 0 {
                (0, 0)
            } else if left == intervals - 1 {
                (2, left - 2)
            } else {
                (1, left - 1)
            };
            let mut u = model.apply(&step, &next[j - 1]);
            for m in 0..4 {
                u.axpy(1.0, &model.apply(&weights[st][m], &forcing[first + m]));
            }
            next.push(u);
        }
        let diff = next
            .iter()
            .zip(&traj)
            .map(|(a, b)| model.norm(&a.plus(-1.0, b)))
            .fold(0.0, f64::max);
        traj = next;
        let diverging = !diff.is_finite();
        differences.push(diff);
        if diverging {
            break;
        }
        if diff < cfg.picard_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        let n = differences.len();
        let last = differences[n - 1];
        let contraction = if n >= 2 { last / differences[n - 2] } else { f64::NAN };
        return Err(Error::PicardDiverged {
            iterations: n,
            last_difference: last,
            contraction,
        });
    }
    let times: Vec<f64> = (0..=intervals).map(|j| u0.time + j as f64 * h).collect();
    let states = traj
        .iter()
        .zip(&times)
        .map(|(u, &t)| u.to_state(grid, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(PicardSolution {
        times,
        states,
        iterations: differences.len(),
        differences,
    })
}
