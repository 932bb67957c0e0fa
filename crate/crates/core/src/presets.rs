//! Initial-data presets.
//!
//! With `x` in `[0, L)^d` and `q = 2 pi / L`:
//!
//! * `single_mode { amplitude a, mode k }`: `eta = a cos(q k x1)`,
//!   `v1 = a cos(q k x1)`, other velocity components zero.
//! * `gaussian_bump { amplitude a, width w }`: `eta = a exp(-|x - L/2|^2 / w^2)`, `v = 0`.
//! * `random_bandlimited { seed, band, amplitude a }`: over the integer modes
//!   `m` with `0 < |m| <= band`, `eta = sum a/|m| (alpha cos(q m.x) + beta sin(q m.x))`
//!   and the same for the velocity potential `phi` with weight `a/|m|^2`; in
//!   1D `v = sum a/|m| (...)` directly, in 2D `v = grad phi` (curl free).
//!   `alpha, beta` are uniform on `[-1, 1]` from a ChaCha8 stream seeded with `seed`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::state::WaveState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum Preset {
    SingleMode { amplitude: f64, mode: u32 },
    GaussianBump { amplitude: f64, width: f64 },
    RandomBandlimited { seed: u64, band: u32, amplitude: f64 },
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::SingleMode { .. } => "single_mode",
            Preset::GaussianBump { .. } => "gaussian_bump",
            Preset::RandomBandlimited { .. } => "random_bandlimited",
        }
    }

    pub fn build(&self, grid: &Arc<Grid>) -> Result<WaveState> {
        let q: Vec<f64> = grid.lengths().iter().map(|l| 2.0 * std::f64::consts::PI / l).collect();
        let dim = grid.dim();
        match *self {
            Preset::SingleMode { amplitude, mode } => {
                check_amplitude(amplitude)?;
                if 3 * mode as usize >= grid.shape()[0] {
                    return Err(Error::param("mode", mode as f64, "must lie inside the dealiased band (3k < n)"));
                }
                let f = Field::from_fn(grid.clone(), |x| amplitude * (q[0] * mode as f64 * x[0]).cos())?;
                let mut vel = vec![f.clone()];
                vel.extend((1..dim).map(|_| Field::zeros(grid.clone())));
                WaveState::new(f, vel, 0.0)
            }
            Preset::GaussianBump { amplitude, width } => {
                check_amplitude(amplitude)?;
                if !(width > 0.0 && width.is_finite()) {
                    return Err(Error::param("width", width, "must be positive and finite"));
                }
                let centre: Vec<f64> = grid.lengths().iter().map(|l| l / 2.0).collect();
                let eta = Field::from_fn(grid.clone(), |x| {
                    let r2: f64 = x.iter().zip(&centre).map(|(x, c)| (x - c) * (x - c)).sum();
                    amplitude * (-r2 / (width * width)).exp()
                })?;
                let vel = (0..dim).map(|_| Field::zeros(grid.clone())).collect();
                WaveState::new(eta, vel, 0.0)
            }
            Preset::RandomBandlimited { seed, band, amplitude } => {
                check_amplitude(amplitude)?;
                let band = band as usize;
                if band == 0 || grid.shape().iter().any(|&n| 3 * band >= n) {
                    return Err(Error::param("band", band as f64, "must satisfy 1 <= band and 3 band < n"));
                }
                random_bandlimited(grid, seed, band, amplitude)
            }
        }
    }
}

fn check_amplitude(a: f64) -> Result<()> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(Error::param("amplitude", a, "must be finite"))
    }
}

struct Mode {
    m: [i64; 2],
    alpha: f64,
    beta: f64,
}

fn draw_modes(rng: &mut ChaCha8Rng, dim: usize, band: i64) -> Vec<Mode> {
    let mut modes = Vec::new();
    let lo = if dim == 2 { -band } else { 0 };
    for m1 in 0..=band {
        for m2 in lo..=if dim == 2 { band } else { 0 } {
            // one representative of each +-m pair
            if (m1 == 0 && m2 <= 0) || m1 * m1 + m2 * m2 > band * band {
                continue;
            }
            let alpha = rng.random_range(-1.0..=1.0);
            let beta = rng.random_range(-1.0..=1.0);
            modes.push(Mode { m: [m1, m2], alpha, beta });
        }
    }
    modes
}

fn random_bandlimited(grid: &Arc<Grid>, seed: u64, band: usize, amplitude: f64) -> Result<WaveState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = grid.dim();
    let q: Vec<f64> = grid.lengths().iter().map(|l| 2.0 * std::f64::consts::PI / l).collect();
    let eta_modes = draw_modes(&mut rng, dim, band as i64);
    let vel_modes = draw_modes(&mut rng, dim, band as i64);
    let phase = |m: &[i64; 2], x: &[f64]| (0..dim).map(|j| q[j] * m[j] as f64 * x[j]).sum::<f64>();
    let size = |m: &[i64; 2]| ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt();
    let eta = Field::from_fn(grid.clone(), |x| {
        eta_modes
            .iter()
            .map(|md| {
                let th = phase(&md.m, x);
                amplitude / size(&md.m) * (md.alpha * th.cos() + md.beta * th.sin())
            })
            .sum()
    })?;
    let vel = if dim == 1 {
        vec![Field::from_fn(grid.clone(), |x| {
            vel_modes
                .iter()
                .map(|md| {
                    let th = phase(&md.m, x);
                    amplitude / size(&md.m) * (md.alpha * th.cos() + md.beta * th.sin())
                })
                .sum()
        })?]
    } else {
        (0..2)
            .map(|j| {
                Field::from_fn(grid.clone(), |x| {
                    vel_modes
                        .iter()
                        .map(|md| {
                            let th = phase(&md.m, x);
                            let w = amplitude / size(&md.m).powi(2);
                            // d/dx_j of w (alpha cos th + beta sin th)
                            w * q[j] * md.m[j] as f64 * (-md.alpha * th.sin() + md.beta * th.cos())
                        })
                        .sum()
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    WaveState::new(eta, vel, 0.0)
}
