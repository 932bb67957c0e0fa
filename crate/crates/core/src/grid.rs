//! Periodic sampling lattices and their spectral transforms.
//!
//! Coefficient convention, used everywhere in the crate: on a grid with `N`
//! points covering a box of volume `V`,
//!
//! ```text
//! c_k = sqrt(V) / N * sum_j f_j exp(-i k.x_j)
//! f_j = 1 / sqrt(V) * sum_k c_k exp(+i k.x_j)
//! ```
//!
//! so that the grid quadrature `V/N * sum_j |f_j|^2` equals `sum_k |c_k|^2`
//! and the coefficients of a band-limited function do not depend on the
//! resolution. Coefficients are stored in FFT order (`0, 1, .., n/2-1, -n/2,
//! .., -1` along every axis, row-major with the first axis slowest).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub struct Grid {
    shape: Vec<usize>,
    lengths: Vec<f64>,
    /// Per-axis wavenumbers in FFT order.
    axis_wavenumbers: Vec<Vec<f64>>,
    /// Per flat index: wavevector components.
    xi: Vec<[f64; 2]>,
    /// Per flat index: Euclidean magnitude of the wavevector.
    abs_xi: Vec<f64>,
    nyquist: Vec<bool>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("shape", &self.shape)
            .field("lengths", &self.lengths)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.lengths == other.lengths
    }
}

/// Signed integer mode index of FFT slot `i` on an axis of `n` points.
pub fn mode_of(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn slot_of(mode: i64, n: usize) -> usize {
    mode.rem_euclid(n as i64) as usize
}

impl Grid {
    pub fn new(shape: &[usize], lengths: &[f64]) -> Result<Arc<Self>> {
        if shape.is_empty() || shape.len() > 2 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {}",
                shape.len()
            )));
        }
        if shape.len() != lengths.len() {
            return Err(Error::InvalidGrid(
                "shape and lengths must have one entry per axis".into(),
            ));
        }
        for (axis, (&n, &l)) in shape.iter().zip(lengths).enumerate() {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: n = {n} must be even and at least 4"
                )));
            }
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: period {l} must be positive and finite"
                )));
            }
        }

        let axis_wavenumbers: Vec<Vec<f64>> = shape
            .iter()
            .zip(lengths)
            .map(|(&n, &l)| {
                (0..n)
                    .map(|i| 2.0 * std::f64::consts::PI * mode_of(i, n) as f64 / l)
                    .collect()
            })
            .collect();

        let total: usize = shape.iter().product();
        let mut xi = Vec::with_capacity(total);
        let mut nyquist = Vec::with_capacity(total);
        for idx in 0..total {
            let slots = unflatten(idx, shape);
            let mut v = [0.0; 2];
            let mut nyq = false;
            for axis in 0..shape.len() {
                v[axis] = axis_wavenumbers[axis][slots[axis]];
                nyq |= slots[axis] == shape[axis] / 2;
            }
            xi.push(v);
            nyquist.push(nyq);
        }
        let abs_xi = xi.iter().map(|v| v[0].hypot(v[1])).collect();

        let mut planner = FftPlanner::new();
        let forward = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();

        Ok(Arc::new(Self {
            shape: shape.to_vec(),
            lengths: lengths.to_vec(),
            axis_wavenumbers,
            xi,
            abs_xi,
            nyquist,
            forward,
            inverse,
        }))
    }

    pub fn new_1d(n: usize, length: f64) -> Result<Arc<Self>> {
        Self::new(&[n], &[length])
    }

    /// Square 2D grid with `n` points and period `length` on both axes.
    pub fn new_2d(n: usize, length: f64) -> Result<Arc<Self>> {
        Self::new(&[n, n], &[length, length])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    pub fn axis_wavenumbers(&self, axis: usize) -> &[f64] {
        &self.axis_wavenumbers[axis]
    }

    /// Wavevector at a flat coefficient index (second component is zero in 1D).
    pub fn wavevector(&self, idx: usize) -> [f64; 2] {
        self.xi[idx]
    }

    pub fn wavevectors(&self) -> &[[f64; 2]] {
        &self.xi
    }

    pub fn abs_wavenumbers(&self) -> &[f64] {
        &self.abs_xi
    }

    /// True when any axis of this coefficient sits on the unpaired Nyquist slot.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        self.nyquist[idx]
    }

    /// Signed integer modes of a flat coefficient index.
    pub fn modes(&self, idx: usize) -> [i64; 2] {
        let slots = unflatten(idx, &self.shape);
        let mut m = [0; 2];
        for axis in 0..self.dim() {
            m[axis] = mode_of(slots[axis], self.shape[axis]);
        }
        m
    }

    /// Flat index of the mode `-m` (slots on the Nyquist line map to themselves).
    pub fn negated_index(&self, idx: usize) -> usize {
        let slots = unflatten(idx, &self.shape);
        let mut f = 0;
        for axis in 0..self.dim() {
            let n = self.shape[axis];
            f = f * n + (n - slots[axis]) % n;
        }
        f
    }

    pub fn max_abs_wavenumber(&self) -> f64 {
        self.abs_xi.iter().cloned().fold(0.0, f64::max)
    }

    /// Sample coordinates along one axis: `x_j = j L / n`.
    pub fn coordinates(&self, axis: usize) -> Vec<f64> {
        let n = self.shape[axis];
        let h = self.lengths[axis] / n as f64;
        (0..n).map(|j| j as f64 * h).collect()
    }

    /// Sample a function of the position vector on every grid point.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let coords: Vec<Vec<f64>> = (0..self.dim()).map(|a| self.coordinates(a)).collect();
        (0..self.len())
            .map(|idx| {
                let slots = unflatten(idx, &self.shape);
                let mut x = [0.0; 2];
                for axis in 0..self.dim() {
                    x[axis] = coords[axis][slots[axis]];
                }
                f(&x[..self.dim()])
            })
            .collect()
    }

    /// Grid quadrature `V/N * sum_j f_j`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.cell_volume() * values.iter().sum::<f64>()
    }

    /// Two-thirds rule: keep coefficients with `3|m| < n` on every axis.
    pub fn dealias_mask(&self) -> Vec<bool> {
        (0..self.len())
            .map(|idx| {
                let m = self.modes(idx);
                (0..self.dim()).all(|a| 3 * m[a].unsigned_abs() < self.shape[a] as u64)
            })
            .collect()
    }

    /// Mask that only removes the Nyquist slots.
    pub fn resolved_mask(&self) -> Vec<bool> {
        self.nyquist.iter().map(|&q| !q).collect()
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let data = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_complex(data)
    }

    pub fn forward_complex(&self, mut data: Vec<Complex64>) -> Vec<Complex64> {
        self.transform_in_place(&mut data, true);
        let scale = self.volume().sqrt() / self.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        data
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut data = coeffs.to_vec();
        self.transform_in_place(&mut data, false);
        let scale = 1.0 / self.volume().sqrt();
        data.iter_mut().for_each(|c| *c *= scale);
        data
    }

    /// Inverse transform keeping only the real part.
    pub fn inverse_real(&self, coeffs: &[Complex64]) -> Vec<f64> {
        self.inverse(coeffs).into_iter().map(|c| c.re).collect()
    }

    fn transform_in_place(&self, data: &mut [Complex64], forward: bool) {
        let plans = if forward { &self.forward } else { &self.inverse };
        match self.dim() {
            1 => plans[0].process(data),
            _ => {
                let (n0, n1) = (self.shape[0], self.shape[1]);
                plans[1].process(data);
                let mut t = transpose(data, n0, n1);
                plans[0].process(&mut t);
                data.copy_from_slice(&transpose(&t, n1, n0));
            }
        }
    }

    /// Same box, `factor` times as many points per axis.
    pub fn refined(&self, factor: usize) -> Result<Arc<Grid>> {
        let shape: Vec<usize> = self.shape.iter().map(|n| n * factor).collect();
        Grid::new(&shape, &self.lengths)
    }

    /// Map coefficients onto a finer grid of the same box (trigonometric
    /// interpolation). The Nyquist coefficient is split evenly between the
    /// two fine modes `+-n/2` so the interpolant stays real.
    pub fn pad_coefficients(&self, coeffs: &[Complex64], fine: &Grid) -> Result<Vec<Complex64>> {
        if fine.dim() != self.dim()
            || fine.lengths != self.lengths
            || fine.shape.iter().zip(&self.shape).any(|(f, c)| f < c)
        {
            return Err(Error::GridMismatch);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); fine.len()];
        for (idx, &c) in coeffs.iter().enumerate() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let slots = unflatten(idx, &self.shape);
            let mut targets: Vec<(usize, f64)> = vec![(0, 1.0)];
            for axis in 0..self.dim() {
                let n = self.shape[axis];
                let nf = fine.shape[axis];
                let m = mode_of(slots[axis], n);
                let choices: Vec<(i64, f64)> = if nf > n && slots[axis] == n / 2 {
                    vec![(m, 0.5), (-m, 0.5)]
                } else {
                    vec![(m, 1.0)]
                };
                let mut next = Vec::with_capacity(targets.len() * choices.len());
                for &(base, w) in &targets {
                    for &(mode, wc) in &choices {
                        next.push((base * nf + slot_of(mode, nf), w * wc));
                    }
                }
                targets = next;
            }
            for (t, w) in targets {
                out[t] += c * w;
            }
        }
        Ok(out)
    }

    /// Keep only the coarse modes of fine-grid coefficients (spectral restriction).
    pub fn restrict_coefficients(&self, fine_coeffs: &[Complex64], fine: &Grid) -> Result<Vec<Complex64>> {
        if fine.dim() != self.dim() || fine.lengths != self.lengths {
            return Err(Error::GridMismatch);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        for (idx, slot) in out.iter_mut().enumerate() {
            let m = self.modes(idx);
            if (0..self.dim()).any(|a| 2 * m[a].unsigned_abs() >= self.shape[a] as u64) {
                continue;
            }
            let mut f = 0;
            for axis in 0..self.dim() {
                f = f * fine.shape[axis] + slot_of(m[axis], fine.shape[axis]);
            }
            *slot = fine_coeffs[f];
        }
        Ok(out)
    }
}

fn unflatten(idx: usize, shape: &[usize]) -> [usize; 2] {
    match shape.len() {
        1 => [idx, 0],
        _ => [idx / shape[1], idx % shape[1]],
    }
}

fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid::new_1d(3, 1.0).is_err());
        assert!(Grid::new_1d(2, 1.0).is_err());
        assert!(Grid::new_1d(8, 0.0).is_err());
        assert!(Grid::new(&[8, 8, 8], &[1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn wavenumbers_are_symmetric_except_nyquist() {
        let g = Grid::new_1d(8, 2.0 * PI).unwrap();
        let k = g.axis_wavenumbers(0);
        assert_eq!(k, &[0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
        assert!(g.is_nyquist(4));
        assert!(!g.is_nyquist(3));
    }

    #[test]
    fn cosine_has_two_coefficients() {
        let g = Grid::new_1d(16, 2.0 * PI).unwrap();
        let c = g.forward(&g.sample(|x| x[0].cos()));
        for (i, ci) in c.iter().enumerate() {
            if i == 1 || i == 15 {
                assert!((ci.re - (2.0 * PI).sqrt() / 2.0).abs() < 1e-14);
            } else {
                assert!(ci.norm() < 1e-14, "slot {i}: {ci}");
            }
        }
    }

    #[test]
    fn round_trip_2d() {
        let g = Grid::new(&[8, 16], &[1.0, 3.0]).unwrap();
        let v = g.sample(|x| (2.0 * PI * x[0]).sin() * (x[1] * 0.7).cos() + x[0] * x[1]);
        let back = g.inverse_real(&g.forward(&v));
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn padding_preserves_function() {
        let g = Grid::new_1d(16, 2.0 * PI).unwrap();
        let fine = g.refined(2).unwrap();
        let f = |x: &[f64]| (3.0 * x[0]).sin() + 0.5 * (2.0 * x[0]).cos();
        let c = g.pad_coefficients(&g.forward(&g.sample(f)), &fine).unwrap();
        let vals = fine.inverse_real(&c);
        for (a, b) in vals.iter().zip(fine.sample(f)) {
            assert!((a - b).abs() < 1e-13);
        }
        let back = g.restrict_coefficients(&c, &fine).unwrap();
        let direct = g.forward(&g.sample(f));
        for (a, b) in back.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn dealias_mask_counts() {
        let g = Grid::new_1d(256, 2.0 * PI).unwrap();
        let kept = g.dealias_mask().iter().filter(|&&b| b).count();
        // modes -85..=85
        assert_eq!(kept, 171);
    }
}
