use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;

/// Helmholtz projection of a 2D velocity onto gradients,
/// `v^ -> xi (xi . v^) / |xi|^2`. Modes where `xi~` vanishes (the mean and
/// the Nyquist slots) pass through unchanged.
pub fn curl_free_project(vel: &[Field]) -> Result<Vec<Field>> {
    if vel.len() != 2 {
        return Err(Error::Unsupported(format!(
            "curl-free projection needs a 2D velocity, got {} component(s)",
            vel.len()
        )));
    }
    if !vel[0].same_grid(&vel[1]) {
        return Err(Error::GridMismatch);
    }
    let grid = vel[0].grid();
    if grid.dim() != 2 {
        return Err(Error::Unsupported("curl-free projection needs a 2D grid".into()));
    }
    let (a, b) = (vel[0].coefficients(), vel[1].coefficients());
    let mut p1 = a.to_vec();
    let mut p2 = b.to_vec();
    for idx in 0..grid.len() {
        if grid.is_nyquist(idx) {
            continue;
        }
        let xi = grid.wavevector(idx);
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        if r2 == 0.0 {
            continue;
        }
        let dot: Complex64 = (xi[0] * a[idx] + xi[1] * b[idx]) / r2;
        p1[idx] = xi[0] * dot;
        p2[idx] = xi[1] * dot;
    }
    Ok(vec![
        Field::from_coefficients(grid.clone(), p1)?,
        Field::from_coefficients(grid.clone(), p2)?,
    ])
}
