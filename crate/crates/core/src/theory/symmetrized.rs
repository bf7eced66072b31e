//! The Jacobian conjugated by a constant linear change of variables and
//! symmetrised, whose eigenvalues drive the dimension estimate.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::model::{jacobian, StateVec, SystemParams};

/// `rho = sigma / sqrt(sigma r + (sigma - b)(b - 1))`.
pub fn rho(p: &SystemParams) -> Result<f64> {
    let (s, r, b) = (p.sigma(), p.r(), p.b());
    let d = s * r + (s - b) * (b - 1.0);
    if d > 0.0 {
        Ok(s / d.sqrt())
    } else {
        Err(Error::RhoUndefined { value: d })
    }
}

/// The change of variables `S`.
pub fn transform_matrix(p: &SystemParams) -> Result<Matrix3<f64>> {
    let rho = rho(p)?;
    Ok(Matrix3::new(
        -1.0 / rho,
        0.0,
        0.0,
        -(p.b() - 1.0) / p.sigma(),
        1.0,
        0.0,
        0.0,
        0.0,
        1.0,
    ))
}

/// `(S J S^-1 + (S J S^-1)^T) / 2` at `s`.
pub fn symmetrized_jacobian(p: &SystemParams, s: &StateVec) -> Result<Matrix3<f64>> {
    let t = transform_matrix(p)?;
    let t_inv = t.try_inverse().ok_or(Error::RhoUndefined { value: 0.0 })?;
    let m = t * jacobian(p, s) * t_inv;
    Ok(0.5 * (m + m.transpose()))
}

/// Closed-form eigenvalues of [`symmetrized_jacobian`], sorted
/// non-increasing. The middle one is always `-b`.
pub fn symmetrized_eigenvalues(p: &SystemParams, s: &StateVec) -> Result<[f64; 3]> {
    let rho = rho(p)?;
    let (sigma, b) = (p.sigma(), p.b());
    let shear = s.y + (b - 1.0) * s.x / sigma;
    let bracket = (sigma - 2.0 * b + 1.0).powi(2) + (2.0 * sigma / rho - rho * s.z).powi(2) + rho * rho * shear * shear;
    let half = 0.5 * bracket.sqrt();
    let centre = -0.5 * (sigma + 1.0);
    Ok([centre + half, -b, centre - half])
}
