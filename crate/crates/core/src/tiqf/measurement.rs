use nalgebra::{Matrix3, Matrix4};

use crate::error::{Error, Result};
use crate::geometry::Vector3;

use super::Correspondence;

/// Below this length a difference vector is treated as zero.
const COINCIDENT_EPS: f64 = 1e-12;

/// Cross-product matrix: `skew(a) * b == a × b`.
pub fn skew(v: &Vector3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Pseudo-measurement matrix for one pair of correspondences.
///
/// With `b = s_j − s_i` and `r = o_j − o_i`,
///
/// ```text
///     H = | 0        −(b − r)ᵀ |
///         | (b − r)  [b + r]ₓ  |
/// ```
///
/// which is `L(b) − R(r)` for the quaternion left/right product matrices,
/// so `H x = 0` exactly when `x ⊙ r ⊙ x* = b`.
pub fn pair_difference_measurement(ci: &Correspondence, cj: &Correspondence) -> Result<Matrix4<f64>> {
    let b = cj.scene - ci.scene;
    let r = cj.model - ci.model;
    if b.norm() < COINCIDENT_EPS || r.norm() < COINCIDENT_EPS {
        return Err(Error::DegeneratePair);
    }
    let d = b - r;
    let mut h = Matrix4::zeros();
    h.fixed_view_mut::<1, 3>(0, 1).copy_from(&(-d.transpose()));
    h.fixed_view_mut::<3, 1>(1, 0).copy_from(&d);
    h.fixed_view_mut::<3, 3>(1, 1).copy_from(&skew(&(b + r)));
    Ok(h)
}
