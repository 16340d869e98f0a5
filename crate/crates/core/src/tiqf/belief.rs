use nalgebra::{Matrix4, Quaternion, UnitQuaternion, Vector4};

use crate::error::{Error, Result};

use super::FilterConfig;

/// Gaussian belief over the rotation quaternion, stored scalar first
/// `(w, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefState {
    pub mean: Vector4<f64>,
    pub covariance: Matrix4<f64>,
}

impl BeliefState {
    pub fn new(mean: Vector4<f64>, covariance: Matrix4<f64>) -> Self {
        Self { mean, covariance }
    }

    /// Mean at `rotation` with covariance `variance · I₄`.
    pub fn isotropic(rotation: UnitQuaternion<f64>, variance: f64) -> Self {
        Self::new(quaternion_to_vector(&rotation), Matrix4::identity() * variance)
    }

    pub fn rotation(&self) -> UnitQuaternion<f64> {
        quaternion_from_vector(&self.mean)
    }
}

/// Scalar-first coefficient vector of a quaternion.
pub fn quaternion_to_vector(q: &UnitQuaternion<f64>) -> Vector4<f64> {
    Vector4::new(q.w, q.i, q.j, q.k)
}

/// Normalizes a scalar-first 4-vector into a rotation.
pub fn quaternion_from_vector(v: &Vector4<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::from_quaternion(Quaternion::new(v[0], v[1], v[2], v[3]))
}

/// State-dependent pseudo-measurement noise
/// `Σʰ = ¼ρ [tr(x̄x̄ᵀ + Σ̄) I₄ − (x̄x̄ᵀ + Σ̄)]`.
pub fn measurement_noise(belief: &BeliefState, rho: f64) -> Matrix4<f64> {
    let second_moment = belief.mean * belief.mean.transpose() + belief.covariance;
    (Matrix4::identity() * second_moment.trace() - second_moment) * (0.25 * rho)
}

/// Rescales the belief so the mean is a unit quaternion:
/// `x̄ = x/‖x‖`, `Σ̄ = Σ/‖x‖²`.
pub fn normalize_belief(belief: &BeliefState) -> Result<BeliefState> {
    let norm = belief.mean.norm();
    if norm.is_nan() || norm <= 1e-12 {
        return Err(Error::numerical(format!(
            "cannot normalize quaternion of norm {norm:e}"
        )));
    }
    Ok(BeliefState::new(belief.mean / norm, belief.covariance / (norm * norm)))
}

/// One Kalman correction against the pseudo-measurement `H x = 0`, without
/// the final renormalization.
///
/// `K = Σ̄Hᵀ(HΣ̄Hᵀ + Σʰ)⁻¹`, `x = x̄ − K H x̄`, `Σ = (I − KH)Σ̄`. The
/// covariance is evaluated in Joseph form, which equals `(I − KH)Σ̄` for
/// this gain and stays symmetric positive semidefinite in floating point.
pub fn kalman_step(belief: &BeliefState, h: &Matrix4<f64>, config: &FilterConfig) -> Result<BeliefState> {
    let sigma = &belief.covariance;
    let noise = measurement_noise(belief, config.rho) + Matrix4::identity() * config.covariance_jitter;
    let innovation_cov = h * sigma * h.transpose() + noise;
    let innovation_cov = (innovation_cov + innovation_cov.transpose()) * 0.5;
    let cross = sigma * h.transpose();
    // K = cross · S⁻¹, i.e. Sᵀ Kᵀ = crossᵀ with S symmetric.
    let gain_t = match innovation_cov.cholesky() {
        Some(chol) => chol.solve(&cross.transpose()),
        None => innovation_cov
            .lu()
            .solve(&cross.transpose())
            .ok_or_else(|| Error::numerical("innovation covariance is singular"))?,
    };
    let gain = gain_t.transpose();
    if !gain.iter().all(|v| v.is_finite()) {
        return Err(Error::numerical("non-finite Kalman gain"));
    }
    let mean = belief.mean - gain * (h * belief.mean);
    let i_kh = Matrix4::identity() - gain * h;
    let cov = i_kh * sigma * i_kh.transpose() + gain * noise * gain.transpose();
    Ok(BeliefState::new(mean, (cov + cov.transpose()) * 0.5))
}

/// Kalman correction followed by [`normalize_belief`].
pub fn kalman_update(belief: &BeliefState, h: &Matrix4<f64>, config: &FilterConfig) -> Result<BeliefState> {
    normalize_belief(&kalman_step(belief, h, config)?)
}
