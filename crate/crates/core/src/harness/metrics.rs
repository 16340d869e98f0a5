use crate::error::{Error, Result};
use crate::geometry::{KdTree, PointCloud, RigidPose};
use crate::tiqf::quaternion_to_vector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseErrors {
    pub pos_err_m: f64,
    pub rot_err_deg: f64,
    pub adi_m: f64,
    pub quat_err: f64,
}

/// Geodesic angle `2·acos|⟨q̂, q⟩|` in degrees.
pub fn rotation_error_deg(estimate: &RigidPose, truth: &RigidPose) -> f64 {
    let dot = quaternion_to_vector(&estimate.rotation).dot(&quaternion_to_vector(&truth.rotation));
    (2.0 * dot.abs().min(1.0).acos()).to_degrees()
}

/// Distance between the two unit quaternions after sign alignment.
pub fn quaternion_error_norm(estimate: &RigidPose, truth: &RigidPose) -> f64 {
    let a = quaternion_to_vector(&estimate.rotation);
    let b = quaternion_to_vector(&truth.rotation);
    (a - b).norm().min((a + b).norm())
}

/// Mean over model points posed at `estimate` of the distance to the
/// closest model point posed at `truth`.
pub fn adi(estimate: &RigidPose, truth: &RigidPose, model: &PointCloud) -> Result<f64> {
    if model.is_empty() {
        return Err(Error::invalid("empty model cloud"));
    }
    let tree = KdTree::new(&model.transformed(truth))?;
    let sum: f64 = model.iter().map(|o| tree.nearest(&estimate.transform_point(o)).1).sum();
    Ok(sum / model.len() as f64)
}

pub fn pose_errors(estimate: &RigidPose, truth: &RigidPose, model: &PointCloud) -> Result<PoseErrors> {
    Ok(PoseErrors {
        pos_err_m: (estimate.translation - truth.translation).norm(),
        rot_err_deg: rotation_error_deg(estimate, truth),
        adi_m: adi(estimate, truth, model)?,
        quat_err: quaternion_error_norm(estimate, truth),
    })
}
