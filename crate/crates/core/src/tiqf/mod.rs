//! Translation-invariant quaternion Kalman filter.
//!
//! Rotation and translation are decoupled: differences between pairs of
//! corresponding points only depend on the rotation, `s_j − s_i = R (o_j − o_i)`.
//! In quaternion form that constraint is linear in the state, `H x = 0`,
//! which is fed to a Kalman filter as a zero-valued pseudo-measurement.
//! Translation is recovered in closed form once the rotation is known, and
//! an ICP-style outer loop refreshes correspondences until the pose settles.

mod belief;
mod estimator;
mod measurement;

pub use belief::{
    kalman_step, kalman_update, measurement_noise, normalize_belief, quaternion_from_vector, quaternion_to_vector,
    BeliefState,
};
pub use estimator::{
    recover_translation, run_tiqf, Correspondence, FilterConfig, PoseEstimate, TiqfSolver, MIN_CONTACTS,
};
pub use measurement::{pair_difference_measurement, skew};
