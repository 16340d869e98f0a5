//! Tactile pose estimation with a translation-invariant quaternion Kalman
//! filter (TIQF) and information-gain driven touch selection.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`] holds meshes, point clouds, rigid poses, ray casting and
//!   nearest-neighbor search.
//! * [`tiqf`] estimates a rigid pose from point contacts by filtering the
//!   rotation quaternion with a linear pseudo-measurement model.
//! * [`infogain`] implements closed-form divergences between Gaussian beliefs.
//! * [`active`] samples probe rays, predicts their contacts, and picks the
//!   one whose one-step lookahead posterior diverges most from the current
//!   belief.
//! * [`harness`] runs seeded simulated experiments and writes CSV reports.
//!
//! ```
//! use tiqf_core::geometry::{PointCloud, RigidPose, TriangleMesh};
//! use tiqf_core::tiqf::{run_tiqf, BeliefState, FilterConfig};
//! use nalgebra::{UnitQuaternion, Vector3};
//!
//! let model = TriangleMesh::cuboid(Vector3::new(0.05, 0.03, 0.02)).vertex_cloud();
//! let truth = RigidPose::new(
//!     UnitQuaternion::from_euler_angles(0.1, -0.05, 0.2),
//!     Vector3::new(0.01, 0.0, -0.02),
//! );
//! let contacts = model.transformed(&truth);
//! let prior = BeliefState::isotropic(UnitQuaternion::identity(), 1e4);
//! let estimate = run_tiqf(&model, &contacts, &prior, &FilterConfig::default()).unwrap();
//! assert!(estimate.pose.rotation.angle_to(&truth.rotation) < 1e-3);
//! //! ```

pub mod active;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod infogain;
pub mod tiqf;

pub use active::{LookaheadResult, PlannerConfig, PlanningContext, Selection, TouchAction};
pub use error::{Error, Result};
pub use geometry::{Aabb, PointCloud, Ray, RigidPose, TriangleMesh};
pub use harness::{ExperimentConfig, TouchRecord};
pub use infogain::{DivergenceCriterion, GaussianParams};
pub use tiqf::{BeliefState, Correspondence, FilterConfig, PoseEstimate};
