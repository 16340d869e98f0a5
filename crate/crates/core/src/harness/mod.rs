//! Simulated active-touch experiments.
//!
//! Each (criterion, run) cell samples a ground-truth displacement of the
//! object, collects random bootstrap touches, then alternates planning,
//! touching the true object and re-estimating until the touch budget is
//! spent. Output is a flat list of [`TouchRecord`]s plus CSV writers.

mod experiment;
mod metrics;
mod report;
mod simulate;

use std::path::PathBuf;

use crate::active::TouchAction;
use crate::error::{Error, Result};
use crate::geometry::{Point3, RigidPose};
use crate::infogain::DivergenceCriterion;

pub use experiment::{run_experiment, run_experiment_with_mesh, ExperimentOutput, RunFailure};
pub use metrics::{adi, pose_errors, quaternion_error_norm, rotation_error_deg, PoseErrors};
pub use report::{quantile, summarize, write_records_csv, write_summary_csv, SummaryRow, RECORDS_HEADER};
pub use simulate::{bootstrap, sample_ground_truth, simulate_touch};

/// The true displacement of the object in the world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub pose: RigidPose,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mesh_path: PathBuf,
    pub criteria: Vec<DivergenceCriterion>,
    pub runs: usize,
    pub max_touches: usize,
    pub bootstrap_touches: usize,
    /// Per-axis standard deviation of contact noise (m).
    pub noise_std: f64,
    /// Half-width of the uniform translation range per axis (m).
    pub translation_range: f64,
    /// Half-width of the uniform range per Euler angle (degrees).
    pub rotation_range_deg: f64,
    pub initial_covariance_scale: f64,
    /// Points sampled uniformly on the surface and added to the mesh
    /// vertices to form the cloud the filter registers against.
    pub model_surface_points: usize,
    pub filter: crate::tiqf::FilterConfig,
    /// Planner settings; `criterion` and `rng_seed` are set per cell.
    pub candidates_per_step: usize,
    pub box_inflation: f64,
    pub master_seed: u64,
    /// When false, timing columns are left empty so output is reproducible
    /// byte for byte.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mesh_path: PathBuf::from("data/bunny.ply"),
            criteria: DivergenceCriterion::all(DivergenceCriterion::DEFAULT_RENYI_ALPHA),
            runs: 6,
            max_touches: 15,
            bootstrap_touches: 3,
            noise_std: 5e-3,
            translation_range: 0.05,
            rotation_range_deg: 30.0,
            initial_covariance_scale: 1e4,
            model_surface_points: 100_000,
            filter: crate::tiqf::FilterConfig::default(),
            candidates_per_step: 30,
            box_inflation: 0.02,
            master_seed: 0,
            record_timing: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.criteria.is_empty() {
            return Err(Error::invalid("at least one criterion is required"));
        }
        if self.runs == 0 {
            return Err(Error::invalid("runs must be positive"));
        }
        if self.bootstrap_touches < crate::tiqf::MIN_CONTACTS {
            return Err(Error::invalid(format!(
                "bootstrap_touches must be at least {}",
                crate::tiqf::MIN_CONTACTS
            )));
        }
        if self.max_touches < self.bootstrap_touches {
            return Err(Error::invalid("max_touches must be at least bootstrap_touches"));
        }
        for (name, v) in [
            ("noise_std", self.noise_std),
            ("translation_range", self.translation_range),
            ("rotation_range_deg", self.rotation_range_deg),
            ("box_inflation", self.box_inflation),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite and non-negative")));
            }
        }
        if !(self.initial_covariance_scale > 0.0 && self.initial_covariance_scale.is_finite()) {
            return Err(Error::invalid("initial_covariance_scale must be positive"));
        }
        if self.candidates_per_step == 0 {
            return Err(Error::invalid("candidates_per_step must be positive"));
        }
        self.filter.validate()
    }
}

/// One row of experiment output: the state after a touch.
#[derive(Debug, Clone, PartialEq)]
pub struct TouchRecord {
    pub run_id: usize,
    pub criterion: DivergenceCriterion,
    /// 1-based count of contacts gathered so far.
    pub touch_index: usize,
    /// `None` for bootstrap touches.
    pub selected_action: Option<TouchAction>,
    pub contact_point: Point3,
    pub pos_err_m: f64,
    pub rot_err_deg: f64,
    pub adi_m: f64,
    /// Norm of the difference of sign-aligned unit quaternions.
    pub quat_err: f64,
    pub gain: Option<f64>,
    pub planning_ms: Option<f64>,
    pub filter_ms: Option<f64>,
    pub fallback: bool,
}
