//! Closed-form divergences between 4-D Gaussian beliefs, used to score
//! candidate touches by how far the lookahead posterior moves from the
//! current belief.

mod divergence;
mod linalg;

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::tiqf::BeliefState;

pub use divergence::{bhattacharyya_distance, fisher_metric, kl_divergence, renyi_divergence, wasserstein2_squared};
pub use linalg::{log_det_spd, regularize_spd, sqrtm_psd};

/// Dimension of the quaternion state.
pub const DIM: usize = 4;

/// `N(mean, covariance)` over the quaternion state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub mean: Vector4<f64>,
    pub covariance: Matrix4<f64>,
}

impl GaussianParams {
    /// Checks symmetry and positive semidefiniteness, both relative to the
    /// covariance scale with tolerance 1e-9.
    pub fn new(mean: Vector4<f64>, covariance: Matrix4<f64>) -> Result<Self> {
        if !mean.iter().chain(covariance.iter()).all(|v| v.is_finite()) {
            return Err(Error::invalid("non-finite Gaussian parameters"));
        }
        let scale = covariance.amax().max(1.0);
        if (covariance - covariance.transpose()).amax() > 1e-9 * scale {
            return Err(Error::invalid("covariance is not symmetric"));
        }
        let min_eig = covariance.symmetric_eigenvalues().min();
        if min_eig < -1e-9 * scale {
            return Err(Error::invalid(format!("covariance has eigenvalue {min_eig:e}")));
        }
        Ok(Self { mean, covariance })
    }

    pub fn from_belief(belief: &BeliefState) -> Self {
        Self {
            mean: belief.mean,
            covariance: belief.covariance,
        }
    }
}

impl From<&BeliefState> for GaussianParams {
    fn from(b: &BeliefState) -> Self {
        Self::from_belief(b)
    }
}

/// The information-gain criteria the planner can maximize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceCriterion {
    Kl,
    Renyi { alpha: f64 },
    Fisher,
    Bhattacharyya,
    Wasserstein2,
}

impl DivergenceCriterion {
    pub const DEFAULT_RENYI_ALPHA: f64 = 0.3;

    pub fn renyi(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self::Renyi { alpha })
    }

    /// All five criteria, Rényi with `alpha`.
    pub fn all(alpha: f64) -> Vec<Self> {
        vec![
            Self::Kl,
            Self::Renyi { alpha },
            Self::Fisher,
            Self::Bhattacharyya,
            Self::Wasserstein2,
        ]
    }

    /// Short lowercase name, as used on the command line and in CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Kl => "kl",
            Self::Renyi { .. } => "renyi",
            Self::Fisher => "fisher",
            Self::Bhattacharyya => "bhattacharyya",
            Self::Wasserstein2 => "wasserstein",
        }
    }

    /// `D(posterior ‖ prior)`.
    pub fn evaluate(&self, posterior: &GaussianParams, prior: &GaussianParams) -> Result<f64> {
        evaluate(self, posterior, prior)
    }
}

impl fmt::Display for DivergenceCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DivergenceCriterion {
    type Err = Error;

    /// Parses a criterion name; Rényi gets the default alpha.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "kl" => Self::Kl,
            "renyi" => Self::Renyi {
                alpha: Self::DEFAULT_RENYI_ALPHA,
            },
            "fisher" => Self::Fisher,
            "bhattacharyya" => Self::Bhattacharyya,
            "wasserstein" | "wasserstein2" => Self::Wasserstein2,
            other => return Err(Error::invalid(format!("unknown criterion '{other}'"))),
        })
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) || alpha == 1.0 {
        return Err(Error::invalid(format!(
            "Rényi alpha must be in (0,1)∪(1,∞), got {alpha}"
        )));
    }
    Ok(())
}

/// Dispatches to the closed form for `criterion` with argument order
/// `(posterior, prior)`.
pub fn evaluate(criterion: &DivergenceCriterion, posterior: &GaussianParams, prior: &GaussianParams) -> Result<f64> {
    match *criterion {
        DivergenceCriterion::Kl => kl_divergence(posterior, prior),
        DivergenceCriterion::Renyi { alpha } => renyi_divergence(posterior, prior, alpha),
        DivergenceCriterion::Fisher => fisher_metric(posterior, prior),
        DivergenceCriterion::Bhattacharyya => bhattacharyya_distance(posterior, prior),
        DivergenceCriterion::Wasserstein2 => wasserstein2_squared(posterior, prior),
    }
}
