use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{ExperimentConfig, GroundTruth};
use crate::active::{estimated_box, sample_box_rays};
use crate::error::{Error, Result};
use crate::geometry::{ray_mesh_intersect, Point3, PointCloud, Ray, TriangleMesh};
use crate::tiqf::{BeliefState, PoseEstimate};

const MAX_CONSECUTIVE_MISSES: usize = 1000;

fn symmetric<R: Rng + ?Sized>(rng: &mut R, half_width: f64) -> f64 {
    if half_width == 0.0 {
        0.0
    } else {
        rng.random_range(-half_width..=half_width)
    }
}

/// Uniform translation per axis and uniform XYZ intrinsic Euler angles.
pub fn sample_ground_truth(config: &ExperimentConfig, seed: u64) -> GroundTruth {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = config.translation_range;
    let translation = Vector3::new(symmetric(&mut rng, t), symmetric(&mut rng, t), symmetric(&mut rng, t));
    let r = config.rotation_range_deg.to_radians();
    let (a, b, c) = (symmetric(&mut rng, r), symmetric(&mut rng, r), symmetric(&mut rng, r));
    let rotation = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), a)
        * UnitQuaternion::from_axis_angle(&Vector3::y_axis(), b)
        * UnitQuaternion::from_axis_angle(&Vector3::z_axis(), c);
    GroundTruth {
        pose: crate::geometry::RigidPose::new(rotation, translation),
    }
}

/// Casts `ray` against the mesh at the true pose and perturbs the hit with
/// per-axis Gaussian noise.
pub fn simulate_touch<R: Rng + ?Sized>(
    ray: &Ray,
    mesh: &TriangleMesh,
    truth: &GroundTruth,
    noise_std: f64,
    rng: &mut R,
) -> Option<Point3> {
    let hit = ray_mesh_intersect(ray, mesh, &truth.pose)?;
    if noise_std == 0.0 {
        return Some(hit.point);
    }
    let normal = Normal::new(0.0, noise_std).expect("finite non-negative std");
    let noise = Vector3::from_fn(|_, _| normal.sample(rng));
    Some(hit.point + noise)
}

/// Random touches on the inflated box around the true pose until
/// `config.bootstrap_touches` contacts are collected.
pub fn bootstrap<R: Rng + ?Sized>(
    mesh: &TriangleMesh,
    model: &PointCloud,
    truth: &GroundTruth,
    config: &ExperimentConfig,
    rng: &mut R,
) -> Result<PointCloud> {
    let at_truth = PoseEstimate::prior(BeliefState::isotropic(truth.pose.rotation, 1.0), truth.pose.translation);
    let aabb = estimated_box(&at_truth, &model.points, config.box_inflation)?;
    let mut contacts = PointCloud::default();
    let mut misses = 0;
    while contacts.len() < config.bootstrap_touches {
        let action = sample_box_rays(&aabb, 1, rng)[0];
        match simulate_touch(&action.ray, mesh, truth, config.noise_std, rng) {
            Some(p) => {
                contacts.push(p);
                misses = 0;
            }
            None => {
                misses += 1;
                if misses > MAX_CONSECUTIVE_MISSES {
                    return Err(Error::Simulation(format!(
                        "{MAX_CONSECUTIVE_MISSES} consecutive bootstrap rays missed the object"
                    )));
                }
            }
        }
    }
    Ok(contacts)
}
