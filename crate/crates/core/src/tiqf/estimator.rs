use nalgebra::UnitQuaternion;

use crate::error::{Error, Result};
use crate::geometry::{KdTree, Point3, PointCloud, RigidPose, Vector3};

use super::{kalman_update, pair_difference_measurement, BeliefState};

/// A scene point matched to a model point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub scene: Point3,
    pub model: Point3,
}

impl Correspondence {
    pub fn new(scene: Point3, model: Point3) -> Self {
        Self { scene, model }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    /// Scale of the state-dependent pseudo-measurement noise (m²).
    pub rho: f64,
    pub max_outer_iterations: usize,
    /// Geodesic rotation change (rad) below which the outer loop may stop.
    pub convergence_threshold_rotation: f64,
    /// Translation change (m) below which the outer loop may stop.
    pub convergence_threshold_translation: f64,
    /// Added to the innovation covariance diagonal before solving.
    pub covariance_jitter: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            rho: 0.3,
            max_outer_iterations: 100,
            convergence_threshold_rotation: 1e-4,
            convergence_threshold_translation: 1e-5,
            covariance_jitter: 1e-12,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho", self.rho),
            ("convergence_threshold_rotation", self.convergence_threshold_rotation),
            (
                "convergence_threshold_translation",
                self.convergence_threshold_translation,
            ),
            ("covariance_jitter", self.covariance_jitter),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_outer_iterations == 0 {
            return Err(Error::invalid("max_outer_iterations must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseEstimate {
    pub pose: RigidPose,
    pub belief: BeliefState,
    /// Outer iterations performed.
    pub iterations: usize,
    pub converged: bool,
}

impl PoseEstimate {
    /// An estimate that has not consumed any contact yet.
    pub fn prior(belief: BeliefState, translation: Vector3) -> Self {
        Self {
            pose: RigidPose::new(belief.rotation(), translation),
            belief,
            iterations: 0,
            converged: false,
        }
    }
}

/// Least-squares translation for a fixed rotation:
/// `t = centroid(s) − R·centroid(o)`.
pub fn recover_translation(correspondences: &[Correspondence], rotation: &UnitQuaternion<f64>) -> Result<Vector3> {
    if correspondences.is_empty() {
        return Err(Error::invalid("translation from zero correspondences"));
    }
    let n = correspondences.len() as f64;
    let (s, o) = correspondences
        .iter()
        .fold((Vector3::zeros(), Vector3::zeros()), |(s, o), c| {
            (s + c.scene.coords, o + c.model.coords)
        });
    Ok(s / n - rotation * (o / n))
}

/// Minimum number of contacts for a well-posed rotation update.
pub const MIN_CONTACTS: usize = 3;

/// Registration of contacts against a fixed model cloud.
///
/// Holds a k-d tree over the model so repeated runs (one per lookahead
/// candidate) share the index.
#[derive(Debug, Clone)]
pub struct TiqfSolver {
    tree: KdTree,
}

impl TiqfSolver {
    pub fn new(model: &PointCloud) -> Result<Self> {
        Ok(Self {
            tree: KdTree::new(model)?,
        })
    }

    pub fn model(&self) -> &[Point3] {
        self.tree.points()
    }

    /// Nearest model point for each contact, with the model at `pose`.
    pub fn correspondences(&self, contacts: &PointCloud, pose: &RigidPose) -> Vec<Correspondence> {
        let inv = pose.inverse();
        contacts
            .iter()
            .map(|s| {
                // Querying in the model frame is equivalent to querying the posed model.
                let (j, _) = self.tree.nearest(&inv.transform_point(s));
                Correspondence::new(*s, self.tree.points()[j])
            })
            .collect()
    }

    /// Runs the filter starting from `prior` with the model initially at
    /// `translation`.
    ///
    /// Every outer iteration re-matches all contacts and re-consumes the full
    /// list of pair measurements, starting from the prior covariance and the
    /// latest mean.
    pub fn run(
        &self,
        contacts: &PointCloud,
        prior: &BeliefState,
        translation: Vector3,
        config: &FilterConfig,
    ) -> Result<PoseEstimate> {
        config.validate()?;
        if contacts.len() < MIN_CONTACTS {
            return Err(Error::invalid(format!(
                "need at least {MIN_CONTACTS} contacts, got {}",
                contacts.len()
            )));
        }
        let mut belief = super::normalize_belief(prior)?;
        let mut pose = RigidPose::new(belief.rotation(), translation);
        let mut converged = false;
        let mut iterations = 0;

        while iterations < config.max_outer_iterations {
            iterations += 1;
            let corr = self.correspondences(contacts, &pose);
            let start = BeliefState::new(belief.mean, prior.covariance);
            let next = filter_pairs(&corr, start, config)?;

            let mut previous = belief.mean;
            if previous.dot(&next.mean) < 0.0 {
                previous = -previous;
            }
            let rotation = next.rotation();
            let rot_change = super::quaternion_from_vector(&previous).angle_to(&rotation);
            let t = recover_translation(&corr, &rotation)?;
            let trans_change = (t - pose.translation).norm();

            belief = next;
            pose = RigidPose::new(rotation, t);
            if rot_change < config.convergence_threshold_rotation
                && trans_change < config.convergence_threshold_translation
            {
                converged = true;
                break;
            }
        }
        Ok(PoseEstimate {
            pose,
            belief,
            iterations,
            converged,
        })
    }
}

/// Sequential updates over consecutive pairs `(i, i+1)`, closing the loop
/// with `(N−1, 0)` when there are at least three correspondences.
fn filter_pairs(corr: &[Correspondence], mut belief: BeliefState, config: &FilterConfig) -> Result<BeliefState> {
    let n = corr.len();
    let pairs = if n >= 3 { n } else { n.saturating_sub(1) };
    for k in 0..pairs {
        let (i, j) = (k, (k + 1) % n);
        match pair_difference_measurement(&corr[i], &corr[j]) {
            Ok(h) => belief = kalman_update(&belief, &h, config)?,
            Err(Error::DegeneratePair) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(belief)
}

/// Estimates the pose of `model` that explains `contacts`, starting from the
/// rotation of `initial`.
///
/// The starting translation aligns the contact centroid with the rotated
/// model centroid. Use [`TiqfSolver::run`] to warm-start from a known
/// translation instead.
pub fn run_tiqf(
    model: &PointCloud,
    contacts: &PointCloud,
    initial: &BeliefState,
    config: &FilterConfig,
) -> Result<PoseEstimate> {
    let solver = TiqfSolver::new(model)?;
    let translation = match (contacts.centroid(), model.centroid()) {
        (Some(s), Some(o)) => s.coords - initial.rotation() * o.coords,
        _ => Vector3::zeros(),
    };
    solver.run(contacts, initial, translation, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TriangleMesh;
    use crate::tiqf::quaternion_to_vector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pose(rng: &mut ChaCha8Rng, max_deg: f64, max_t: f64) -> RigidPose {
        let r = max_deg.to_radians();
        RigidPose::new(
            UnitQuaternion::from_euler_angles(
                rng.random_range(-r..=r),
                rng.random_range(-r..=r),
                rng.random_range(-r..=r),
            ),
            Vector3::from_fn(|_, _| rng.random_range(-max_t..=max_t)),
        )
    }

    fn residual(corr: &[Correspondence], q: &UnitQuaternion<f64>, t: &Vector3) -> f64 {
        corr.iter().map(|c| (c.scene - (q * c.model + t)).norm_squared()).sum()
    }

    #[test]
    fn translation_examples() {
        let q = UnitQuaternion::identity();
        let offset = Vector3::new(1.0, 2.0, 3.0);
        let corr: Vec<_> = [[0.0, 0.0, 0.0], [1.0, -1.0, 0.5], [3.0, 0.0, 2.0]]
            .iter()
            .map(|o| Correspondence::new(Point3::from(*o) + offset, Point3::from(*o)))
            .collect();
        assert!((recover_translation(&corr, &q).unwrap() - offset).norm() < 1e-12);

        let rot = UnitQuaternion::from_euler_angles(0.4, -0.1, 0.9);
        let single = [Correspondence::new(
            Point3::new(1.0, 1.0, 1.0),
            Point3::new(0.2, 0.0, -0.3),
        )];
        let t = recover_translation(&single, &rot).unwrap();
        assert!((t - (single[0].scene.coords - rot * single[0].model.coords)).norm() < 1e-15);

        assert!(recover_translation(&[], &q).is_err());
    }

    #[test]
    fn translation_from_known_pose_and_least_squares_optimality() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let pose = random_pose(&mut rng, 90.0, 1.0);
            let noise = rng.random_range(0.0..0.01);
            let corr: Vec<_> = (0..10)
                .map(|_| {
                    let o = Point3::new(rng.random(), rng.random(), rng.random());
                    let e = Vector3::from_fn(|_, _| rng.random_range(-noise..=noise));
                    Correspondence::new(pose.transform_point(&o) + e, o)
                })
                .collect();
            let t = recover_translation(&corr, &pose.rotation).unwrap();
            if noise == 0.0 {
                assert!((t - pose.translation).norm() < 1e-9);
            }
            let base = residual(&corr, &pose.rotation, &t);
            for _ in 0..10 {
                let delta = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0)).normalize() * 1e-3;
                assert!(residual(&corr, &pose.rotation, &(t + delta)) >= base);
            }
        }
    }

    #[test]
    fn identity_contacts_converge_to_identity() {
        let model = TriangleMesh::icosphere(0.05, 2).vertex_cloud();
        let model = model.transformed(&RigidPose::new(UnitQuaternion::identity(), Vector3::new(0.0, 0.0, 0.0)));
        let stretched: PointCloud = model.iter().map(|p| Point3::new(p.x * 2.0, p.y, p.z * 0.6)).collect();
        let prior = BeliefState::isotropic(UnitQuaternion::identity(), 1e4);
        let est = run_tiqf(&stretched, &stretched, &prior, &FilterConfig::default()).unwrap();
        assert!(est.pose.translation.norm() < 1e-6);
        assert!(est.pose.rotation.angle() < 1e-6);
        assert!(est.converged);
    }

    #[test]
    fn recovers_known_pose_from_noiseless_contacts() {
        let mesh = crate::geometry::load_mesh(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/bunny.ply")).unwrap();
        let vertices = mesh.vertex_cloud();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let prior = BeliefState::isotropic(UnitQuaternion::identity(), 1e4);
        for _ in 0..20 {
            let axis = nalgebra::Unit::new_normalize(Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0)));
            let truth = RigidPose::new(
                UnitQuaternion::from_axis_angle(&axis, rng.random_range(0.0..30f64.to_radians())),
                Vector3::from_fn(|_, _| rng.random_range(-0.05..=0.05)),
            );
            let model: PointCloud = (0..20)
                .map(|_| vertices.points[rng.random_range(0..vertices.len())])
                .collect();
            let contacts = model.transformed(&truth);
            let est = run_tiqf(&model, &contacts, &prior, &FilterConfig::default()).unwrap();
            let angle = est.pose.rotation_angle_to(&truth).to_degrees();
            let dt = (est.pose.translation - truth.translation).norm();
            assert!(
                angle < 0.5 && dt < 1e-3,
                "angle {angle} deg, dt {dt} m, iters {}",
                est.iterations
            );
            // Pose rotation and belief mean describe the same rotation.
            let q = quaternion_to_vector(&est.pose.rotation);
            assert!((q - est.belief.mean).norm() < 1e-9 || (q + est.belief.mean).norm() < 1e-9);
        }
    }

    #[test]
    fn collinear_contacts_do_not_crash() {
        let model = TriangleMesh::icosphere(0.05, 2).vertex_cloud();
        let contacts = PointCloud::new(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(0.01, 0.0, 0.0),
            Point3::new(0.02, 0.0, 0.0),
        ]);
        let prior = BeliefState::isotropic(UnitQuaternion::identity(), 1e4);
        let est = run_tiqf(&model, &contacts, &prior, &FilterConfig::default()).unwrap();
        assert!((est.belief.mean.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_too_few_contacts() {
        let model = TriangleMesh::icosphere(0.05, 1).vertex_cloud();
        let contacts = PointCloud::new(model.points[..2].to_vec());
        let prior = BeliefState::isotropic(UnitQuaternion::identity(), 1e4);
        assert!(matches!(
            run_tiqf(&model, &contacts, &prior, &FilterConfig::default()),
            Err(Error::InvalidInput(_))
        ));
    }
}
