//! Shared fixtures for the criterion benchmarks.

use nalgebra::{UnitQuaternion, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tiqf_core::geometry::{load_mesh, Point3, Ray, RigidPose};
use tiqf_core::harness::{bootstrap, sample_ground_truth};
use tiqf_core::tiqf::TiqfSolver;
use tiqf_core::{BeliefState, ExperimentConfig, GaussianParams, PointCloud, PoseEstimate, TriangleMesh};

pub fn bunny() -> TriangleMesh {
    load_mesh(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/bunny.ply")).expect("bundled bunny")
}

/// Rays from a shell around the mesh aimed at random points inside its box.
pub fn rays_at(mesh: &TriangleMesh, count: usize, seed: u64) -> Vec<Ray> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let aabb = mesh.bounding_box();
    let outer = aabb.inflated(aabb.extent().max());
    (0..count)
        .filter_map(|_| {
            let o = Point3::from(Vector3::from_fn(|k, _| rng.random_range(outer.min[k]..outer.max[k])));
            let t = Point3::from(Vector3::from_fn(|k, _| rng.random_range(aabb.min[k]..aabb.max[k])));
            Ray::new(o, t - o).ok()
        })
        .collect()
}

pub fn gaussian_pair(seed: u64) -> (GaussianParams, GaussianParams) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        let a = nalgebra::Matrix4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let cov = a * a.transpose() + nalgebra::Matrix4::identity() * 0.1;
        let mean = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        GaussianParams::new(mean, (cov + cov.transpose()) * 0.5).expect("SPD")
    };
    (draw(), draw())
}

/// A mid-experiment planning state: bunny, noisy contacts and an estimate.
pub struct PlanningFixture {
    pub mesh: TriangleMesh,
    pub model: PointCloud,
    pub solver: TiqfSolver,
    pub contacts: PointCloud,
    pub estimate: PoseEstimate,
    pub config: ExperimentConfig,
}

impl PlanningFixture {
    pub fn new(contacts: usize) -> Self {
        let mesh = bunny();
        let model = mesh.vertex_cloud();
        let solver = TiqfSolver::new(&model).expect("model");
        let config = ExperimentConfig {
            bootstrap_touches: contacts,
            ..ExperimentConfig::default()
        };
        let truth = sample_ground_truth(&config, 1);
        let contacts = bootstrap(&mesh, &model, &truth, &config, &mut ChaCha8Rng::seed_from_u64(2)).expect("contacts");
        let prior = BeliefState::isotropic(UnitQuaternion::identity(), config.initial_covariance_scale);
        let estimate = solver
            .run(&contacts, &prior, Vector3::zeros(), &config.filter)
            .expect("estimate");
        Self {
            mesh,
            model,
            solver,
            contacts,
            estimate,
            config,
        }
    }

    pub fn truth_pose(&self) -> RigidPose {
        sample_ground_truth(&self.config, 1).pose
    }
}
