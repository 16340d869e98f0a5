use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use nalgebra::UnitQuaternion;
use tiqf_bench::{bunny, gaussian_pair, rays_at, PlanningFixture};
use tiqf_core::active::{sample_candidate_actions, select_next_action, PlannerConfig, PlanningContext};
use tiqf_core::geometry::{ray_mesh_intersect, RigidPose};
use tiqf_core::harness::adi;
use tiqf_core::tiqf::{kalman_update, pair_difference_measurement};
use tiqf_core::{BeliefState, Correspondence, DivergenceCriterion, FilterConfig};

fn ray_casting(c: &mut Criterion) {
    let mesh = bunny();
    let rays = rays_at(&mesh, 1000, 7);
    let pose = RigidPose::identity();
    c.bench_function("ray_mesh_intersect/1000 rays", |b| {
        b.iter(|| {
            rays.iter()
                .filter(|r| ray_mesh_intersect(r, &mesh, &pose).is_some())
                .count()
        })
    });
}

fn kalman(c: &mut Criterion) {
    let pose = RigidPose::new(
        UnitQuaternion::from_euler_angles(0.2, -0.3, 0.1),
        nalgebra::Vector3::new(0.01, 0.0, 0.02),
    );
    let o = [
        nalgebra::Point3::new(0.05, 0.01, -0.02),
        nalgebra::Point3::new(-0.03, 0.04, 0.01),
    ];
    let ci = Correspondence::new(pose.transform_point(&o[0]), o[0]);
    let cj = Correspondence::new(pose.transform_point(&o[1]), o[1]);
    let h = pair_difference_measurement(&ci, &cj).unwrap();
    let belief = BeliefState::isotropic(UnitQuaternion::identity(), 1e4);
    let config = FilterConfig::default();
    c.bench_function("kalman_update", |b| {
        b.iter(|| kalman_update(black_box(&belief), &h, &config).unwrap())
    });
}

fn divergences(c: &mut Criterion) {
    let (p, q) = gaussian_pair(3);
    let mut group = c.benchmark_group("divergence");
    for criterion in DivergenceCriterion::all(DivergenceCriterion::DEFAULT_RENYI_ALPHA) {
        group.bench_function(criterion.name(), |b| {
            b.iter(|| criterion.evaluate(black_box(&p), &q).unwrap())
        });
    }
    group.finish();
}

fn filter_and_metrics(c: &mut Criterion) {
    let fx = PlanningFixture::new(15);
    let prior = BeliefState::isotropic(UnitQuaternion::identity(), fx.config.initial_covariance_scale);
    c.bench_function("tiqf/15 contacts", |b| {
        b.iter(|| {
            fx.solver
                .run(&fx.contacts, &prior, nalgebra::Vector3::zeros(), &fx.config.filter)
                .unwrap()
        })
    });
    let truth = fx.truth_pose();
    c.bench_function("adi/bunny vertices", |b| {
        b.iter(|| adi(&fx.estimate.pose, &truth, &fx.model).unwrap())
    });
}

fn planning(c: &mut Criterion) {
    let fx = PlanningFixture::new(8);
    let ctx = PlanningContext {
        mesh: &fx.mesh,
        solver: &fx.solver,
        contacts: &fx.contacts,
        estimate: &fx.estimate,
        filter_config: &fx.config.filter,
    };
    let mut seed = 0;
    c.bench_function("select_next_action/30 candidates", |b| {
        b.iter_batched(
            || {
                seed += 1;
                let planner = PlannerConfig {
                    rng_seed: seed,
                    ..PlannerConfig::default()
                };
                let candidates = sample_candidate_actions(&fx.estimate, &fx.model, &planner).unwrap();
                (planner, candidates)
            },
            |(planner, candidates)| select_next_action(&candidates, &ctx, &planner).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, ray_casting, kalman, divergences, filter_and_metrics, planning);
criterion_main!(benches);
