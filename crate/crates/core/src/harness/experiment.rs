use std::time::Instant;

use nalgebra::{Matrix4, UnitQuaternion, Vector3};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{bootstrap, pose_errors, sample_ground_truth, simulate_touch, ExperimentConfig, GroundTruth, TouchRecord};
use crate::active::{
    estimated_box, sample_box_rays, sample_candidate_actions, select_next_action, PlannerConfig, PlanningContext,
};
use crate::error::{Error, Result};
use crate::geometry::{load_mesh, Point3, PointCloud, TriangleMesh};
use crate::infogain::DivergenceCriterion;
use crate::tiqf::{BeliefState, PoseEstimate, TiqfSolver};

/// A (criterion, run) cell that aborted.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub criterion: DivergenceCriterion,
    pub run_id: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    /// Sorted by criterion (configuration order), run id, touch index.
    pub records: Vec<TouchRecord>,
    pub failures: Vec<RunFailure>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let mesh = load_mesh(&config.mesh_path)?;
    run_experiment_with_mesh(config, &mesh)
}

/// Runs every (criterion, run) cell against an already loaded mesh.
///
/// The filter registers against the mesh vertices plus
/// `model_surface_points` surface samples; errors are measured on the
/// vertices alone.
pub fn run_experiment_with_mesh(config: &ExperimentConfig, mesh: &TriangleMesh) -> Result<ExperimentOutput> {
    config.validate()?;
    let model = mesh.vertex_cloud();
    let solver = TiqfSolver::new(&filter_cloud(mesh, config))?;
    let cells: Vec<(usize, DivergenceCriterion, usize)> = config
        .criteria
        .iter()
        .enumerate()
        .flat_map(|(c, crit)| (0..config.runs).map(move |run| (c, *crit, run)))
        .collect();

    let outcomes: Vec<Result<Vec<TouchRecord>>> = cells
        .par_iter()
        .map(|&(c, criterion, run_id)| {
            let cell = Cell {
                config,
                mesh,
                model: &model,
                solver: &solver,
                criterion,
                run_id,
            };
            cell.run(cell_seeds(config.master_seed, c, run_id))
        })
        .collect();

    let mut output = ExperimentOutput::default();
    for ((_, criterion, run_id), outcome) in cells.into_iter().zip(outcomes) {
        match outcome {
            Ok(records) => output.records.extend(records),
            Err(e) => {
                log::warn!("{criterion} run {run_id} failed: {e}");
                output.failures.push(RunFailure {
                    criterion,
                    run_id,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(output)
}

fn filter_cloud(mesh: &TriangleMesh, config: &ExperimentConfig) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
    rng.set_stream(u64::MAX);
    let mut cloud = mesh.vertex_cloud();
    cloud
        .points
        .extend(mesh.sample_surface(config.model_surface_points, &mut rng).points);
    cloud
}

struct Seeds {
    ground_truth: u64,
    bootstrap: u64,
    noise: u64,
    planner: u64,
}

/// Independent seeds per cell: one ChaCha stream per (criterion, run).
fn cell_seeds(master: u64, criterion_index: usize, run_id: usize) -> Seeds {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((criterion_index as u64) << 32) | run_id as u64);
    Seeds {
        ground_truth: rng.next_u64(),
        bootstrap: rng.next_u64(),
        noise: rng.next_u64(),
        planner: rng.next_u64(),
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

struct Cell<'a> {
    config: &'a ExperimentConfig,
    mesh: &'a TriangleMesh,
    model: &'a PointCloud,
    solver: &'a TiqfSolver,
    criterion: DivergenceCriterion,
    run_id: usize,
}

impl Cell<'_> {
    fn run(&self, seeds: Seeds) -> Result<Vec<TouchRecord>> {
        let cfg = self.config;
        let truth = sample_ground_truth(cfg, seeds.ground_truth);
        let mut noise_rng = ChaCha8Rng::seed_from_u64(seeds.noise);
        let mut contacts = bootstrap(
            self.mesh,
            self.model,
            &truth,
            cfg,
            &mut ChaCha8Rng::seed_from_u64(seeds.bootstrap),
        )?;

        let prior = Matrix4::identity() * cfg.initial_covariance_scale;
        let start = Instant::now();
        let initial = BeliefState::isotropic(UnitQuaternion::identity(), cfg.initial_covariance_scale);
        let mut estimate = self.solver.run(&contacts, &initial, Vector3::zeros(), &cfg.filter)?;
        let filter_ms = elapsed_ms(start);

        let mut records = vec![self.record(&truth, &estimate, contacts.len(), contacts.points[contacts.len() - 1])?];
        records[0].filter_ms = cfg.record_timing.then_some(filter_ms);

        for touch_index in cfg.bootstrap_touches + 1..=cfg.max_touches {
            let planner = PlannerConfig {
                candidates_per_step: cfg.candidates_per_step,
                criterion: self.criterion,
                rng_seed: seeds.planner.wrapping_add(touch_index as u64),
                box_inflation: cfg.box_inflation,
            };
            let start = Instant::now();
            let candidates = sample_candidate_actions(&estimate, self.model, &planner)?;
            let ctx = PlanningContext {
                mesh: self.mesh,
                solver: self.solver,
                contacts: &contacts,
                estimate: &estimate,
                filter_config: &cfg.filter,
            };
            let selection = select_next_action(&candidates, &ctx, &planner)?;
            let planning_ms = elapsed_ms(start);
            let (action, contact, fallback) =
                match simulate_touch(&selection.action.ray, self.mesh, &truth, cfg.noise_std, &mut noise_rng) {
                    Some(p) => (selection.action, p, selection.fallback),
                    None => {
                        let (a, p) = self.fallback_touch(&estimate, &truth, &planner, &mut noise_rng)?;
                        (a, p, true)
                    }
                };
            contacts.push(contact);

            let start = Instant::now();
            // Warm start from the latest pose with the initial covariance, so
            // every run weighs all contacts alike.
            let warm = BeliefState::new(estimate.belief.mean, prior);
            estimate = self
                .solver
                .run(&contacts, &warm, estimate.pose.translation, &cfg.filter)?;
            let filter_ms = elapsed_ms(start);

            let mut rec = self.record(&truth, &estimate, touch_index, contact)?;
            rec.selected_action = Some(action);
            rec.gain = if fallback { None } else { selection.gain };
            rec.fallback = fallback;
            if cfg.record_timing {
                rec.planning_ms = Some(planning_ms);
                rec.filter_ms = Some(filter_ms);
            }
            records.push(rec);
        }
        Ok(records)
    }

    /// Random rays on the estimated box, executed against the truth, until
    /// one makes contact.
    fn fallback_touch(
        &self,
        estimate: &PoseEstimate,
        truth: &GroundTruth,
        planner: &PlannerConfig,
        noise_rng: &mut ChaCha8Rng,
    ) -> Result<(crate::active::TouchAction, Point3)> {
        let aabb = estimated_box(estimate, &self.model.points, planner.box_inflation)?;
        let mut rng = ChaCha8Rng::seed_from_u64(planner.rng_seed);
        rng.set_stream(2);
        let attempts = 10 * planner.candidates_per_step;
        for _ in 0..attempts {
            let action = sample_box_rays(&aabb, 1, &mut rng)[0];
            if let Some(p) = simulate_touch(&action.ray, self.mesh, truth, self.config.noise_std, noise_rng) {
                return Ok((action, p));
            }
        }
        Err(Error::Simulation(format!(
            "no fallback ray touched the object in {attempts} attempts"
        )))
    }

    fn record(
        &self,
        truth: &GroundTruth,
        estimate: &PoseEstimate,
        touch_index: usize,
        contact: Point3,
    ) -> Result<TouchRecord> {
        let e = pose_errors(&estimate.pose, &truth.pose, self.model)?;
        log::debug!(
            "{} run {} touch {}: pos {:.4} m, rot {:.3} deg, adi {:.4} m, |dq| {:.4}",
            self.criterion,
            self.run_id,
            touch_index,
            e.pos_err_m,
            e.rot_err_deg,
            e.adi_m,
            e.quat_err
        );
        Ok(TouchRecord {
            run_id: self.run_id,
            criterion: self.criterion,
            touch_index,
            selected_action: None,
            contact_point: contact,
            pos_err_m: e.pos_err_m,
            rot_err_deg: e.rot_err_deg,
            adi_m: e.adi_m,
            quat_err: e.quat_err,
            gain: None,
            planning_ms: None,
            filter_ms: None,
            fallback: false,
        })
    }
}
