//! Next-best-touch planning.
//!
//! Candidate probe rays start on the faces of the (inflated) bounding box of
//! the model at its current estimated pose and point inward. Each candidate
//! is cast against the mesh at the estimated pose to predict a contact; the
//! filter is re-run with that hypothetical contact, and the candidate whose
//! hypothetical posterior diverges most from the current belief is chosen.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ray_mesh_intersect, Aabb, BoxFace, Point3, PointCloud, Ray, TriangleMesh};
use crate::infogain::{evaluate, DivergenceCriterion, GaussianParams};
use crate::tiqf::{BeliefState, FilterConfig, PoseEstimate, TiqfSolver};

/// A probe ray launched from one face of a bounding box toward its interior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TouchAction {
    pub ray: Ray,
    pub face: BoxFace,
    /// Contact predicted on the estimated-pose mesh, if the ray hits it.
    pub predicted_contact: Option<Point3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub candidates_per_step: usize,
    pub criterion: DivergenceCriterion,
    pub rng_seed: u64,
    /// Margin (m) added on every side of the estimated bounding box.
    pub box_inflation: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            candidates_per_step: 30,
            criterion: DivergenceCriterion::Kl,
            rng_seed: 0,
            box_inflation: 0.02,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.candidates_per_step == 0 {
            return Err(Error::invalid("candidates_per_step must be at least 1"));
        }
        if !(self.box_inflation >= 0.0 && self.box_inflation.is_finite()) {
            return Err(Error::invalid("box_inflation must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LookaheadResult {
    /// Position of the candidate in the list handed to the planner.
    pub index: usize,
    pub action: TouchAction,
    pub hypothetical_posterior: BeliefState,
    pub gain: f64,
}

/// Outcome of one planning step.
#[derive(Debug, Clone)]
pub struct Selection {
    pub action: TouchAction,
    /// Index of the chosen candidate, `None` for a fallback ray.
    pub index: Option<usize>,
    pub gain: Option<f64>,
    pub fallback: bool,
    pub results: Vec<LookaheadResult>,
    /// Candidates whose hypothetical filter run failed.
    pub skipped: Vec<(usize, String)>,
}

/// Everything the planner reads. Shared references only: planning cannot
/// touch the live filter state.
#[derive(Debug, Clone, Copy)]
pub struct PlanningContext<'a> {
    pub mesh: &'a TriangleMesh,
    pub solver: &'a TiqfSolver,
    pub contacts: &'a PointCloud,
    pub estimate: &'a PoseEstimate,
    pub filter_config: &'a FilterConfig,
}

/// Draws `count` inward rays with origins uniform over the surface of `aabb`.
pub fn sample_box_rays<R: Rng + ?Sized>(aabb: &Aabb, count: usize, rng: &mut R) -> Vec<TouchAction> {
    let areas: Vec<f64> = BoxFace::ALL.iter().map(|f| aabb.face_area(*f)).collect();
    let faces = match WeightedIndex::new(&areas) {
        Ok(w) => w,
        // Degenerate box (all faces zero area): fall back to uniform faces.
        Err(_) => WeightedIndex::new([1.0; 6]).expect("uniform weights"),
    };
    (0..count)
        .map(|_| {
            let face = BoxFace::ALL[faces.sample(rng)];
            let (s, t): (f64, f64) = (rng.random(), rng.random());
            let origin = aabb.point_on_face(face, s, t);
            let ray = Ray::new(origin, face.inward_normal()).expect("unit normal");
            TouchAction {
                ray,
                face,
                predicted_contact: None,
            }
        })
        .collect()
}

/// The inflated bounding box of `model` at the estimated pose.
pub fn estimated_box(estimate: &PoseEstimate, model: &[Point3], inflation: f64) -> Result<Aabb> {
    let posed: Vec<Point3> = model.iter().map(|p| estimate.pose.transform_point(p)).collect();
    Aabb::from_points(&posed)
        .map(|b| b.inflated(inflation))
        .ok_or_else(|| Error::invalid("empty model cloud"))
}

/// Candidate rays on the inflated bounding box of the model at the estimated
/// pose. Deterministic in `config.rng_seed`.
pub fn sample_candidate_actions(
    estimate: &PoseEstimate,
    model: &PointCloud,
    config: &PlannerConfig,
) -> Result<Vec<TouchAction>> {
    config.validate()?;
    let aabb = estimated_box(estimate, &model.points, config.box_inflation)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    Ok(sample_box_rays(&aabb, config.candidates_per_step, &mut rng))
}

/// Nearest hit of the action's ray on the mesh at the estimated pose.
pub fn predict_measurement(action: &TouchAction, mesh: &TriangleMesh, estimate: &PoseEstimate) -> Option<Point3> {
    ray_mesh_intersect(&action.ray, mesh, &estimate.pose).map(|h| h.point)
}

/// One-step lookahead for a single candidate.
///
/// The filter is re-run on a copy of the contacts plus the predicted contact,
/// starting from the current belief. Returns `Ok(None)` when the ray misses
/// the estimated mesh.
pub fn lookahead(
    index: usize,
    action: &TouchAction,
    ctx: &PlanningContext<'_>,
    criterion: &DivergenceCriterion,
) -> Result<Option<LookaheadResult>> {
    let Some(contact) = predict_measurement(action, ctx.mesh, ctx.estimate) else {
        return Ok(None);
    };
    let mut contacts = ctx.contacts.clone();
    contacts.push(contact);
    let hypothetical = ctx.solver.run(
        &contacts,
        &ctx.estimate.belief,
        ctx.estimate.pose.translation,
        ctx.filter_config,
    )?;
    let gain = evaluate(
        criterion,
        &GaussianParams::from(&hypothetical.belief),
        &GaussianParams::from(&ctx.estimate.belief),
    )?;
    if !gain.is_finite() {
        return Err(Error::numerical(format!("non-finite gain {gain}")));
    }
    Ok(Some(LookaheadResult {
        index,
        action: TouchAction {
            predicted_contact: Some(contact),
            ..*action
        },
        hypothetical_posterior: hypothetical.belief,
        gain,
    }))
}

/// Index into `results` of the maximal gain; ties go to the lowest
/// candidate index.
pub fn argmax_gain(results: &[LookaheadResult], transform: impl Fn(f64) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, r) in results.iter().enumerate() {
        let g = transform(r.gain);
        match best {
            Some((bk, bg)) if g < bg || (g == bg && r.index >= results[bk].index) => {}
            _ => best = Some((k, g)),
        }
    }
    best.map(|(k, _)| k)
}

/// Evaluates every candidate (in parallel) and returns the gain-maximizing
/// one. If no candidate hits the estimated mesh, draws random rays on the
/// same box until one does, up to `10 × candidates_per_step` attempts.
pub fn select_next_action(
    candidates: &[TouchAction],
    ctx: &PlanningContext<'_>,
    config: &PlannerConfig,
) -> Result<Selection> {
    if candidates.is_empty() {
        return Err(Error::invalid("no candidate actions"));
    }
    let outcomes: Vec<Result<Option<LookaheadResult>>> = candidates
        .par_iter()
        .enumerate()
        .map(|(i, a)| lookahead(i, a, ctx, &config.criterion))
        .collect();

    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(Some(r)) => results.push(r),
            Ok(None) => {}
            Err(e) => {
                log::debug!("candidate {i} skipped: {e}");
                skipped.push((i, e.to_string()));
            }
        }
    }

    if let Some(k) = argmax_gain(&results, |g| g) {
        let best = &results[k];
        return Ok(Selection {
            action: best.action,
            index: Some(best.index),
            gain: Some(best.gain),
            fallback: false,
            results,
            skipped,
        });
    }

    let action = fallback_action(ctx, config)?;
    Ok(Selection {
        action,
        index: None,
        gain: None,
        fallback: true,
        results,
        skipped,
    })
}

/// Uniformly random ray on the estimated box that hits the estimated mesh.
pub fn fallback_action(ctx: &PlanningContext<'_>, config: &PlannerConfig) -> Result<TouchAction> {
    let aabb = estimated_box(ctx.estimate, ctx.solver.model(), config.box_inflation)?;
    // Separate stream from the candidate sampler.
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(1);
    let attempts = 10 * config.candidates_per_step;
    for _ in 0..attempts {
        let mut action = sample_box_rays(&aabb, 1, &mut rng)[0];
        if let Some(p) = predict_measurement(&action, ctx.mesh, ctx.estimate) {
            action.predicted_contact = Some(p);
            return Ok(action);
        }
    }
    Err(Error::Planning(format!(
        "no ray hit the estimated mesh in {attempts} attempts"
    )))
}
