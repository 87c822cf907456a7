use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, TrialConfig};
use super::metrics::{aggregate, MetricsReport};
use super::{ErrorEvent, ErrorKind, HarnessError, TrialResult};
use crate::dexterity_controller::{
    cinch_translation, extraction_grasp, handover_alignment, handover_grasp, insertion_trajectory,
    pre_insertion_alignment, thread_sweep_trajectory, NeedleGrasp,
};
use crate::geom3d::{Mat3, Point3, Vec3};
use crate::needle_estimator::{
    ekf_initialize, ekf_update, measure_needle, refine_tip, EstimateError, MeasureConfig, NeedleMeasurement, Side,
    TipRefinement,
};
use crate::suture_planner::{build_wound_model, plan_sutures, SuturePlan, WoundModel};
use crate::synth_scene::{
    generate_wound_scene, oracle_needle_state, random_needle_pose, render_views, sample_needle_cloud,
    NeedleGroundTruth, RenderConfig,
};

/// Mixes `tag` into `base` (SplitMix64 finalizer) so that related streams
/// get unrelated seeds.
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    let mut z = base
        ^ tag
            .wrapping_add(0x9E37_79B9_7F4A_7C15)
            .wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn seed_path(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(base, |s, t| derive_seed(s, *t))
}

/// Stream tags, so every random quantity has its own seed.
mod tag {
    pub const WOUND: u64 = 1;
    pub const SUTURE: u64 = 2;
    pub const POSE: u64 = 10;
    pub const CLOUD: u64 = 11;
    pub const RANSAC: u64 = 12;
    pub const RENDER: u64 = 13;
    pub const SNAP: u64 = 20;
    pub const TANGLE: u64 = 21;
    pub const CLOSURE: u64 = 22;
}

fn uniform(seed: u64) -> f64 {
    ChaCha8Rng::seed_from_u64(seed).random::<f64>()
}

/// One needle observation: the ground truth it came from and what the
/// pipeline believes.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub truth: NeedleGroundTruth,
    /// Ground truth labeled the way the camera labels measurements.
    pub oracle: NeedleMeasurement<f64>,
    /// `None` when no estimate could be formed.
    pub estimate: Option<NeedleMeasurement<f64>>,
    pub tip_side: Side,
}

impl Observation {
    /// Whether the estimate's worse endpoint is within `threshold` mm.
    pub fn succeeded(&self, threshold: f64) -> bool {
        self.estimate
            .as_ref()
            .is_some_and(|e| e.max_endpoint_error(&self.oracle) < threshold)
    }
}

fn measure(cfg: &TrialConfig, truth: &NeedleGroundTruth, seed: u64, k: u64) -> Option<NeedleMeasurement<f64>> {
    let noise = cfg.noise.with_seed(seed_path(seed, &[tag::CLOUD, k]));
    let cloud = sample_needle_cloud(truth, &noise, cfg.scene.cloud_points).ok()?;
    let mc = MeasureConfig {
        ransac: cfg.scene.measure.ransac.with_seed(seed_path(seed, &[tag::RANSAC, k])),
        ..cfg.scene.measure
    };
    measure_needle(&cloud, &mc, Some(&cfg.scene.camera)).ok()
}

/// Single measurement, or a fresh filter over successive measurements. A
/// filter that runs out of draws falls back to its current mean.
fn estimate(cfg: &TrialConfig, truth: &NeedleGroundTruth, seed: u64) -> Option<NeedleMeasurement<f64>> {
    let ekf = &cfg.ekf;
    // Failed fits are retried but only up to a fixed budget of clouds.
    let budget = 3 * ekf.max_measurements as u64;
    let mut stream = (0..budget).filter_map(|k| measure(cfg, truth, seed, k));
    if !cfg.enable_ekf {
        return stream.next();
    }
    let init: Vec<_> = stream.by_ref().take(ekf.init_count).collect();
    let mut state = ekf_initialize(&init, ekf).ok()?;
    while state.accepted_updates < ekf.update_count && state.measurement_count < ekf.max_measurements {
        let Some(z) = stream.next() else { break };
        state = ekf_update(&state, &z, ekf).0;
    }
    state.estimate().ok()
}

/// Samples a needle pose and estimates it from simulated clouds: the first
/// successful fit without the filter, a fresh filter with it. Both arms see
/// the same pose and the same cloud stream for a given seed.
pub fn observe(cfg: &TrialConfig, seed: u64) -> Observation {
    let cam = &cfg.scene.camera;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, tag::POSE));
    let truth = random_needle_pose(&mut rng, cam, &cfg.scene.poses);
    let oracle = oracle_needle_state(&truth, Some(cam)).expect("sampler radius is positive");
    Observation {
        estimate: estimate(cfg, &truth, seed),
        tip_side: truth.tip_side_in(Some(cam)),
        truth,
        oracle,
    }
}

/// Renders the observed needle's depth image and refines the tip of `est`
/// against it.
pub fn refine_observed_tip(
    cfg: &TrialConfig,
    obs: &Observation,
    est: &NeedleMeasurement<f64>,
    seed: u64,
) -> Result<TipRefinement<f64>, EstimateError> {
    let cam = &cfg.scene.camera;
    let center_depth = cam.to_camera(obs.truth.pose.position).z;
    let render = RenderConfig {
        background_depth: Some(center_depth + cfg.scene.background_offset),
        seed: derive_seed(seed, tag::RENDER),
        ..cfg.scene.render
    };
    let (_, depth) = render_views(&obs.truth, cam, &render).map_err(|_| EstimateError::NotVisible)?;
    refine_tip(&depth, cam, est, obs.tip_side, &cfg.scene.refine)
}

/// Tip position the pipeline acts on: the depth-image refinement when it
/// works, the estimated endpoint otherwise.
fn believed_tip(cfg: &TrialConfig, obs: &Observation, est: &NeedleMeasurement<f64>, seed: u64) -> Point3<f64> {
    refine_observed_tip(cfg, obs, est, seed).map_or_else(|_| est.endpoint(obs.tip_side), |t| t.tip)
}

fn normal_error_deg(est: &NeedleMeasurement<f64>, truth: &NeedleMeasurement<f64>) -> f64 {
    let a = est.normal.angle_to(truth.normal).to_degrees();
    a.min(180.0 - a)
}

fn grasp_error(
    est: &NeedleMeasurement<f64>,
    truth: &NeedleMeasurement<f64>,
    side: Side,
    op: fn(&NeedleMeasurement<f64>, Side) -> Result<NeedleGrasp<f64>, crate::dexterity_controller::ControlError>,
) -> Option<f64> {
    Some(
        op(est, side)
            .ok()?
            .grasp_point
            .distance(op(truth, side).ok()?.grasp_point),
    )
}

struct SutureContext<'a> {
    cfg: &'a TrialConfig,
    model: &'a WoundModel<f64>,
    plan: &'a SuturePlan<f64>,
    index: usize,
    seed: u64,
}

/// Runs one suture. Returns the first error, and tallies pose estimates.
fn run_suture(ctx: &SutureContext, estimates: &mut (usize, usize)) -> Option<ErrorEvent> {
    let cfg = ctx.cfg;
    let fp = &cfg.failure;
    let fail = |kind, detail: String| {
        Some(ErrorEvent {
            kind,
            suture_index: ctx.index,
            detail,
        })
    };
    let mut look = |stage: u64| {
        let obs = observe(cfg, seed_path(ctx.seed, &[tag::SUTURE, stage]));
        estimates.1 += 1;
        if obs.succeeded(fp.estimate_success_threshold) {
            estimates.0 += 1;
        }
        obs
    };

    // Pre-insertion: estimate, align, put the believed tip on the insertion point.
    let obs = look(0);
    let Some(est) = obs.estimate else {
        return fail(ErrorKind::M, "needle not localized before insertion".into());
    };
    let rotation = if cfg.enable_alignment {
        let err = normal_error_deg(&est, &obs.oracle);
        if err > fp.alignment_tolerance_deg {
            return fail(ErrorKind::A, format!("pre-insertion normal off by {err:.2} deg"));
        }
        match pre_insertion_alignment(&est, ctx.model, obs.tip_side) {
            Ok(p) => p.orientation,
            Err(e) => return fail(ErrorKind::A, e.to_string()),
        }
    } else {
        if uniform(seed_path(ctx.seed, &[tag::SNAP])) < fp.alignment_snap_prob {
            return fail(ErrorKind::A, "needle snapped out of alignment".into());
        }
        Mat3::identity()
    };
    let tip = believed_tip(cfg, &obs, &est, ctx.seed);
    let truth_tip = obs.oracle.endpoint(obs.tip_side);
    let up = *ctx.model.surface_normal();
    let height_error = up.dot(rotation.mul_vec(truth_tip - tip)).abs();
    if height_error > fp.insertion_height_tolerance {
        return fail(
            ErrorKind::I,
            format!("tip {height_error:.2} mm off the insertion height"),
        );
    }
    let pair = ctx.plan.pairs[ctx.index - 1];
    let held = est.transformed(&rotation, est.center, Vec3::zeros());
    let placed = held.transformed(
        &Mat3::identity(),
        Vec3::zeros(),
        pair.insertion - held.endpoint(obs.tip_side),
    );
    if let Err(e) = insertion_trajectory(&placed, pair.insertion, ctx.model, &cfg.scene.insertion) {
        return fail(ErrorKind::I, e.to_string());
    }

    // Thread handling before extraction.
    let p_tangle = if cfg.enable_thread_mgmt {
        if let Err(e) = thread_sweep_trajectory(ctx.model, &cfg.scene.sweep) {
            return fail(ErrorKind::T, e.to_string());
        }
        fp.tangle_prob_swept
    } else {
        fp.tangle_prob_raw
    };
    if uniform(seed_path(ctx.seed, &[tag::TANGLE])) < p_tangle {
        return fail(ErrorKind::T, "thread caught behind the needle".into());
    }

    // Extraction grasp near the tip, then the cinch pull.
    let obs = look(1);
    let Some(est) = obs.estimate else {
        return fail(ErrorKind::M, "needle not localized for extraction".into());
    };
    match grasp_error(&est, &obs.oracle, obs.tip_side, extraction_grasp) {
        Some(e) if e <= fp.grasp_tolerance => {}
        Some(e) => return fail(ErrorKind::M, format!("extraction grasp off by {e:.2} mm")),
        None => return fail(ErrorKind::M, "no extraction grasp".into()),
    }
    if let Err(e) = cinch_translation(ctx.plan.n, ctx.index, ctx.plan.d) {
        return fail(ErrorKind::T, e.to_string());
    }

    // Handover near the thread end and realignment for the next throw.
    let obs = look(2);
    let Some(est) = obs.estimate else {
        return fail(ErrorKind::M, "needle not localized for handover".into());
    };
    let thread_side = obs.tip_side.opposite();
    match grasp_error(&est, &obs.oracle, thread_side, handover_grasp) {
        Some(e) if e <= fp.grasp_tolerance => {}
        Some(e) => return fail(ErrorKind::M, format!("handover grasp off by {e:.2} mm")),
        None => return fail(ErrorKind::M, "no handover grasp".into()),
    }
    if cfg.enable_alignment {
        let err = normal_error_deg(&est, &obs.oracle);
        if err > fp.alignment_tolerance_deg {
            return fail(ErrorKind::A, format!("handover normal off by {err:.2} deg"));
        }
        if let Err(e) = handover_alignment(&est, ctx.model) {
            return fail(ErrorKind::A, e.to_string());
        }
    }
    None
}

/// Simulates one trial of `cfg.n_sutures` sutures; stops at the first failure.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialResult, HarnessError> {
    cfg.validate()?;
    let wound = crate::synth_scene::WoundSceneParams {
        seed: derive_seed(cfg.seed, tag::WOUND),
        ..cfg.scene.wound
    };
    let (scene, _) = generate_wound_scene(&wound).map_err(|e| HarnessError::Planning(e.to_string()))?;
    let planner = crate::suture_planner::PlannerConfig {
        ransac: cfg.scene.planner.ransac.with_seed(derive_seed(cfg.seed, tag::WOUND)),
        ..cfg.scene.planner
    };
    let model = build_wound_model(&scene, &planner).map_err(|e| HarnessError::Planning(e.to_string()))?;
    let plan = plan_sutures(&model, cfg.n_sutures, &planner).map_err(|e| HarnessError::Planning(e.to_string()))?;

    let mut result = TrialResult {
        seed: cfg.seed,
        sutures_attempted: 0,
        sutures_succeeded: 0,
        closed_stitches: 0,
        errors: Vec::new(),
        pose_estimate_successes: 0,
        pose_estimate_attempts: 0,
    };
    let mut estimates = (0, 0);
    for index in 1..=cfg.n_sutures {
        let seed = seed_path(cfg.seed, &[tag::SUTURE, index as u64]);
        let ctx = SutureContext {
            cfg,
            model: &model,
            plan: &plan,
            index,
            seed,
        };
        result.sutures_attempted += 1;
        if let Some(err) = run_suture(&ctx, &mut estimates) {
            result.errors.push(err);
            break;
        }
        result.sutures_succeeded += 1;
        if uniform(derive_seed(seed, tag::CLOSURE)) < cfg.failure.closure_prob {
            result.closed_stitches += 1;
        }
    }
    result.pose_estimate_successes = estimates.0;
    result.pose_estimate_attempts = estimates.1;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    #[serde(flatten)]
    pub metrics: MetricsReport,
    pub per_trial: Vec<TrialResult>,
    pub config: ExperimentConfig,
}

/// Runs all trials (in parallel) and aggregates them in seed order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    if cfg.trials == 0 {
        return Err(HarnessError::InvalidConfig("trials must be >= 1".into()));
    }
    cfg.trial.validate()?;
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let tc = TrialConfig {
                seed: derive_seed(cfg.seed, k as u64),
                ..cfg.trial
            };
            run_trial(&tc)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentReport {
        metrics: aggregate(&trials, cfg.trial.n_sutures)?,
        per_trial: trials,
        config: *cfg,
    })
}
