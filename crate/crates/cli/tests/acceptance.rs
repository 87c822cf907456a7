//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails. Tolerances and time limits are fixed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ContinuousCDF, StudentsT};
use stitchkit_core::dexterity_controller::{cinch_translation, Pose};
use stitchkit_core::geom3d::{fit_circle_in_plane, least_squares_plane, Circle3, Mat3, UnitVec3, Vec3};
use stitchkit_core::harness::{
    aggregate, derive_seed, observe, overhead_camera, refine_observed_tip, run_experiment, Ablation, ErrorEvent,
    ErrorKind, ExperimentConfig, ExperimentReport, TrialConfig, TrialResult,
};
use stitchkit_core::mask2d::{skeletonize, BinaryMask};
use stitchkit_core::needle_estimator::{
    estimate_needle, refine_tip, EkfConfig, EstimateError, NeedleMeasurement, Side, TipRefineConfig,
};
use stitchkit_core::suture_planner::{build_wound_model, plan_sutures, PlannerConfig};
use stitchkit_core::synth_scene::{
    generate_wound_scene, oracle_needle_state, render_views, NeedleGroundTruth, RenderConfig, WoundSceneParams,
    DEFAULT_NEEDLE_RADIUS,
};

/// Verdict and a one-line summary of what was measured.
type Outcome = (bool, String);

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn cinch_sequence() -> Outcome {
    let d: Vec<f64> = (1..=6).map(|i| cinch_translation(6, i, 10.0).unwrap()).collect();
    (d == [60.0, 50.0, 40.0, 30.0, 20.0, 10.0], format!("D = {d:?}"))
}

fn circle_fit_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let jitter = Normal::new(0.0, 0.05).unwrap();
    let r = 12.73;
    let mut good = 0;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let center = Vec3::new(
            rng.random_range(-50.0..50.0),
            rng.random_range(-50.0..50.0),
            rng.random_range(100.0..200.0),
        );
        let normal = loop {
            let v = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if v.norm() > 0.2 {
                break UnitVec3::new_normalize(v).unwrap();
            }
        };
        let u = normal.any_perpendicular().into_inner();
        let v = normal.into_inner().cross(u);
        let start = rng.random_range(0.0..std::f64::consts::TAU);
        let pts: Vec<_> = (0..500)
            .map(|_| {
                let t = start + rng.random_range(0.0..std::f64::consts::PI);
                let noise = Vec3::new(
                    jitter.sample(&mut rng),
                    jitter.sample(&mut rng),
                    jitter.sample(&mut rng),
                );
                center + u * (r * t.cos()) + v * (r * t.sin()) + noise
            })
            .collect();
        let truth = Circle3::new(center, normal, r);
        let fit = least_squares_plane(&pts).and_then(|p| fit_circle_in_plane(&pts, &p).ok());
        if let Some(c) = fit {
            let err = c.center.distance(truth.center).max((c.radius - r).abs());
            worst = worst.max(err);
            good += usize::from(err < 0.2);
        }
    }
    (
        good >= 99,
        format!("{good}/100 fits within 0.2 mm (worst {worst:.3} mm)"),
    )
}

fn ekf_benefit() -> Outcome {
    let full = TrialConfig::default();
    let single = full.with_ablation(Ablation::NoEkf);
    let threshold = full.failure.estimate_success_threshold;
    let (mut with, mut without) = (0, 0);
    for k in 0..200 {
        let seed = derive_seed(3, k);
        with += usize::from(observe(&full, seed).succeeded(threshold));
        without += usize::from(observe(&single, seed).succeeded(threshold));
    }
    let gap = (with as f64 - without as f64) / 2.0;
    (
        gap >= 5.0,
        format!("filtered {with}/200 vs single-shot {without}/200, gap {gap:.1} pp"),
    )
}

fn in_gate_needle(shift: f64) -> NeedleMeasurement<f64> {
    NeedleMeasurement {
        center: Vec3::new(shift, 0.0, 150.0),
        endpoint_left: Vec3::new(shift - 12.7, 0.0, 150.0),
        endpoint_right: Vec3::new(shift + 12.7, 0.0, 150.0),
        normal: UnitVec3::z_axis(),
        radius: 12.7,
    }
}

fn ekf_consumption() -> Outcome {
    let cfg = EkfConfig::default();
    let stream = (0..100).map(|k| in_gate_needle(0.01 * (k % 5) as f64));
    let ok = estimate_needle(stream, &cfg).unwrap();
    let passing = ok.consumed_count == 10 && ok.accepted_count == 3;

    let init = (0..7).map(|k| in_gate_needle(0.01 * (k % 5) as f64));
    let rejected = init.chain(std::iter::repeat_n(in_gate_needle(50.0), 100));
    let timeout = estimate_needle(rejected, &cfg);
    let timed_out = matches!(
        timeout,
        Err(EstimateError::EstimateTimeout {
            consumed: 15,
            accepted: 0
        })
    );
    (
        passing && timed_out,
        format!(
            "in-gate: consumed {} accepted {}; rejecting: {timeout:?}",
            ok.consumed_count, ok.accepted_count
        ),
    )
}

fn tip_refinement() -> Outcome {
    let cam = overhead_camera();
    let r = DEFAULT_NEEDLE_RADIUS;
    let mut clean = 0.0f64;
    for shift in [0.0, 3.0, -7.0] {
        let pose = Pose::new(Vec3::new(5.0 + shift - r, 2.0, 0.0), Mat3::identity());
        let gt = NeedleGroundTruth::new(pose, r, Side::Left);
        let tip_side = gt.tip_side_in(Some(&cam));
        let render = RenderConfig {
            pixel_thickness: 1,
            background_depth: Some(175.0),
            ..RenderConfig::default()
        };
        let (_, depth) = render_views(&gt, &cam, &render).unwrap();
        let truth = oracle_needle_state(&gt, Some(&cam)).unwrap();
        let t = refine_tip(&depth, &cam, &truth, tip_side, &TipRefineConfig::default()).unwrap();
        clean = clean.max(t.tip.distance(truth.endpoint(tip_side)));
    }

    let cfg = TrialConfig::default();
    let mut wins = 0;
    for seed in 0..100 {
        let obs = observe(&cfg, seed);
        let Some(est) = &obs.estimate else { continue };
        let Ok(t) = refine_observed_tip(&cfg, &obs, est, seed) else {
            continue;
        };
        let truth = obs.oracle.endpoint(obs.tip_side);
        if t.raw.is_some_and(|raw| t.tip.distance(truth) < raw.distance(truth)) {
            wins += 1;
        }
    }
    (
        clean < 1e-3 && wins >= 90,
        format!("noise-free error {clean:.2e} mm; refined beats raw in {wins}/100 scenes"),
    )
}

fn suture_roundtrip() -> Outcome {
    let planner = PlannerConfig::default();
    let (scene, _) = generate_wound_scene(&WoundSceneParams::default()).unwrap();
    let model = build_wound_model(&scene, &planner).unwrap();
    let exact = (model.height - 5.0).abs().max((model.width - 9.0).abs());

    let mut noisy = 0.0f64;
    for seed in 0..10 {
        let params = WoundSceneParams {
            sigma: 0.2,
            seed,
            ..WoundSceneParams::default()
        };
        let (scene, _) = generate_wound_scene(&params).unwrap();
        let cfg = PlannerConfig {
            ransac: planner.ransac.with_seed(seed),
            ..planner
        };
        let m = build_wound_model(&scene, &cfg).unwrap();
        noisy = noisy.max((m.height / 5.0 - 1.0).abs()).max((m.width / 9.0 - 1.0).abs());
    }

    let plan = plan_sutures(&model, 6, &planner).unwrap();
    let gaps: Vec<f64> = plan
        .centered_positions
        .windows(2)
        .map(|w| w[0].distance(w[1]))
        .collect();
    let spread = gaps.iter().fold(0.0f64, |a, g| a.max((g - gaps[0]).abs()));
    let depth = plan
        .pairs
        .iter()
        .flat_map(|p| [p.insertion, p.extraction])
        .map(|p| (model.surface_plane.signed_distance(p) + model.height / 2.0).abs())
        .fold(0.0f64, f64::max);
    (
        exact < 1e-6 && noisy < 0.05 && spread < 1e-12 && depth < 1e-9,
        format!(
            "noise-free error {exact:.1e} mm, noisy relative error {:.2}%, spacing spread {spread:.1e} mm, \
             depth error {depth:.1e} mm",
            100.0 * noisy
        ),
    )
}

fn bar() -> BinaryMask {
    let mut m = BinaryMask::new(26, 9);
    for y in 3..6 {
        for x in 3..23 {
            m.set(x, y, true);
        }
    }
    m
}

fn skeletonization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = 0;
    for _ in 0..1000 {
        let (w, h) = (rng.random_range(1..32), rng.random_range(1..32));
        let density = rng.random_range(0.1..0.9);
        let bits = (0..w * h).map(|_| rng.random_bool(density)).collect();
        let m = BinaryMask::from_bits(w, h, bits).unwrap();
        let s = skeletonize(&m);
        if !s.is_subset_of(&m) || skeletonize(&s) != s {
            bad += 1;
        }
    }
    let s = skeletonize(&bar());
    let mut cols: Vec<usize> = s.pixels().map(|p| p.x).collect();
    cols.sort_unstable();
    cols.dedup();
    let line = cols.len() == s.count()
        && cols.windows(2).all(|w| w[1] == w[0] + 1)
        && s.component_labels().1 == 1
        && s.pixels().all(|p| s.neighbor_count(p) <= 2);
    (
        bad == 0 && line,
        format!(
            "{bad} of 1000 masks violate idempotence or subset; 3x20 bar -> {} px, one-pixel line: {line}",
            s.count()
        ),
    )
}

fn paired_p(full: &ExperimentReport, arm: &ExperimentReport) -> (f64, f64) {
    let d: Vec<f64> = full
        .per_trial
        .iter()
        .zip(&arm.per_trial)
        .map(|(a, b)| a.sutures_succeeded as f64 - b.sutures_succeeded as f64)
        .collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let t = mean / (sd / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).unwrap();
    (t, 2.0 * (1.0 - dist.cdf(t.abs())))
}

fn ablation_ordering() -> Outcome {
    let arm = |a| {
        run_experiment(&ExperimentConfig {
            trials: 100,
            seed: 42,
            trial: TrialConfig::default().with_ablation(a),
        })
        .unwrap()
    };
    let (full, no_ekf, no_thread) = (arm(Ablation::Full), arm(Ablation::NoEkf), arm(Ablation::NoThread));
    let (t1, p1) = paired_p(&full, &no_ekf);
    let (t2, p2) = paired_p(&full, &no_thread);
    let (f, e, n) = (
        full.metrics.avg_sutures,
        no_ekf.metrics.avg_sutures,
        no_thread.metrics.avg_sutures,
    );
    let ratio = full.metrics.errors.t as f64 / no_thread.metrics.errors.t as f64;
    (
        f > e && f > n && p1 < 0.05 && p2 < 0.05 && ratio <= 0.6,
        format!(
            "sutures full {f:.2} / no-ekf {e:.2} (t {t1:.2}, p {p1:.1e}) / no-thread {n:.2} (t {t2:.2}, p {p2:.1e}); \
             T errors {} vs {} ({:.0}%)",
            full.metrics.errors.t,
            no_thread.metrics.errors.t,
            100.0 * ratio
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_stitchkit"))
            .args(["simulate", "--seed", "42", "--out"])
            .arg(&path)
            .output()
            .unwrap()
            .status;
        assert!(status.success(), "simulate exited with {status}");
        std::fs::read(path).unwrap()
    };
    let (a, b) = (run("a.json"), run("b.json"));
    (
        a == b && !a.is_empty(),
        format!(
            "two reports of {} and {} bytes, identical: {}",
            a.len(),
            b.len(),
            a == b
        ),
    )
}

fn trial(succeeded: usize, closed: usize, errors: &[ErrorKind]) -> TrialResult {
    TrialResult {
        seed: 0,
        sutures_attempted: succeeded + errors.len(),
        sutures_succeeded: succeeded,
        closed_stitches: closed,
        errors: errors
            .iter()
            .enumerate()
            .map(|(i, k)| ErrorEvent {
                kind: *k,
                suture_index: succeeded + i + 1,
                detail: String::new(),
            })
            .collect(),
        pose_estimate_successes: 2 * succeeded,
        pose_estimate_attempts: 2 * (succeeded + errors.len()),
    }
}

fn metric_definitions() -> Outcome {
    let one = aggregate(&[trial(4, 4, &[ErrorKind::T])], 6).unwrap();
    let closure = one.wound_gap_closure_rate;
    let perfect = aggregate(&vec![trial(6, 6, &[]); 15], 6).unwrap();
    let mixed = aggregate(
        &[
            trial(6, 5, &[]),
            trial(2, 2, &[ErrorKind::A]),
            trial(0, 0, &[ErrorKind::M]),
            trial(3, 3, &[ErrorKind::I]),
        ],
        6,
    )
    .unwrap();
    let e = mixed.errors;
    let ok = (closure - 66.7).abs() <= 0.1
        && (one.single_suture_success_rate - 80.0).abs() < 1e-12
        && perfect.avg_sutures == 6.0
        && perfect.std_sutures == 0.0
        && perfect.wound_gap_closure_rate == 100.0
        && (mixed.wound_gap_closure_rate - 100.0 * 10.0 / 24.0).abs() < 1e-12
        && (mixed.single_suture_success_rate - 100.0 * 11.0 / 14.0).abs() < 1e-12
        && (e.a, e.t, e.i, e.m, e.total) == (1, 0, 1, 1, 3)
        && aggregate(&[], 6).is_err();
    (
        ok,
        format!(
            "4 of 6 closed -> {closure:.2}%; 15 x 6/6 -> {:.2} ± {:.2}, {:.1}%; mixed closure {:.2}%",
            perfect.avg_sutures, perfect.std_sutures, perfect.wound_gap_closure_rate, mixed.wound_gap_closure_rate
        ),
    )
}

fn main() -> ExitCode {
    let ms = Duration::from_millis;
    let criteria: [Criterion; 10] = [
        ("cinch translation sequence", ms(1), cinch_sequence),
        ("circle fit oracle", ms(5_000), circle_fit_oracle),
        ("filter beats single-shot estimates", ms(60_000), ekf_benefit),
        ("filter consumption contract", ms(1_000), ekf_consumption),
        ("tip refinement", ms(30_000), tip_refinement),
        ("suture planning roundtrip", ms(5_000), suture_roundtrip),
        ("skeletonization", ms(10_000), skeletonization),
        ("ablation ordering", ms(120_000), ablation_ordering),
        ("simulate determinism", ms(60_000), determinism),
        ("metric definitions", ms(1_000), metric_definitions),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let pass = ok && elapsed <= limit;
        failed += usize::from(!pass);
        println!(
            "{} {:>2}. {name}: {detail} [{:.3} s, limit {:.3} s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            limit.as_secs_f64()
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
