use proptest::prelude::*;
use stitchkit_core::dexterity_controller::Pose;
use stitchkit_core::geom3d::{Mat3, Point3, UnitVec3, Vec3};
use stitchkit_core::suture_planner::*;
use stitchkit_core::synth_scene::{generate_wound_scene, WoundSceneParams};

fn planner() -> PlannerConfig<f64> {
    PlannerConfig::default()
}

fn rotation(ax: f64, ay: f64, az: f64) -> Mat3<f64> {
    Mat3::from_axis_angle(UnitVec3::z_axis(), az)
        * Mat3::from_axis_angle(UnitVec3::y_axis(), ay)
        * Mat3::from_axis_angle(UnitVec3::x_axis(), ax)
}

#[test]
fn noise_free_roundtrip_is_exact() {
    let (scene, oracle) = generate_wound_scene(&WoundSceneParams::default()).unwrap();
    assert_eq!((oracle.height, oracle.width), (5.0, 9.0));
    let model = build_wound_model(&scene, &planner()).unwrap();
    assert!((model.height - 5.0).abs() < 1e-6);
    assert!((model.width - 9.0).abs() < 1e-6);
    assert!((model.length() - 60.0).abs() < 1e-6);
    assert!(model.centerline.direction.angle_to(oracle.centerline.direction) < 1e-9);
}

#[test]
fn noisy_roundtrip_within_five_percent() {
    for seed in 0..10 {
        let params = WoundSceneParams {
            sigma: 0.2,
            seed,
            placement: Pose::new(Vec3::new(3.0, -4.0, 20.0), rotation(0.1, -0.2, 0.7)),
            ..WoundSceneParams::default()
        };
        let (scene, oracle) = generate_wound_scene(&params).unwrap();
        let cfg = PlannerConfig {
            ransac: planner().ransac.with_seed(seed),
            ..planner()
        };
        let model = build_wound_model(&scene, &cfg).unwrap();
        assert!(
            (model.height / 5.0 - 1.0).abs() < 0.05,
            "seed {seed}: h {}",
            model.height
        );
        assert!((model.width / 9.0 - 1.0).abs() < 0.05, "seed {seed}: w {}", model.width);
        let angle = model.centerline.direction.angle_to(oracle.centerline.direction);
        let angle = angle.min(std::f64::consts::PI - angle).to_degrees();
        assert!(angle < 2.0, "seed {seed}: {angle} deg");
    }
}

#[test]
fn tilted_phantom_is_rejected() {
    let (mut scene, _) = generate_wound_scene(&WoundSceneParams::default()).unwrap();
    let tilt = Mat3::from_axis_angle(UnitVec3::x_axis(), 15f64.to_radians());
    for p in scene.phantom_cloud.iter_mut() {
        *p = tilt.mul_vec(*p);
    }
    assert!(matches!(
        build_wound_model(&scene, &planner()),
        Err(PlanError::NonParallelPlanes { .. })
    ));
}

#[test]
fn plan_geometry_on_a_noise_free_scene() {
    let params = WoundSceneParams {
        placement: Pose::new(Vec3::new(-2.0, 7.0, 40.0), rotation(0.3, 0.2, -1.1)),
        ..WoundSceneParams::default()
    };
    let (scene, _) = generate_wound_scene(&params).unwrap();
    let model = build_wound_model(&scene, &planner()).unwrap();
    let plan = plan_sutures(&model, 6, &planner()).unwrap();
    assert_eq!(plan.pairs.len(), 6);
    assert!((plan.d - (9.0 + 10.0 + planner().slack)).abs() < 1e-6);

    let spacings: Vec<f64> = plan
        .centered_positions
        .windows(2)
        .map(|w| w[0].distance(w[1]))
        .collect();
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    let var = spacings.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / spacings.len() as f64;
    assert!(var.sqrt() < 1e-12, "spacing spread {}", var.sqrt());
    assert!((mean - model.length() / 6.0).abs() < 1e-9);

    let n = *model.surface_normal();
    assert!(model.width_dir.dot(*model.centerline.direction).abs() < 1e-6);
    assert!(model.width_dir.dot(n).abs() < 1e-6);
    for pair in &plan.pairs {
        let sep = pair.insertion - pair.extraction;
        assert!((sep.norm() - model.width).abs() < 1e-9);
        assert!(sep.cross(*model.width_dir).norm() < 1e-9);
        for p in [pair.insertion, pair.extraction] {
            assert!((model.surface_plane.signed_distance(p) + model.height / 2.0).abs() < 1e-9);
        }
    }
}

#[test]
fn f32_planning_agrees() {
    let (scene, _) = generate_wound_scene(&WoundSceneParams::default()).unwrap();
    let cast = |c: &[Point3<f64>]| c.iter().map(|p| p.cast::<f32>()).collect::<Vec<_>>();
    let scene32 = WoundScene {
        wound_center_cloud: cast(&scene.wound_center_cloud),
        wound_surface_cloud: cast(&scene.wound_surface_cloud),
        phantom_cloud: cast(&scene.phantom_cloud),
    };
    let model = build_wound_model(&scene32, &PlannerConfig::<f32>::default()).unwrap();
    assert!((model.height - 5.0).abs() < 1e-3);
    assert!((model.width - 9.0).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn roundtrip_for_any_placement(
        ax in -0.6..0.6f64, ay in -0.6..0.6f64, az in -3.1..3.1f64,
        tx in -50.0..50.0f64, ty in -50.0..50.0f64, tz in -50.0..50.0f64,
        h in 2.0..10.0f64, w in 4.0..15.0f64,
    ) {
        let params = WoundSceneParams {
            height: h,
            width: w,
            placement: Pose::new(Vec3::new(tx, ty, tz), rotation(ax, ay, az)),
            ..WoundSceneParams::default()
        };
        let (scene, _) = generate_wound_scene(&params).unwrap();
        let model = build_wound_model(&scene, &planner()).unwrap();
        prop_assert!((model.height - h).abs() < 1e-6);
        prop_assert!((model.width - w).abs() < 1e-6);
    }

    #[test]
    fn plans_follow_rigid_motions(
        ax in -3.1..3.1f64, ay in -1.5..1.5f64, az in -3.1..3.1f64,
        tx in -80.0..80.0f64, ty in -80.0..80.0f64, tz in -80.0..80.0f64,
        sigma in prop::sample::select(vec![0.0, 0.2]),
        seed in 0u64..1000,
    ) {
        let params = WoundSceneParams { sigma, seed, ..WoundSceneParams::default() };
        let (scene, _) = generate_wound_scene(&params).unwrap();
        let (r, t) = (rotation(ax, ay, az), Vec3::new(tx, ty, tz));
        let motion = |c: &[Point3<f64>]| c.iter().map(|p| r.mul_vec(*p) + t).collect::<Vec<_>>();
        let moved = WoundScene {
            wound_center_cloud: motion(&scene.wound_center_cloud),
            wound_surface_cloud: motion(&scene.wound_surface_cloud),
            phantom_cloud: motion(&scene.phantom_cloud),
        };
        let hint = Vec3::new(0.0, 1.0, 0.0);
        let base_cfg = PlannerConfig { direction_hint: Some(hint), ..planner() };
        let moved_cfg = PlannerConfig { direction_hint: Some(r.mul_vec(hint)), ..planner() };
        let a = plan_sutures(&build_wound_model(&scene, &base_cfg).unwrap(), 6, &base_cfg).unwrap();
        let b = plan_sutures(&build_wound_model(&moved, &moved_cfg).unwrap(), 6, &moved_cfg).unwrap();
        prop_assert!((a.d - b.d).abs() < 1e-6);
        for (pa, pb) in a.pairs.iter().zip(&b.pairs) {
            prop_assert!((r.mul_vec(pa.insertion) + t).distance(pb.insertion) < 1e-6);
            prop_assert!((r.mul_vec(pa.extraction) + t).distance(pb.extraction) < 1e-6);
        }
    }
}
