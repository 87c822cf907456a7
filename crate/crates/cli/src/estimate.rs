use std::fs::File;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use stitchkit_core::geom3d::{Point3, UnitVec3};
use stitchkit_core::harness::{derive_seed, overhead_camera};
use stitchkit_core::io::{load_cloud, read_depth_csv};
use stitchkit_core::mask2d::Pixel;
use stitchkit_core::needle_estimator::{
    estimate_needle, measure_needle, refine_tip, CameraModel, EkfConfig, MeasureConfig, NeedleMeasurement, Side,
    TipRefineConfig,
};

use crate::{load_config, read_json, set, write_json, CmdResult, Failure};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimateConfig {
    pub camera: CameraModel<f64>,
    pub measure: MeasureConfig<f64>,
    pub ekf: EkfConfig<f64>,
    pub refine: TipRefineConfig<f64>,
    /// Filter the measurements; otherwise report the first successful fit.
    pub use_ekf: bool,
    /// Base seed for the per-cloud RANSAC streams.
    pub seed: u64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            camera: overhead_camera(),
            measure: MeasureConfig::default(),
            ekf: EkfConfig::default(),
            refine: TipRefineConfig::default(),
            use_ekf: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
}

#[derive(Args)]
pub struct EstimateArgs {
    /// Segmented needle clouds (CSV or PLY), one measurement each, in order.
    #[arg(required = true)]
    clouds: Vec<PathBuf>,
    /// Estimator config JSON (`camera`, `measure`, `ekf`, `refine`, `use_ekf`, `seed`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Camera JSON: fx, fy, cx, cy, width, height, rotation rows, translation.
    #[arg(long)]
    camera: Option<PathBuf>,
    /// Filter config JSON.
    #[arg(long)]
    ekf_config: Option<PathBuf>,
    /// Depth image CSV for tip refinement.
    #[arg(long)]
    depth: Option<PathBuf>,
    /// Which end, in camera-x labeling, is the tip.
    #[arg(long, value_enum)]
    tip_side: Option<SideArg>,
    /// Report the first successful fit without filtering.
    #[arg(long)]
    no_ekf: bool,
    /// Known needle radius (mm).
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    init_count: Option<usize>,
    #[arg(long)]
    update_count: Option<usize>,
    #[arg(long)]
    max_measurements: Option<usize>,
    #[arg(long)]
    gate_sigma: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Endpoints {
    left: Point3<f64>,
    right: Point3<f64>,
}

#[derive(Serialize)]
struct EstimateOutput {
    center: Point3<f64>,
    endpoints: Endpoints,
    normal: UnitVec3<f64>,
    radius: f64,
    tip_side: Option<Side>,
    tip: Option<Point3<f64>>,
    tip_pixel: Option<Pixel>,
    accepted_count: usize,
    consumed_count: usize,
}

pub fn run(args: EstimateArgs) -> CmdResult {
    let mut cfg: EstimateConfig = load_config(args.config.as_deref())?;
    if let Some(p) = &args.camera {
        cfg.camera = read_json(p)?;
    }
    if let Some(p) = &args.ekf_config {
        cfg.ekf = read_json(p)?;
    }
    set(&mut cfg.measure.known_radius, args.radius);
    set(&mut cfg.seed, args.seed);
    set(&mut cfg.ekf.init_count, args.init_count);
    set(&mut cfg.ekf.update_count, args.update_count);
    set(&mut cfg.ekf.max_measurements, args.max_measurements);
    set(&mut cfg.ekf.gate_sigma, args.gate_sigma);
    if args.no_ekf {
        cfg.use_ekf = false;
    }
    cfg.camera.validate().map_err(Failure::config)?;
    cfg.ekf.validate().map_err(Failure::config)?;
    if cfg.measure.known_radius.is_nan() || cfg.measure.known_radius <= 0.0 {
        return Err(Failure::config(anyhow::anyhow!("radius must be positive")));
    }

    let mut measurements = Vec::new();
    for (k, path) in args.clouds.iter().enumerate() {
        let cloud = load_cloud(path).with_context(|| format!("loading {}", path.display()))?;
        let mc = MeasureConfig {
            ransac: cfg.measure.ransac.with_seed(derive_seed(cfg.seed, k as u64)),
            ..cfg.measure
        };
        match measure_needle(&cloud, &mc, Some(&cfg.camera)) {
            Ok(m) => measurements.push(m),
            Err(e) => eprintln!("stitchkit: skipping {}: {e}", path.display()),
        }
    }

    let (est, accepted, consumed): (NeedleMeasurement<f64>, usize, usize) = if cfg.use_ekf {
        let r = estimate_needle(measurements, &cfg.ekf).context("filtering measurements")?;
        (r.estimate, r.accepted_count, r.consumed_count)
    } else {
        let first = measurements
            .into_iter()
            .next()
            .context("no cloud produced a measurement")?;
        (first, 0, 1)
    };

    let tip_side = args.tip_side.map(|s| match s {
        SideArg::Left => Side::Left,
        SideArg::Right => Side::Right,
    });
    let (tip, tip_pixel) = match (tip_side, &args.depth) {
        (Some(side), Some(path)) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let depth = read_depth_csv(file).with_context(|| format!("reading {}", path.display()))?;
            let r = refine_tip(&depth, &cfg.camera, &est, side, &cfg.refine).context("refining the tip")?;
            (Some(r.tip), Some(r.pixel))
        }
        (Some(side), None) => (Some(est.endpoint(side)), None),
        (None, _) => (None, None),
    };

    let out = EstimateOutput {
        center: est.center,
        endpoints: Endpoints {
            left: est.endpoint_left,
            right: est.endpoint_right,
        },
        normal: est.normal,
        radius: est.radius,
        tip_side,
        tip,
        tip_pixel,
        accepted_count: accepted,
        consumed_count: consumed,
    };
    write_json(&out, args.out.as_ref())
}
