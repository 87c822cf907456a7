use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde::{Deserialize, Serialize};
use stitchkit_core::geom3d::{Line3, Point3};
use stitchkit_core::io::load_cloud;
use stitchkit_core::suture_planner::{build_wound_model, plan_sutures, PlannerConfig, SuturePair, WoundScene};

use crate::{load_config, set, write_json, CmdResult, Failure};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanConfig {
    pub n: usize,
    pub planner: PlannerConfig<f64>,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            n: 6,
            planner: PlannerConfig::default(),
        }
    }
}

#[derive(Args)]
pub struct PlanArgs {
    /// Cloud of the wound ridge line (CSV or PLY).
    #[arg(long)]
    center: PathBuf,
    /// Cloud of the wound's top surface.
    #[arg(long)]
    surface: PathBuf,
    /// Cloud of the phantom base.
    #[arg(long)]
    phantom: PathBuf,
    /// Planner config JSON (`n`, `planner`); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of sutures.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iterations: Option<usize>,
    /// RANSAC inlier distance (mm).
    #[arg(long)]
    threshold: Option<f64>,
    /// Extra thread per suture (mm).
    #[arg(long)]
    slack: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct PlanOutput {
    h: f64,
    w: f64,
    centerline: Line3<f64>,
    positions: Vec<Point3<f64>>,
    pairs: Vec<SuturePair<f64>>,
    d: f64,
}

pub fn run(args: PlanArgs) -> CmdResult {
    let mut cfg: PlanConfig = load_config(args.config.as_deref())?;
    set(&mut cfg.n, args.n);
    set(&mut cfg.planner.ransac.seed, args.seed);
    set(&mut cfg.planner.ransac.iterations, args.iterations);
    set(&mut cfg.planner.ransac.inlier_threshold, args.threshold);
    set(&mut cfg.planner.slack, args.slack);
    if cfg.n == 0
        || cfg.planner.ransac.iterations == 0
        || cfg.planner.ransac.inlier_threshold.is_nan()
        || cfg.planner.ransac.inlier_threshold <= 0.0
    {
        return Err(Failure::config(anyhow::anyhow!(
            "n, iterations and threshold must be positive"
        )));
    }

    let load = |p: &PathBuf| load_cloud(p).with_context(|| format!("loading {}", p.display()));
    let scene = WoundScene {
        wound_center_cloud: load(&args.center)?,
        wound_surface_cloud: load(&args.surface)?,
        phantom_cloud: load(&args.phantom)?,
    };
    let model = build_wound_model(&scene, &cfg.planner).context("building the wound model")?;
    let plan = plan_sutures(&model, cfg.n, &cfg.planner).context("planning sutures")?;
    let out = PlanOutput {
        h: model.height,
        w: model.width,
        centerline: model.centerline,
        positions: plan.centered_positions,
        pairs: plan.pairs,
        d: plan.d,
    };
    write_json(&out, args.out.as_ref())
}
