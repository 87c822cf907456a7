use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use stitchkit_core::geom3d::Point3;
use stitchkit_core::harness::{derive_seed, SimSceneConfig};
use stitchkit_core::io::{save_cloud, write_depth_csv, write_mask_pgm};
use stitchkit_core::needle_estimator::{CameraModel, NeedleMeasurement, Side};
use stitchkit_core::suture_planner::WoundModel;
use stitchkit_core::synth_scene::{
    generate_wound_scene, oracle_needle_state, random_needle_pose, render_views, sample_needle_cloud,
    NeedleGroundTruth, NoiseModel, PoseSampler, RenderConfig, WoundSceneParams,
};

use crate::{load_config, set, write_json, CmdResult, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CloudFormat {
    Csv,
    Ply,
}

/// Everything that shapes a generated bundle. The resolved copy is written
/// next to the data as `scene_config.json`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub seed: u64,
    /// Independent noisy clouds of the same needle.
    pub needle_clouds: usize,
    /// Points drawn per cloud before dropout.
    pub cloud_points: usize,
    pub noise: NoiseModel,
    pub camera: CameraModel<f64>,
    pub poses: PoseSampler,
    pub render: RenderConfig,
    /// Background depth behind the needle, relative to its center (mm).
    pub background_offset: f64,
    pub wound: WoundSceneParams,
    pub format: CloudFormat,
}

impl Default for GenConfig {
    fn default() -> Self {
        let sim = SimSceneConfig::default();
        Self {
            seed: 0,
            needle_clouds: 15,
            cloud_points: sim.cloud_points,
            noise: NoiseModel::default(),
            camera: sim.camera,
            poses: sim.poses,
            render: sim.render,
            background_offset: sim.background_offset,
            wound: sim.wound,
            format: CloudFormat::Csv,
        }
    }
}

#[derive(Args)]
pub struct GenArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Scene config JSON; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of needle clouds.
    #[arg(long)]
    clouds: Option<usize>,
    /// Points per needle cloud before dropout.
    #[arg(long)]
    points: Option<usize>,
    /// Per-axis needle cloud noise (mm).
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    dropout: Option<f64>,
    /// Needle radius (mm).
    #[arg(long)]
    radius: Option<f64>,
    /// Per-axis wound cloud noise (mm).
    #[arg(long)]
    wound_sigma: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<CloudFormat>,
}

#[derive(Serialize)]
struct NeedleOracle {
    truth: NeedleGroundTruth,
    /// Exact state with ends labeled by camera x.
    state: NeedleMeasurement<f64>,
    tip_side: Side,
    thread_side: Side,
}

#[derive(Serialize)]
struct Oracle {
    needle: NeedleOracle,
    wound: WoundModel<f64>,
}

mod tag {
    pub const POSE: u64 = 1;
    pub const CLOUD: u64 = 2;
    pub const RENDER: u64 = 3;
    pub const WOUND: u64 = 4;
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::config(anyhow::anyhow!("{e}"))
}

pub fn run(args: GenArgs) -> CmdResult {
    let mut cfg: GenConfig = load_config(args.config.as_deref())?;
    set(&mut cfg.seed, args.seed);
    set(&mut cfg.needle_clouds, args.clouds);
    set(&mut cfg.cloud_points, args.points);
    set(&mut cfg.noise.sigma, args.sigma);
    set(&mut cfg.noise.specular_dropout, args.dropout);
    set(&mut cfg.poses.radius, args.radius);
    set(&mut cfg.wound.sigma, args.wound_sigma);
    set(&mut cfg.format, args.format);
    cfg.noise.validate().map_err(invalid)?;
    cfg.wound.validate().map_err(invalid)?;
    cfg.camera.validate().map_err(invalid)?;
    if cfg.needle_clouds == 0 || cfg.poses.radius.is_nan() || cfg.poses.radius <= 0.0 {
        return Err(invalid("needle_clouds and radius must be positive"));
    }

    let dir = &args.out;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let ext = match cfg.format {
        CloudFormat::Csv => "csv",
        CloudFormat::Ply => "ply",
    };
    let save = |name: &str, pts: &[Point3<f64>]| -> anyhow::Result<()> {
        let path = dir.join(format!("{name}.{ext}"));
        save_cloud(&path, pts).with_context(|| format!("writing {}", path.display()))
    };

    let cam = &cfg.camera;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, tag::POSE));
    let truth = random_needle_pose(&mut rng, cam, &cfg.poses);
    for k in 0..cfg.needle_clouds {
        let noise = cfg
            .noise
            .with_seed(derive_seed(derive_seed(cfg.seed, tag::CLOUD), k as u64));
        let cloud = sample_needle_cloud(&truth, &noise, cfg.cloud_points).map_err(invalid)?;
        save(&format!("needle_{k:02}"), &cloud)?;
    }

    let render = RenderConfig {
        background_depth: Some(cam.to_camera(truth.pose.position).z + cfg.background_offset),
        seed: derive_seed(cfg.seed, tag::RENDER),
        ..cfg.render
    };
    let (mask, depth) = render_views(&truth, cam, &render).map_err(invalid)?;
    write_mask_pgm(create(dir, "mask.pgm")?, &mask).context("writing the mask")?;
    write_depth_csv(create(dir, "depth.csv")?, &depth).context("writing the depth image")?;

    let wound_params = WoundSceneParams {
        seed: derive_seed(cfg.seed, tag::WOUND),
        ..cfg.wound
    };
    let (scene, model) = generate_wound_scene(&wound_params).map_err(invalid)?;
    save("wound_center", &scene.wound_center_cloud)?;
    save("wound_surface", &scene.wound_surface_cloud)?;
    save("phantom", &scene.phantom_cloud)?;

    let oracle = Oracle {
        needle: NeedleOracle {
            state: oracle_needle_state(&truth, Some(cam)).map_err(invalid)?,
            tip_side: truth.tip_side_in(Some(cam)),
            thread_side: truth.thread_side_in(Some(cam)),
            truth,
        },
        wound: model,
    };
    write_json(&oracle, Some(&dir.join("oracle.json")))?;
    write_json(cam, Some(&dir.join("camera.json")))?;
    write_json(&cfg, Some(&dir.join("scene_config.json")))?;
    println!("wrote scene bundle to {}", dir.display());
    Ok(())
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}
