use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::needle::NeedleGroundTruth;
use super::SceneError;
use crate::mask2d::{BinaryMask, Raster};
use crate::needle_estimator::CameraModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    /// Width of the rendered needle stroke (pixels, odd values are exact).
    pub pixel_thickness: usize,
    /// Depth quantization step (mm); 0 disables quantization.
    pub depth_step: f64,
    /// Depth written outside the mask; `None` leaves the invalid sentinel 0.
    pub background_depth: Option<f64>,
    /// Gaussian noise on needle depths before quantization (mm).
    pub depth_noise: f64,
    pub seed: u64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            pixel_thickness: 3,
            depth_step: 0.05,
            background_depth: None,
            depth_noise: 0.0,
            seed: 0,
        }
    }
}

fn quantize(z: f64, step: f64) -> f64 {
    if step > 0.0 {
        (z / step).round() * step
    } else {
        z
    }
}

/// Rasterizes the needle arc into a mask and a camera-depth image.
pub fn render_views(
    gt: &NeedleGroundTruth,
    camera: &CameraModel<f64>,
    cfg: &RenderConfig,
) -> Result<(BinaryMask, Raster<f64>), SceneError> {
    if !(gt.radius > 0.0) {
        return Err(SceneError::InvalidRadius);
    }
    if cfg.pixel_thickness == 0 || !(cfg.depth_step >= 0.0) || !(cfg.depth_noise >= 0.0) {
        return Err(SceneError::InvalidParams("render thickness, step and noise"));
    }
    let (w, h) = (camera.width, camera.height);
    let pi = std::f64::consts::PI;

    let mut z_min = f64::INFINITY;
    for k in 0..=64 {
        let z = camera.to_camera(gt.arc_point(pi * k as f64 / 64.0)).z;
        z_min = z_min.min(z);
    }
    if !(z_min > 0.0) {
        return Err(SceneError::NotVisible);
    }
    // Quarter-pixel steps along the arc at the nearest depth.
    let step = 0.25 * z_min / camera.fx.max(camera.fy);
    let samples = ((pi * gt.radius / step).ceil() as usize).max(2);

    let reach = ((cfg.pixel_thickness - 1) / 2) as isize;
    let mut depth = vec![f64::INFINITY; w * h];
    for k in 0..=samples {
        let p = gt.arc_point(pi * k as f64 / samples as f64);
        let Some((u, v, z)) = camera.project(p) else {
            return Err(SceneError::NotVisible);
        };
        let (pu, pv) = (u.round() as isize, v.round() as isize);
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let (x, y) = (pu + dx, pv + dy);
                if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
                    let i = y as usize * w + x as usize;
                    depth[i] = depth[i].min(z);
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.depth_noise.max(0.0)).expect("finite sigma");
    let background = cfg.background_depth.unwrap_or(0.0);
    let mut bits = vec![false; w * h];
    let values: Vec<f64> = depth
        .iter()
        .zip(bits.iter_mut())
        .map(|(z, bit)| {
            if z.is_finite() {
                *bit = true;
                let jitter = if cfg.depth_noise > 0.0 {
                    noise.sample(&mut rng)
                } else {
                    0.0
                };
                quantize(z + jitter, cfg.depth_step)
            } else {
                background
            }
        })
        .collect();
    if !bits.iter().any(|b| *b) {
        return Err(SceneError::NotVisible);
    }
    let mask = BinaryMask::from_bits(w, h, bits).expect("sized to the camera");
    let raster = Raster::from_values(w, h, values).expect("sized to the camera");
    Ok((mask, raster))
}
