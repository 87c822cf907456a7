use serde::{Deserialize, Serialize};

use super::camera::CameraModel;
use super::measurement::{NeedleMeasurement, Side};
use super::EstimateError;
use crate::geom3d::{ray_circle_intersection, Point3};
use crate::mask2d::{adaptive_depth_threshold, skeletonize, tip_pixel, Pixel, Raster};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct TipRefineConfig<T> {
    /// Side length of the square crop around the projected tip (pixels).
    pub crop_size: usize,
    /// Largest accepted rim snap, as a fraction of the needle radius.
    pub snap_factor: T,
}

impl<T: Real> Default for TipRefineConfig<T> {
    fn default() -> Self {
        Self {
            crop_size: 200,
            snap_factor: T::lit(0.25),
        }
    }
}

/// Refined tip plus the intermediate pixel and its naive deprojection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipRefinement<T> {
    pub tip: Point3<T>,
    /// Tip pixel in full-image coordinates.
    pub pixel: Pixel,
    /// The tip pixel lifted with its own depth reading, if it has one.
    pub raw: Option<Point3<T>>,
}

/// Top-left corner of a `size`-wide window centred on `c`, kept inside `len`.
fn window_start(c: f64, size: usize, len: usize) -> usize {
    let start = c.round() - (size / 2) as f64;
    let max_start = len.saturating_sub(size) as f64;
    start.clamp(0.0, max_start) as usize
}

/// Locates the tip in a depth image and lifts it onto the estimated circle:
/// threshold a crop around the projected tip, thin it, take the skeleton end
/// nearest the projection and intersect that pixel's ray with the circle.
pub fn refine_tip<T: Real>(
    depth: &Raster<T>,
    camera: &CameraModel<T>,
    estimate: &NeedleMeasurement<T>,
    tip_side: Side,
    cfg: &TipRefineConfig<T>,
) -> Result<TipRefinement<T>, EstimateError> {
    if cfg.crop_size == 0 || !(cfg.snap_factor > T::zero()) {
        return Err(EstimateError::InvalidConfig(
            "crop size and snap factor must be positive",
        ));
    }
    if depth.width() != camera.width || depth.height() != camera.height {
        return Err(EstimateError::InvalidCamera(
            "depth raster does not match camera resolution",
        ));
    }
    let guess = estimate.endpoint(tip_side);
    let (u, v, _) = camera.project(guess).ok_or(EstimateError::NotVisible)?;
    if !camera.in_image(u, v) {
        return Err(EstimateError::NotVisible);
    }
    let (u, v) = (u.as_f64(), v.as_f64());
    let x0 = window_start(u, cfg.crop_size, depth.width());
    let y0 = window_start(v, cfg.crop_size, depth.height());
    let crop = depth.crop(x0, y0, cfg.crop_size, cfg.crop_size);

    let mask = adaptive_depth_threshold(&crop)?;
    let skeleton = skeletonize(&mask);
    let local = tip_pixel(&skeleton, [u - x0 as f64, v - y0 as f64])?;
    let pixel = Pixel::new(local.x + x0, local.y + y0);

    let pu = T::from_usize(pixel.x).unwrap_or_else(T::zero);
    let pv = T::from_usize(pixel.y).unwrap_or_else(T::zero);
    let d = depth.get(pixel.x, pixel.y);
    let raw = Raster::is_valid_depth(d).then(|| camera.deproject_depth(pu, pv, d));

    let ray = camera.deproject(pu, pv);
    let tip = ray_circle_intersection(&ray, &estimate.circle(), cfg.snap_factor * estimate.radius)?;
    Ok(TipRefinement { tip, pixel, raw })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom3d::{Mat3, UnitVec3, Vec3};

    fn camera() -> CameraModel<f64> {
        CameraModel {
            fx: 600.0,
            fy: 600.0,
            cx: 320.0,
            cy: 240.0,
            width: 640,
            height: 480,
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    #[test]
    fn window_is_clamped() {
        assert_eq!(window_start(50.0, 200, 640), 0);
        assert_eq!(window_start(600.0, 200, 640), 440);
        assert_eq!(window_start(320.0, 200, 640), 220);
        assert_eq!(window_start(10.0, 200, 100), 0);
    }

    #[test]
    fn needle_behind_camera_is_not_visible() {
        let est = NeedleMeasurement {
            center: Vec3::new(0.0, 0.0, -100.0),
            endpoint_left: Vec3::new(-10.0, 0.0, -100.0),
            endpoint_right: Vec3::new(10.0, 0.0, -100.0),
            normal: UnitVec3::z_axis(),
            radius: 10.0,
        };
        let depth = Raster::filled(640, 480, 0.0);
        assert!(matches!(
            refine_tip(&depth, &camera(), &est, Side::Right, &TipRefineConfig::default()),
            Err(EstimateError::NotVisible)
        ));
    }
}
