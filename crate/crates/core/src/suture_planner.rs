//! Wound geometry from segmented clouds and evenly spaced suture placement.
//!
//! The wound is modelled as a raised straight ridge: a top surface plane, a
//! phantom (base) plane below it, and a centerline lying in the top plane.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom3d::{
    plane_plane_distance_at, ransac_fit_line, ransac_fit_plane, GeomError, Line3, Plane, Point3, RansacConfig,
    UnitVec3, Vec3,
};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error(transparent)]
    Geom(GeomError),
    #[error("surface and phantom planes are {angle_deg:.2} deg apart (limit {max_deg:.2} deg)")]
    NonParallelPlanes { angle_deg: f64, max_deg: f64 },
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("suture count must be at least 1")]
    InvalidCount,
    #[error("centerline extent is empty")]
    DegenerateExtent,
    #[error("wound width must be positive")]
    ZeroWidth,
    #[error("wound height must be positive")]
    ZeroHeight,
    #[error("wound model has non-positive width or height")]
    InvalidModel,
    #[error("position is {distance:.4} mm off the surface plane")]
    OffSurface { distance: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

impl From<GeomError> for PlanError {
    fn from(e: GeomError) -> Self {
        match e {
            GeomError::NonParallel { angle_deg, max_deg } => PlanError::NonParallelPlanes { angle_deg, max_deg },
            other => PlanError::Geom(other),
        }
    }
}

/// The three segmented clouds planning starts from (mm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WoundScene<T> {
    pub wound_center_cloud: Vec<Point3<T>>,
    pub wound_surface_cloud: Vec<Point3<T>>,
    pub phantom_cloud: Vec<Point3<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct PlannerConfig<T> {
    pub ransac: RansacConfig<T>,
    pub max_plane_angle_deg: T,
    /// Measure the width as the spread between these percentiles (in
    /// percent) instead of the full min-max spread.
    pub width_percentiles: Option<(T, T)>,
    /// Extra thread per suture on top of the tissue path (mm).
    pub slack: T,
    /// Which side of the wound insertion happens on, relative to `width_dir`.
    pub side_sign: T,
    /// Preferred sense of the centerline. Without it the direction is
    /// canonicalized (largest component positive).
    pub direction_hint: Option<Vec3<T>>,
}

impl<T: Real> Default for PlannerConfig<T> {
    fn default() -> Self {
        Self {
            ransac: RansacConfig::default(),
            max_plane_angle_deg: T::lit(10.0),
            width_percentiles: None,
            slack: T::lit(5.0),
            side_sign: -T::one(),
            direction_hint: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WoundModel<T> {
    /// Top surface; its normal points away from the phantom.
    pub surface_plane: Plane<T>,
    pub phantom_plane: Plane<T>,
    pub centerline: Line3<T>,
    /// Parameter range of the centerline inliers along `centerline`.
    pub centerline_extent: [T; 2],
    pub width: T,
    pub height: T,
    pub width_dir: UnitVec3<T>,
}

impl<T: Real> WoundModel<T> {
    pub fn surface_normal(&self) -> UnitVec3<T> {
        self.surface_plane.normal
    }

    pub fn length(&self) -> T {
        self.centerline_extent[1] - self.centerline_extent[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SuturePair<T> {
    pub insertion: Point3<T>,
    pub extraction: Point3<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SuturePlan<T> {
    pub n: usize,
    pub pairs: Vec<SuturePair<T>>,
    pub centered_positions: Vec<Point3<T>>,
    /// Thread length consumed per suture (mm).
    pub d: T,
}

fn percentile_spread<T: Real>(mut values: Vec<T>, lo: T, hi: T) -> T {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let at = |p: T| {
        let last = values.len() - 1;
        let pos = (p / T::lit(100.0)).max(T::zero()).min(T::one()) * T::from_usize(last).unwrap_or_else(T::zero);
        let i = pos.floor().to_usize().unwrap_or(0).min(last);
        let j = (i + 1).min(last);
        let f = pos - pos.floor();
        values[i] + (values[j] - values[i]) * f
    };
    at(hi) - at(lo)
}

pub fn build_wound_model<T: Real>(scene: &WoundScene<T>, cfg: &PlannerConfig<T>) -> Result<WoundModel<T>, PlanError> {
    if scene.wound_surface_cloud.len() < 3 || scene.phantom_cloud.len() < 3 {
        return Err(PlanError::DegenerateInput("surface and phantom clouds need 3 points"));
    }
    if scene.wound_center_cloud.len() < 2 {
        return Err(PlanError::DegenerateInput("center cloud needs 2 points"));
    }
    let all_finite = [
        &scene.wound_center_cloud,
        &scene.wound_surface_cloud,
        &scene.phantom_cloud,
    ]
    .iter()
    .all(|c| c.iter().all(|p| p.is_finite()));
    if !all_finite {
        return Err(PlanError::DegenerateInput("non-finite point"));
    }

    let (surface, surface_inliers) = ransac_fit_plane(&scene.wound_surface_cloud, &cfg.ransac)?;
    let (phantom, phantom_inliers) = ransac_fit_plane(&scene.phantom_cloud, &cfg.ransac)?;
    let surface_pts: Vec<_> = surface_inliers.iter().map(|&i| scene.wound_surface_cloud[i]).collect();
    let phantom_pts: Vec<_> = phantom_inliers.iter().map(|&i| scene.phantom_cloud[i]).collect();
    let surface_anchor = Vec3::centroid(&surface_pts).unwrap_or_else(|| surface.reference_point());
    let phantom_anchor = Vec3::centroid(&phantom_pts).unwrap_or_else(|| phantom.reference_point());

    // Surface normal points away from the phantom, the phantom normal matches it.
    let surface = surface.oriented_towards(surface_anchor - phantom_anchor);
    let phantom = phantom.oriented_towards(*surface.normal);
    let height = plane_plane_distance_at(&surface, &phantom, cfg.max_plane_angle_deg, surface_anchor)?;
    if !(height > T::zero()) {
        return Err(PlanError::ZeroHeight);
    }

    let projected: Vec<_> = scene.wound_center_cloud.iter().map(|p| surface.project(*p)).collect();
    let (line, line_inliers) = ransac_fit_line(&projected, &cfg.ransac)?;
    // Keep the line inside the surface plane exactly.
    let dir = (*line.direction - *surface.normal * surface.normal.dot(*line.direction))
        .normalized()
        .ok_or(PlanError::DegenerateInput("centerline parallel to surface normal"))?;
    let dir = match cfg.direction_hint {
        Some(h) => dir.oriented_towards(h),
        None => dir.canonical(),
    };
    let centerline = Line3::new(surface.project(line.origin), dir);
    let (mut s_min, mut s_max) = (T::infinity(), T::neg_infinity());
    for &i in &line_inliers {
        let s = centerline.parameter(projected[i]);
        s_min = s_min.min(s);
        s_max = s_max.max(s);
    }

    let width_dir = surface
        .normal
        .cross(*dir)
        .normalized()
        .ok_or(PlanError::DegenerateInput("centerline parallel to surface normal"))?;
    let spread: Vec<T> = scene.wound_surface_cloud.iter().map(|p| width_dir.dot(*p)).collect();
    let width = match cfg.width_percentiles {
        Some((lo, hi)) => percentile_spread(spread, lo, hi),
        None => {
            let lo = spread.iter().copied().fold(T::infinity(), T::min);
            let hi = spread.iter().copied().fold(T::neg_infinity(), T::max);
            hi - lo
        }
    };
    if !(width > T::zero()) {
        return Err(PlanError::ZeroWidth);
    }

    Ok(WoundModel {
        surface_plane: surface,
        phantom_plane: phantom,
        centerline,
        centerline_extent: [s_min, s_max],
        width,
        height,
        width_dir,
    })
}

/// Cell-midpoint placement: `s_min + (i − ½)·L/n`, so the spacing is `L/n`
/// and the end margins are half a spacing.
pub fn place_sutures<T: Real>(model: &WoundModel<T>, n: usize) -> Result<Vec<Point3<T>>, PlanError> {
    if n == 0 {
        return Err(PlanError::InvalidCount);
    }
    let length = model.length();
    if !(length > T::zero()) {
        return Err(PlanError::DegenerateExtent);
    }
    let nt = T::from_usize(n).ok_or(PlanError::InvalidCount)?;
    let half = T::lit(0.5);
    Ok((0..n)
        .map(|i| {
            let k = T::from_usize(i).unwrap_or_else(T::zero) + half;
            let s = model.centerline_extent[0] + k * length / nt;
            model.surface_plane.project(model.centerline.point_at(s))
        })
        .collect())
}

pub fn insertion_extraction_points<T: Real>(
    model: &WoundModel<T>,
    positions: &[Point3<T>],
    side_sign: T,
) -> Result<Vec<SuturePair<T>>, PlanError> {
    if !(model.width > T::zero()) {
        return Err(PlanError::ZeroWidth);
    }
    if !(model.height > T::zero()) {
        return Err(PlanError::ZeroHeight);
    }
    if side_sign.abs() != T::one() {
        return Err(PlanError::InvalidConfig("side_sign must be +1 or -1"));
    }
    let half = T::lit(0.5);
    let across = *model.width_dir * (side_sign * model.width * half);
    let down = *model.surface_normal() * (model.height * half);
    positions
        .iter()
        .map(|&p| {
            let off = model.surface_plane.distance(p);
            if off > T::lit(1e-3) {
                return Err(PlanError::OffSurface { distance: off.as_f64() });
            }
            Ok(SuturePair {
                insertion: p + across - down,
                extraction: p - across - down,
            })
        })
        .collect()
}

/// Thread used by one suture: across the wound top, down and up each side,
/// plus `slack`.
pub fn per_suture_thread_length<T: Real>(model: &WoundModel<T>, slack: T) -> Result<T, PlanError> {
    if !(model.width > T::zero() && model.height > T::zero()) || slack < T::zero() {
        return Err(PlanError::InvalidModel);
    }
    Ok(model.width + T::lit(2.0) * model.height + slack)
}

/// Placement, insertion/extraction pairs and thread length in one go.
pub fn plan_sutures<T: Real>(
    model: &WoundModel<T>,
    n: usize,
    cfg: &PlannerConfig<T>,
) -> Result<SuturePlan<T>, PlanError> {
    let centered_positions = place_sutures(model, n)?;
    let pairs = insertion_extraction_points(model, &centered_positions, cfg.side_sign)?;
    Ok(SuturePlan {
        n,
        pairs,
        centered_positions,
        d: per_suture_thread_length(model, cfg.slack)?,
    })
}
