use serde::{Deserialize, Serialize};

use super::camera::CameraModel;
use super::EstimateError;
use crate::geom3d::{
    arc_window_endpoints, arc_window_points, farthest_pair, farthest_pair_along_arc, fit_circle_in_plane, gather,
    ransac_fit_plane, Circle3, Mat3, Point3, RansacConfig, UnitVec3, Vec3,
};
use crate::scalar::Real;

/// Which needle end an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Dimension of the flattened needle state.
pub const STATE_DIM: usize = 13;

/// One needle observation: `[center, left end, right end, normal, radius]`.
///
/// The normal is oriented so that `normal × (right − left)` points from the
/// chord toward the needle body, which fixes the sign independently of the
/// viewpoint and keeps consecutive measurements comparable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NeedleMeasurement<T> {
    pub center: Point3<T>,
    pub endpoint_left: Point3<T>,
    pub endpoint_right: Point3<T>,
    pub normal: UnitVec3<T>,
    pub radius: T,
}

impl<T: Real> NeedleMeasurement<T> {
    pub fn to_vector(&self) -> [T; STATE_DIM] {
        let (c, l, r, n) = (self.center, self.endpoint_left, self.endpoint_right, *self.normal);
        [c.x, c.y, c.z, l.x, l.y, l.z, r.x, r.y, r.z, n.x, n.y, n.z, self.radius]
    }

    /// Rebuilds a measurement from a state vector, renormalizing the normal.
    pub fn from_vector(x: &[T; STATE_DIM]) -> Result<Self, EstimateError> {
        let normal = Vec3::new(x[9], x[10], x[11])
            .normalized()
            .ok_or(EstimateError::DegenerateEstimate("zero-length normal"))?;
        Ok(Self {
            center: Vec3::new(x[0], x[1], x[2]),
            endpoint_left: Vec3::new(x[3], x[4], x[5]),
            endpoint_right: Vec3::new(x[6], x[7], x[8]),
            normal,
            radius: x[12],
        })
    }

    pub fn endpoint(&self, side: Side) -> Point3<T> {
        match side {
            Side::Left => self.endpoint_left,
            Side::Right => self.endpoint_right,
        }
    }

    pub fn circle(&self) -> Circle3<T> {
        Circle3::new(self.center, self.normal, self.radius)
    }

    /// Unit vector from the chord midpoint toward the middle of the arc.
    pub fn body_direction(&self) -> Option<UnitVec3<T>> {
        self.normal.cross(self.endpoint_right - self.endpoint_left).normalized()
    }

    /// Applies `p -> rotation (p − pivot) + pivot + translation` to every component.
    pub fn transformed(&self, rotation: &Mat3<T>, pivot: Point3<T>, translation: Vec3<T>) -> Self {
        let map = |p: Point3<T>| rotation.mul_vec(p - pivot) + pivot + translation;
        Self {
            center: map(self.center),
            endpoint_left: map(self.endpoint_left),
            endpoint_right: map(self.endpoint_right),
            normal: rotation.rotate_unit(self.normal),
            radius: self.radius,
        }
    }

    /// Larger of the two endpoint distances to `other`.
    pub fn max_endpoint_error(&self, other: &Self) -> T {
        self.endpoint_left
            .distance(other.endpoint_left)
            .max(self.endpoint_right.distance(other.endpoint_right))
    }

    /// Checks the structural invariants: endpoints near the rim (within
    /// `rim_fraction` of the radius) and near the plane (within `plane_tol` mm).
    pub fn is_consistent(&self, rim_fraction: T, plane_tol: T) -> bool {
        if !(self.radius > T::zero()) {
            return false;
        }
        let plane = self.circle().plane();
        [self.endpoint_left, self.endpoint_right].iter().all(|p| {
            ((p.distance(self.center) - self.radius).abs() <= rim_fraction * self.radius)
                && plane.distance(*p) <= plane_tol
        })
    }
}

/// Settings for a single-shot circle measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct MeasureConfig<T> {
    pub known_radius: T,
    /// Largest accepted `|r_fit − r_known| / r_known`.
    pub radius_tolerance: T,
    pub ransac: RansacConfig<T>,
    pub endpoints: EndpointMethod,
    /// Plane inliers farther than this fraction of the known radius from the
    /// first circle fit are dropped before the refit.
    pub rim_band: T,
    /// Angular length (degrees) of the arc window that keeps the points used
    /// by the arc endpoint rule; strays outside it are ignored.
    pub arc_window_deg: T,
}

/// How "the two farthest points" of the projected inliers are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointMethod {
    /// Farthest apart along the fitted circle, taken on the rim, among the
    /// points of the best-covered arc window.
    #[default]
    Arc,
    /// Farthest apart in straight-line distance, as measured.
    Chord,
    /// Straight-line farthest pair, moved radially onto the rim.
    ChordSnapped,
    /// Ends of the half circle covering the most points.
    Semicircle,
}

impl<T: Real> Default for MeasureConfig<T> {
    fn default() -> Self {
        Self {
            known_radius: T::lit(40.0) / T::PI(),
            radius_tolerance: T::lit(0.2),
            ransac: RansacConfig::default(),
            endpoints: EndpointMethod::default(),
            rim_band: T::lit(0.25),
            arc_window_deg: T::lit(190.0),
        }
    }
}

/// Minimum cloud size for a measurement.
pub const MIN_CLOUD_POINTS: usize = 10;

/// Fits one needle measurement to a segmented needle cloud: consensus plane,
/// in-plane circle through the projected inliers (refit without strays off
/// the rim), and the farthest pair of projected inliers as endpoints. Left/right follow the camera x axis (world
/// x without a camera).
pub fn measure_needle<T: Real>(
    cloud: &[Point3<T>],
    cfg: &MeasureConfig<T>,
    camera: Option<&CameraModel<T>>,
) -> Result<NeedleMeasurement<T>, EstimateError> {
    if !(cfg.known_radius > T::zero()) {
        return Err(EstimateError::InvalidConfig("known radius must be positive"));
    }
    if cloud.len() < MIN_CLOUD_POINTS {
        return Err(EstimateError::InsufficientPoints {
            got: cloud.len(),
            needed: MIN_CLOUD_POINTS,
        });
    }
    let (plane, inliers) = ransac_fit_plane(cloud, &cfg.ransac)?;
    let projected: Vec<_> = gather(cloud, &inliers).into_iter().map(|p| plane.project(p)).collect();
    let first = fit_circle_in_plane(&projected, &plane)?;
    let band = cfg.rim_band * cfg.known_radius;
    let near_rim: Vec<_> = projected
        .iter()
        .copied()
        .filter(|p| (p.distance(first.center) - first.radius).abs() <= band)
        .collect();
    let (circle, projected) = if near_rim.len() == projected.len() || near_rim.len() < 3 {
        (first, projected)
    } else {
        (fit_circle_in_plane(&near_rim, &plane)?, near_rim)
    };
    let rel = (circle.radius - cfg.known_radius).abs() / cfg.known_radius;
    if rel > cfg.radius_tolerance {
        return Err(EstimateError::RadiusMismatch {
            fitted: circle.radius.as_f64(),
            known: cfg.known_radius.as_f64(),
        });
    }
    let (a, b) = match cfg.endpoints {
        EndpointMethod::Arc => {
            let covered = arc_window_points(&projected, &circle, cfg.arc_window_deg.to_radians())?;
            farthest_pair_along_arc(&covered, &circle)?
        }
        EndpointMethod::Semicircle => arc_window_endpoints(&projected, &circle, T::PI())?,
        EndpointMethod::Chord => farthest_pair(&projected)?,
        EndpointMethod::ChordSnapped => {
            let (a, b) = farthest_pair(&projected)?;
            (
                circle.closest_rim_point(a).unwrap_or(a),
                circle.closest_rim_point(b).unwrap_or(b),
            )
        }
    };

    let lateral = |p: Point3<T>| match camera {
        Some(cam) => cam.to_camera(p).x,
        None => p.x,
    };
    // farthest_pair returns (a, b) lexicographically ordered, which settles ties.
    let (left, right) = if lateral(b) < lateral(a) { (b, a) } else { (a, b) };

    let mut normal = circle.normal;
    let centroid = Vec3::centroid(&projected).unwrap_or(circle.center);
    let toward_body = centroid - (left + right) * T::lit(0.5);
    let side = normal.cross(right - left).dot(toward_body);
    if side < T::zero() {
        normal = normal.flipped();
    } else if side == T::zero() {
        if let Some(cam) = camera {
            normal = normal.oriented_towards(*cam.view_direction());
        }
    }

    Ok(NeedleMeasurement {
        center: circle.center,
        endpoint_left: left,
        endpoint_right: right,
        normal,
        radius: circle.radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn semicircle(r: f64, n: usize) -> Vec<Point3<f64>> {
        (0..n)
            .map(|i| {
                let a = PI * i as f64 / (n - 1) as f64;
                Vec3::new(r * a.cos(), r * a.sin(), 3.0)
            })
            .collect()
    }

    #[test]
    fn vector_roundtrip() {
        let m = NeedleMeasurement {
            center: Vec3::new(1.0, 2.0, 3.0),
            endpoint_left: Vec3::new(-4.0, 2.0, 3.0),
            endpoint_right: Vec3::new(6.0, 2.0, 3.0),
            normal: UnitVec3::z_axis(),
            radius: 5.0,
        };
        assert_eq!(NeedleMeasurement::from_vector(&m.to_vector()).unwrap(), m);
    }

    #[test]
    fn clean_semicircle_measurement() {
        let cfg = MeasureConfig {
            known_radius: 10.0,
            ..Default::default()
        };
        let m = measure_needle(&semicircle(10.0, 200), &cfg, None).unwrap();
        assert!((m.endpoint_left - Vec3::new(-10.0, 0.0, 3.0)).norm() < 1e-9);
        assert!((m.endpoint_right - Vec3::new(10.0, 0.0, 3.0)).norm() < 1e-9);
        assert!((m.radius - 10.0).abs() < 1e-9);
        // Body sits at +y, so n × (r − l) must point there.
        assert!((m.normal.z - 1.0).abs() < 1e-12);
        assert!(m.is_consistent(0.1, 0.5));
    }

    #[test]
    fn radius_mismatch_is_rejected() {
        let cfg = MeasureConfig {
            known_radius: 5.0,
            ..Default::default()
        };
        assert!(matches!(
            measure_needle(&semicircle(10.0, 200), &cfg, None),
            Err(EstimateError::RadiusMismatch { .. })
        ));
    }

    #[test]
    fn tiny_cloud_is_rejected() {
        let cfg = MeasureConfig::default();
        assert!(matches!(
            measure_needle(&semicircle(10.0, 9), &cfg, None),
            Err(EstimateError::InsufficientPoints { .. })
        ));
    }
}
