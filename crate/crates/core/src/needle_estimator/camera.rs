use serde::{Deserialize, Serialize};

use super::EstimateError;
use crate::geom3d::{Mat3, Point3, Ray3, UnitVec3, Vec3};
use crate::scalar::Real;

/// Pinhole camera. The camera frame has x right, y down and z along the
/// optical axis. `rotation`/`translation` map camera coordinates to world
/// coordinates (`p_world = R p_cam + t`); pixel centers sit at integer
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CameraModel<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub width: usize,
    pub height: usize,
    /// Camera-to-world rotation, serialized as rows.
    pub rotation: Mat3<T>,
    /// Camera center in world coordinates (mm).
    pub translation: Vec3<T>,
}

impl<T: Real> CameraModel<T> {
    pub fn validate(&self) -> Result<(), EstimateError> {
        if !(self.fx > T::zero() && self.fy > T::zero()) {
            return Err(EstimateError::InvalidCamera("focal lengths must be positive"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(EstimateError::InvalidCamera("resolution must be non-zero"));
        }
        let tol = T::unit_tolerance().max(T::lit(1e-9));
        if !self.rotation.is_rotation(tol) {
            return Err(EstimateError::InvalidCamera("rotation is not proper orthonormal"));
        }
        Ok(())
    }

    pub fn to_camera(&self, p: Point3<T>) -> Point3<T> {
        self.rotation.transpose().mul_vec(p - self.translation)
    }

    pub fn to_world(&self, p: Point3<T>) -> Point3<T> {
        self.rotation.mul_vec(p) + self.translation
    }

    /// Optical axis in world coordinates.
    pub fn view_direction(&self) -> UnitVec3<T> {
        UnitVec3::new_unchecked(self.rotation.column(2))
    }

    /// Pixel coordinates `(u, v)` and camera depth, or `None` behind the camera.
    pub fn project(&self, p: Point3<T>) -> Option<(T, T, T)> {
        let c = self.to_camera(p);
        if !(c.z > T::zero()) {
            return None;
        }
        Some((self.fx * c.x / c.z + self.cx, self.fy * c.y / c.z + self.cy, c.z))
    }

    pub fn in_image(&self, u: T, v: T) -> bool {
        let half = T::lit(0.5);
        let w = T::from_usize(self.width).unwrap_or_else(T::zero);
        let h = T::from_usize(self.height).unwrap_or_else(T::zero);
        u >= -half && v >= -half && u < w - half && v < h - half
    }

    /// World ray through pixel `(u, v)`.
    pub fn deproject(&self, u: T, v: T) -> Ray3<T> {
        let d = Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, T::one());
        let dir = self
            .rotation
            .mul_vec(d)
            .normalized()
            .unwrap_or_else(|| self.view_direction());
        Ray3::new(self.translation, dir)
    }

    /// World point at camera-frame depth `depth` along pixel `(u, v)`.
    pub fn deproject_depth(&self, u: T, v: T, depth: T) -> Point3<T> {
        let c = Vec3::new((u - self.cx) / self.fx * depth, (v - self.cy) / self.fy * depth, depth);
        self.to_world(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam() -> CameraModel<f64> {
        CameraModel {
            fx: 800.0,
            fy: 820.0,
            cx: 320.0,
            cy: 240.0,
            width: 640,
            height: 480,
            rotation: Mat3::from_axis_angle(Vec3::new(0.2, 1.0, 0.1).normalized().unwrap(), 0.3),
            translation: Vec3::new(5.0, -3.0, 10.0),
        }
    }

    #[test]
    fn project_deproject_roundtrip() {
        let c = cam();
        let p = c.to_world(Vec3::new(12.0, -7.0, 150.0));
        let (u, v, z) = c.project(p).unwrap();
        assert!((z - 150.0).abs() < 1e-9);
        assert!((c.deproject_depth(u, v, z) - p).norm() < 1e-9);
        let ray = c.deproject(u, v);
        let t = (p - ray.origin).norm();
        assert!((ray.point_at(t) - p).norm() < 1e-9);
    }

    #[test]
    fn points_behind_do_not_project() {
        let c = cam();
        assert!(c.project(c.to_world(Vec3::new(0.0, 0.0, -5.0))).is_none());
    }

    #[test]
    fn validation_rejects_reflections() {
        let mut c = cam();
        c.rotation = Mat3::from_rows([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]]);
        assert!(c.validate().is_err());
        assert!(cam().validate().is_ok());
    }
}
