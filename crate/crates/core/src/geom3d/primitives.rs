use serde::{Deserialize, Serialize};

use super::vector::{Point3, UnitVec3, Vec3};
use crate::scalar::Real;

/// The plane `{ p : normal · p = offset }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Plane<T> {
    pub normal: UnitVec3<T>,
    pub offset: T,
}

impl<T: Real> Plane<T> {
    pub fn new(normal: UnitVec3<T>, offset: T) -> Self {
        Self { normal, offset }
    }

    pub fn from_point_normal(point: Point3<T>, normal: UnitVec3<T>) -> Self {
        Self::new(normal, normal.dot(point))
    }

    pub fn signed_distance(&self, p: Point3<T>) -> T {
        self.normal.dot(p) - self.offset
    }

    pub fn distance(&self, p: Point3<T>) -> T {
        self.signed_distance(p).abs()
    }

    /// Orthogonal projection onto the plane.
    pub fn project(&self, p: Point3<T>) -> Point3<T> {
        p - *self.normal * self.signed_distance(p)
    }

    /// The plane point closest to the origin.
    pub fn reference_point(&self) -> Point3<T> {
        *self.normal * self.offset
    }

    /// Same plane described with the opposite normal.
    pub fn flipped(&self) -> Self {
        Self::new(self.normal.flipped(), -self.offset)
    }

    /// Same plane with the normal's largest component positive.
    pub fn canonical(&self) -> Self {
        if self.normal.canonical() == self.normal {
            *self
        } else {
            self.flipped()
        }
    }

    /// Same plane with `normal · direction >= 0`.
    pub fn oriented_towards(&self, direction: Vec3<T>) -> Self {
        if self.normal.dot(direction) < T::zero() {
            self.flipped()
        } else {
            *self
        }
    }

    /// Orthonormal in-plane basis `(u, v)` with `u × v = normal`.
    pub fn basis(&self) -> (UnitVec3<T>, UnitVec3<T>) {
        plane_basis(self.normal)
    }
}

pub(crate) fn plane_basis<T: Real>(normal: UnitVec3<T>) -> (UnitVec3<T>, UnitVec3<T>) {
    let u = normal.any_perpendicular();
    let v = UnitVec3::new_unchecked(normal.cross(*u));
    (u, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Line3<T> {
    pub origin: Point3<T>,
    pub direction: UnitVec3<T>,
}

impl<T: Real> Line3<T> {
    pub fn new(origin: Point3<T>, direction: UnitVec3<T>) -> Self {
        Self { origin, direction }
    }

    /// Signed coordinate of the projection of `p` along the line.
    pub fn parameter(&self, p: Point3<T>) -> T {
        self.direction.dot(p - self.origin)
    }

    pub fn point_at(&self, s: T) -> Point3<T> {
        self.origin + *self.direction * s
    }

    pub fn project(&self, p: Point3<T>) -> Point3<T> {
        self.point_at(self.parameter(p))
    }

    pub fn distance(&self, p: Point3<T>) -> T {
        (p - self.project(p)).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Circle3<T> {
    pub center: Point3<T>,
    pub normal: UnitVec3<T>,
    pub radius: T,
}

impl<T: Real> Circle3<T> {
    pub fn new(center: Point3<T>, normal: UnitVec3<T>, radius: T) -> Self {
        Self { center, normal, radius }
    }

    pub fn plane(&self) -> Plane<T> {
        Plane::from_point_normal(self.center, self.normal)
    }

    /// Nearest rim point to `p`, or `None` when `p` projects onto the center.
    pub fn closest_rim_point(&self, p: Point3<T>) -> Option<Point3<T>> {
        let d = p - self.center;
        let radial = d - *self.normal * self.normal.dot(d);
        let dir = radial.normalized()?;
        Some(self.center + *dir * self.radius)
    }

    /// Point reached by walking `arc_length` along the rim from `start`
    /// (a rim point), counter-clockwise about the normal for positive values.
    pub fn walk_along(&self, start: Point3<T>, arc_length: T) -> Option<Point3<T>> {
        let u = (start - self.center).normalized()?;
        let v = self.normal.cross(*u);
        let angle = arc_length / self.radius;
        let (s, c) = angle.sin_cos();
        Some(self.center + (*u * c + v * s) * self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Ray3<T> {
    pub origin: Point3<T>,
    pub direction: UnitVec3<T>,
}

impl<T: Real> Ray3<T> {
    pub fn new(origin: Point3<T>, direction: UnitVec3<T>) -> Self {
        Self { origin, direction }
    }

    pub fn point_at(&self, t: T) -> Point3<T> {
        self.origin + *self.direction * t
    }
}
