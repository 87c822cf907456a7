use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Deref, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::Real;

/// A 3-vector. Positions are in millimeters; directions are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

/// Points and free vectors share a representation.
pub type Point3<T> = Vec3<T>;

impl<T: Real> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zeros() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }

    pub fn distance_squared(self, o: Self) -> T {
        (self - o).norm_squared()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn lerp(self, o: Self, t: T) -> Self {
        self + (o - self) * t
    }

    /// Unit vector in this direction, or `None` for (near) zero vectors.
    pub fn normalized(self) -> Option<UnitVec3<T>> {
        UnitVec3::new_normalize(self)
    }

    /// Component with the largest magnitude; the first wins ties.
    pub fn dominant_axis(self) -> usize {
        let a = self.to_array().map(|c| c.abs());
        let mut best = 0;
        for i in 1..3 {
            if a[i] > a[best] {
                best = i;
            }
        }
        best
    }

    /// Lexicographic comparison on (x, y, z).
    pub fn lex_cmp(&self, o: &Self) -> Ordering {
        self.x
            .partial_cmp(&o.x)
            .unwrap_or(Ordering::Equal)
            .then(self.y.partial_cmp(&o.y).unwrap_or(Ordering::Equal))
            .then(self.z.partial_cmp(&o.z).unwrap_or(Ordering::Equal))
    }

    pub fn centroid(points: &[Self]) -> Option<Self> {
        if points.is_empty() {
            return None;
        }
        let sum = points.iter().fold(Self::zeros(), |acc, p| acc + *p);
        Some(sum / T::from_usize(points.len())?)
    }

    pub fn cast<U: Real>(self) -> Vec3<U> {
        Vec3::new(
            U::lit(self.x.as_f64()),
            U::lit(self.y.as_f64()),
            U::lit(self.z.as_f64()),
        )
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> SubAssign for Vec3<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Div<T> for Vec3<T> {
    type Output = Self;
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

impl<T: Real> Serialize for Vec3<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.x.as_f64(), self.y.as_f64(), self.z.as_f64()].serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Vec3<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let a = <[f64; 3]>::deserialize(d)?;
        Ok(Self::new(T::lit(a[0]), T::lit(a[1]), T::lit(a[2])))
    }
}

/// A direction with unit Euclidean norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3<T>(Vec3<T>);

impl<T: Real> UnitVec3<T> {
    pub fn new_normalize(v: Vec3<T>) -> Option<Self> {
        let n = v.norm();
        if !(n > T::min_positive_value().sqrt()) || !n.is_finite() {
            return None;
        }
        // Leave vectors that are already unit untouched so repeated
        // normalization is a bit-exact fixed point.
        if (n - T::one()).abs() <= T::epsilon() * T::lit(4.0) {
            return Some(Self(v));
        }
        Some(Self(v / n))
    }

    /// Wraps a vector the caller guarantees is unit length.
    pub fn new_unchecked(v: Vec3<T>) -> Self {
        Self(v)
    }

    pub fn x_axis() -> Self {
        Self(Vec3::new(T::one(), T::zero(), T::zero()))
    }

    pub fn y_axis() -> Self {
        Self(Vec3::new(T::zero(), T::one(), T::zero()))
    }

    pub fn z_axis() -> Self {
        Self(Vec3::new(T::zero(), T::zero(), T::one()))
    }

    pub fn into_inner(self) -> Vec3<T> {
        self.0
    }

    pub fn flipped(self) -> Self {
        Self(-self.0)
    }

    /// Sign chosen so the largest-magnitude component is positive.
    pub fn canonical(self) -> Self {
        let axis = self.0.dominant_axis();
        if self.0.to_array()[axis] < T::zero() {
            self.flipped()
        } else {
            self
        }
    }

    /// Sign chosen so that `self · reference >= 0`.
    pub fn oriented_towards(self, reference: Vec3<T>) -> Self {
        if self.0.dot(reference) < T::zero() {
            self.flipped()
        } else {
            self
        }
    }

    /// Angle to another direction in radians, in `[0, pi]`.
    pub fn angle_to(self, other: Self) -> T {
        // atan2 form stays accurate near 0 and pi.
        let c = self.0.cross(other.0).norm();
        let d = self.0.dot(other.0);
        c.atan2(d)
    }

    /// Any unit vector perpendicular to this one, picked deterministically.
    pub fn any_perpendicular(self) -> Self {
        let v = self.0;
        let helper = match v.to_array().map(|c| c.abs()) {
            [ax, ay, az] if ax <= ay && ax <= az => Vec3::new(T::one(), T::zero(), T::zero()),
            [_, ay, az] if ay <= az => Vec3::new(T::zero(), T::one(), T::zero()),
            _ => Vec3::new(T::zero(), T::zero(), T::one()),
        };
        let p = helper - v * helper.dot(v);
        Self(p / p.norm())
    }
}

impl<T> Deref for UnitVec3<T> {
    type Target = Vec3<T>;
    fn deref(&self) -> &Vec3<T> {
        &self.0
    }
}

impl<T: Real> Neg for UnitVec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.flipped()
    }
}

impl<T: Real> Serialize for UnitVec3<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for UnitVec3<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec3::<T>::deserialize(d)?;
        UnitVec3::new_normalize(v).ok_or_else(|| serde::de::Error::custom("zero-length direction"))
    }
}

/// Row-major 3x3 matrix, used for rotations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<T> {
    pub rows: [[T; 3]; 3],
}

impl<T: Real> Mat3<T> {
    pub fn from_rows(rows: [[T; 3]; 3]) -> Self {
        Self { rows }
    }

    pub fn from_columns(c0: Vec3<T>, c1: Vec3<T>, c2: Vec3<T>) -> Self {
        Self::from_rows([[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]])
    }

    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self::from_rows([[o, z, z], [z, o, z], [z, z, o]])
    }

    pub fn column(&self, c: usize) -> Vec3<T> {
        Vec3::new(self.rows[0][c], self.rows[1][c], self.rows[2][c])
    }

    pub fn transpose(&self) -> Self {
        Self::from_rows(std::array::from_fn(|i| std::array::from_fn(|j| self.rows[j][i])))
    }

    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        let r = &self.rows;
        Vec3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }

    pub fn rotate_unit(&self, v: UnitVec3<T>) -> UnitVec3<T> {
        UnitVec3::new_normalize(self.mul_vec(*v)).unwrap_or(v)
    }

    pub fn determinant(&self) -> T {
        let r = &self.rows;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    /// Rotation by `angle` radians about `axis` (right-hand rule).
    pub fn from_axis_angle(axis: UnitVec3<T>, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let t = T::one() - c;
        let Vec3 { x, y, z } = *axis;
        Self::from_rows([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    /// Minimal-angle rotation taking direction `from` onto direction `to`.
    pub fn rotation_between(from: UnitVec3<T>, to: UnitVec3<T>) -> Self {
        let angle = from.angle_to(to);
        if angle <= T::epsilon() {
            return Self::identity();
        }
        let axis = match from.cross(*to).normalized() {
            Some(a) => a,
            // Antiparallel: any perpendicular axis gives a minimal (pi) rotation.
            None => from.any_perpendicular(),
        };
        Self::from_axis_angle(axis, angle)
    }

    /// Rotation angle in radians, in `[0, pi]`.
    pub fn angle(&self) -> T {
        let tr = self.rows[0][0] + self.rows[1][1] + self.rows[2][2];
        let c = ((tr - T::one()) * T::lit(0.5)).max(-T::one()).min(T::one());
        c.acos()
    }

    /// Largest entry-wise deviation of `R^T R` from the identity.
    pub fn orthonormality_error(&self) -> T {
        let p = *self * self.transpose();
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { T::one() } else { T::zero() };
                worst = worst.max((p.rows[i][j] - e).abs());
            }
        }
        worst
    }

    pub fn is_rotation(&self, tol: T) -> bool {
        self.orthonormality_error() <= tol && (self.determinant() - T::one()).abs() <= tol
    }

    pub fn max_abs_diff(&self, o: &Self) -> T {
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.rows[i][j] - o.rows[i][j]).abs());
            }
        }
        worst
    }
}

impl<T: Real> Mul for Mat3<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::from_rows(std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..3).map(|k| self.rows[i][k] * o.rows[k][j]).sum())
        }))
    }
}

impl<T: Real> Mul<Vec3<T>> for Mat3<T> {
    type Output = Vec3<T>;
    fn mul(self, v: Vec3<T>) -> Vec3<T> {
        self.mul_vec(v)
    }
}

impl<T: Real> Serialize for Mat3<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rows.map(|r| r.map(|v| v.as_f64())).serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Mat3<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = <[[f64; 3]; 3]>::deserialize(d)?;
        Ok(Self::from_rows(rows.map(|r| r.map(T::lit))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn axis_angle_quarter_turn() {
        let r = Mat3::from_axis_angle(UnitVec3::z_axis(), FRAC_PI_2);
        let v = r * Vec3::new(1.0, 0.0, 0.0);
        assert!((v - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        assert!(r.is_rotation(1e-12));
        assert!((r.angle() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn rotation_between_handles_antiparallel() {
        let a = UnitVec3::<f64>::x_axis();
        let r = Mat3::rotation_between(a, a.flipped());
        assert!((r.mul_vec(*a) + *a).norm() < 1e-12);
        assert!(r.is_rotation(1e-12));
        assert_eq!(Mat3::rotation_between(a, a), Mat3::identity());
    }

    #[test]
    fn canonical_sign_follows_dominant_component() {
        let v = Vec3::new(0.1, -0.9, 0.2).normalized().unwrap().canonical();
        assert!(v.y > 0.0);
    }

    #[test]
    fn unit_normalization_is_a_fixed_point() {
        let u = Vec3::new(0.3, -0.4, 0.5).normalized().unwrap();
        assert_eq!(u.into_inner().normalized().unwrap(), u);
    }
}
