use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SceneError;
use crate::dexterity_controller::Pose;
use crate::geom3d::{Mat3, Point3, UnitVec3, Vec3};
use crate::needle_estimator::{CameraModel, NeedleMeasurement, Side};

/// Half-circle with a 40 mm arc.
pub const DEFAULT_NEEDLE_RADIUS: f64 = 40.0 / std::f64::consts::PI;

/// A semicircular needle. In the needle frame the center is the origin, the
/// ends sit at `(±r, 0, 0)`, the arc runs through `+y` and the normal is `+z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeedleGroundTruth {
    /// Needle frame to world.
    pub pose: Pose<f64>,
    pub radius: f64,
    /// Thread end, named in the needle frame (`Left` is the `−x` end).
    pub thread_side: Side,
}

impl NeedleGroundTruth {
    pub fn new(pose: Pose<f64>, radius: f64, thread_side: Side) -> Self {
        Self {
            pose,
            radius,
            thread_side,
        }
    }

    /// World point at arc angle `theta` (0 is the `+x` end, π the `−x` end).
    pub fn arc_point(&self, theta: f64) -> Point3<f64> {
        let local = Vec3::new(self.radius * theta.cos(), self.radius * theta.sin(), 0.0);
        self.to_world(local)
    }

    pub fn to_world(&self, local: Vec3<f64>) -> Point3<f64> {
        self.pose.orientation.mul_vec(local) + self.pose.position
    }

    pub fn normal(&self) -> UnitVec3<f64> {
        UnitVec3::new_unchecked(self.pose.orientation.column(2))
    }

    /// Whether the measurement convention (left = smaller camera x) swaps the
    /// needle-frame ends.
    pub fn labels_swapped(&self, camera: Option<&CameraModel<f64>>) -> bool {
        let (a, b) = (self.arc_point(std::f64::consts::PI), self.arc_point(0.0));
        let lateral = |p: Point3<f64>| camera.map_or(p.x, |c| c.to_camera(p).x);
        lateral(b) < lateral(a)
    }

    /// The thread end under the measurement labeling.
    pub fn thread_side_in(&self, camera: Option<&CameraModel<f64>>) -> Side {
        if self.labels_swapped(camera) {
            self.thread_side.opposite()
        } else {
            self.thread_side
        }
    }

    /// The tip (non-thread end) under the measurement labeling.
    pub fn tip_side_in(&self, camera: Option<&CameraModel<f64>>) -> Side {
        self.thread_side_in(camera).opposite()
    }
}

/// Exact 13-state vector of the needle, with ends labeled the way a
/// measurement through `camera` would label them (needle frame without one).
/// The normal keeps `n × (right − left)` pointing into the arc.
pub fn oracle_needle_state(
    gt: &NeedleGroundTruth,
    camera: Option<&CameraModel<f64>>,
) -> Result<NeedleMeasurement<f64>, SceneError> {
    if !(gt.radius > 0.0) || !gt.radius.is_finite() {
        return Err(SceneError::InvalidRadius);
    }
    let left = gt.arc_point(std::f64::consts::PI);
    let right = gt.arc_point(0.0);
    let mut m = NeedleMeasurement {
        center: gt.pose.position,
        endpoint_left: left,
        endpoint_right: right,
        normal: gt.normal(),
        radius: gt.radius,
    };
    if camera.is_some() && gt.labels_swapped(camera) {
        std::mem::swap(&mut m.endpoint_left, &mut m.endpoint_right);
        m.normal = m.normal.flipped();
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// Per-axis Gaussian jitter (mm).
    pub sigma: f64,
    /// Probability that a point is lost to a highlight.
    pub specular_dropout: f64,
    /// Jitter multiplier near the needle ends.
    pub boundary_factor: f64,
    /// Fraction of the arc, at each end, that counts as "near the end".
    pub boundary_band: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma: 0.3,
            specular_dropout: 0.15,
            boundary_factor: 3.0,
            boundary_band: 0.1,
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            sigma: 0.0,
            specular_dropout: 0.0,
            boundary_factor: 1.0,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(SceneError::InvalidNoise("sigma must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.specular_dropout) {
            return Err(SceneError::InvalidNoise("dropout must lie in [0, 1)"));
        }
        if !(self.boundary_factor >= 1.0) {
            return Err(SceneError::InvalidNoise("boundary factor must be >= 1"));
        }
        if !(0.0..=0.5).contains(&self.boundary_band) {
            return Err(SceneError::InvalidNoise("boundary band must lie in [0, 0.5]"));
        }
        Ok(())
    }
}

/// Points uniform in arc length along the needle, jittered per axis and
/// thinned by dropout.
pub fn sample_needle_cloud(
    gt: &NeedleGroundTruth,
    noise: &NoiseModel,
    count: usize,
) -> Result<Vec<Point3<f64>>, SceneError> {
    noise.validate()?;
    if !(gt.radius > 0.0) {
        return Err(SceneError::InvalidRadius);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let pi = std::f64::consts::PI;
    let band = noise.boundary_band * pi;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let theta = rng.random_range(0.0..=pi);
        let scale = if theta < band || theta > pi - band {
            noise.sigma * noise.boundary_factor
        } else {
            noise.sigma
        };
        let jitter = Vec3::new(unit.sample(&mut rng), unit.sample(&mut rng), unit.sample(&mut rng));
        let dropped = rng.random_bool(noise.specular_dropout);
        if !dropped {
            let p = gt.arc_point(theta);
            out.push(if scale > 0.0 { p + jitter * scale } else { p });
        }
    }
    Ok(out)
}

/// Ranges for random needle placements in front of a camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoseSampler {
    /// Center range in camera coordinates (mm): lateral half-widths and depth.
    pub half_x: f64,
    pub half_y: f64,
    pub depth: [f64; 2],
    /// Largest tilt of the needle plane away from facing the camera (deg).
    pub max_tilt_deg: f64,
    /// Largest in-plane roll away from "arc up" (deg).
    pub max_roll_deg: f64,
    pub radius: f64,
}

impl Default for PoseSampler {
    fn default() -> Self {
        Self {
            half_x: 15.0,
            half_y: 10.0,
            depth: [130.0, 170.0],
            max_tilt_deg: 30.0,
            max_roll_deg: 30.0,
            radius: DEFAULT_NEEDLE_RADIUS,
        }
    }
}

/// Random needle in view of `camera`: arc bulging toward image-up, plane
/// roughly facing the camera, thread on a random end.
pub fn random_needle_pose<R: Rng>(rng: &mut R, camera: &CameraModel<f64>, sampler: &PoseSampler) -> NeedleGroundTruth {
    let center_cam = Vec3::new(
        rng.random_range(-sampler.half_x..=sampler.half_x),
        rng.random_range(-sampler.half_y..=sampler.half_y),
        rng.random_range(sampler.depth[0]..=sampler.depth[1]),
    );
    // Needle frame in camera coordinates: x right, arc (+y) toward image up
    // (camera −y), normal toward the camera (−z).
    let base = Mat3::from_columns(
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, -1.0, 0.0),
        Vec3::new(0.0, 0.0, -1.0),
    );
    let roll = rng
        .random_range(-sampler.max_roll_deg..=sampler.max_roll_deg)
        .to_radians();
    let tilt = rng.random_range(0.0..=sampler.max_tilt_deg).to_radians();
    let tilt_axis_angle = rng.random_range(0.0..std::f64::consts::TAU);
    let tilt_axis = UnitVec3::new_unchecked(Vec3::new(tilt_axis_angle.cos(), tilt_axis_angle.sin(), 0.0));
    let in_camera = Mat3::from_axis_angle(tilt_axis, tilt) * base * Mat3::from_axis_angle(UnitVec3::z_axis(), roll);
    let thread_side = if rng.random_bool(0.5) { Side::Left } else { Side::Right };
    NeedleGroundTruth {
        pose: Pose::new(camera.to_world(center_cam), camera.rotation * in_camera),
        radius: sampler.radius,
        thread_side,
    }
}
