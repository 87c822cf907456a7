//! Perception, planning and motion core for autonomous running sutures with a
//! two-arm robot: circular needle pose estimation from depth, wound modeling
//! and suture placement, needle alignment and handover geometry, a synthetic
//! scene generator and a Monte Carlo trial harness.
//!
//! Units are millimeters and radians unless a name says otherwise. Geometry
//! and estimation are generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix the scalar for common use. Scene synthesis and the
//! harness work in `f64`.

// `!(x > 0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod dexterity_controller;
pub mod geom3d;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod mask2d;
pub mod needle_estimator;
pub mod scalar;
pub mod suture_planner;
pub mod synth_scene;

pub use scalar::Real;

pub type Vec3d = geom3d::Vec3<f64>;
pub type Vec3f = geom3d::Vec3<f32>;
pub type Mat3d = geom3d::Mat3<f64>;
pub type Mat3f = geom3d::Mat3<f32>;
pub type Circle3d = geom3d::Circle3<f64>;
pub type Circle3f = geom3d::Circle3<f32>;
pub type Camera = needle_estimator::CameraModel<f64>;
pub type Camera32 = needle_estimator::CameraModel<f32>;
pub type Measurement = needle_estimator::NeedleMeasurement<f64>;
pub type Measurement32 = needle_estimator::NeedleMeasurement<f32>;
pub type Wound = suture_planner::WoundModel<f64>;
pub type Wound32 = suture_planner::WoundModel<f32>;
pub type Plan = suture_planner::SuturePlan<f64>;
pub type Plan32 = suture_planner::SuturePlan<f32>;
pub type RobotPose = dexterity_controller::Pose<f64>;
pub type RobotPose32 = dexterity_controller::Pose<f32>;
