//! Ground-truth scene generator standing in for the perception stack:
//! needle clouds with structured noise, mask/depth renders, and segmented
//! wound clouds. Everything here is `f64` and driven by explicit seeds.

mod needle;
mod render;
mod wound;

use thiserror::Error;

pub use needle::{
    oracle_needle_state, random_needle_pose, sample_needle_cloud, NeedleGroundTruth, NoiseModel, PoseSampler,
    DEFAULT_NEEDLE_RADIUS,
};
pub use render::{render_views, RenderConfig};
pub use wound::{generate_wound_scene, WoundSceneParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("needle radius must be positive")]
    InvalidRadius,
    #[error("invalid noise model: {0}")]
    InvalidNoise(&'static str),
    #[error("needle is not in front of the camera")]
    NotVisible,
    #[error("invalid scene parameters: {0}")]
    InvalidParams(&'static str),
}
