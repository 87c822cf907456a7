//! Needle pose estimation: single-shot circle measurements from a segmented
//! cloud, a per-interaction filter over them, and tip refinement in the
//! depth image.

mod camera;
mod ekf;
mod measurement;
mod tip;

use thiserror::Error;

use crate::geom3d::GeomError;
use crate::mask2d::Mask2dError;

pub use camera::CameraModel;
pub use ekf::{
    ekf_initialize, ekf_update, estimate_needle, passes_gate, EkfConfig, EkfEstimate, EkfState, GateMode,
    MeasurementNoise, StateMatrix, StateVector,
};
pub use measurement::{
    measure_needle, EndpointMethod, MeasureConfig, NeedleMeasurement, Side, MIN_CLOUD_POINTS, STATE_DIM,
};
pub use tip::{refine_tip, TipRefineConfig, TipRefinement};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Mask(#[from] Mask2dError),
    #[error("fitted radius {fitted:.3} mm is inconsistent with the known {known:.3} mm")]
    RadiusMismatch { fitted: f64, known: f64 },
    #[error("cloud has {got} points, {needed} needed")]
    InsufficientPoints { got: usize, needed: usize },
    #[error("{got} measurements available, {needed} needed")]
    InsufficientMeasurements { got: usize, needed: usize },
    #[error("only {accepted} updates accepted after {consumed} measurements")]
    EstimateTimeout { consumed: usize, accepted: usize },
    #[error("needle tip is not visible")]
    NotVisible,
    #[error("invalid camera: {0}")]
    InvalidCamera(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("degenerate estimate: {0}")]
    DegenerateEstimate(&'static str),
}
