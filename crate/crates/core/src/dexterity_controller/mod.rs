//! Bimanual controller geometry: cinch distances, insertion and sweep
//! waypoints, needle grasps and the two needle re-orientation steps.
//!
//! Waypoint timing is ordinal only. Cross-arm ordering is carried by the
//! `after` field of a waypoint.

mod alignment;
mod grasp;
mod trajectory;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom3d::{Mat3, Point3};
use crate::scalar::Real;

pub use alignment::{apply_alignment, handover_alignment, pre_insertion_alignment, PRE_INSERTION_ANGLE_DEG};
pub use grasp::{extraction_grasp, handover_grasp, NeedleGrasp, GRASP_ARC_OFFSET};
pub use trajectory::{
    insertion_trajectory, thread_sweep_trajectory, InsertionConfig, InsertionTrajectory, SweepConfig, SweepTrajectory,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("suture index {i} outside 1..={n}")]
    IndexOutOfRange { i: usize, n: usize },
    #[error("thread length must be positive")]
    InvalidLength,
    #[error("wound width must be positive")]
    ZeroWidth,
    #[error("needle tip is {distance:.3} mm from the insertion point (tolerance {tolerance:.3} mm)")]
    MisalignedStart { distance: f64, tolerance: f64 },
    #[error("needle arc is too short for a {offset} mm grasp offset")]
    ArcTooShort { offset: f64 },
    #[error("degenerate estimate: {0}")]
    DegenerateEstimate(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Cinch translation for suture `i` of `n` (1-based): `D_i = n·d − (i − 1)·d`.
pub fn cinch_translation<T: Real>(n: usize, i: usize, d: T) -> Result<T, ControlError> {
    if i < 1 || i > n {
        return Err(ControlError::IndexOutOfRange { i, n });
    }
    if !(d > T::zero()) || !d.is_finite() {
        return Err(ControlError::InvalidLength);
    }
    let nt = T::from_usize(n).ok_or(ControlError::InvalidLength)?;
    let done = T::from_usize(i - 1).ok_or(ControlError::InvalidLength)?;
    Ok(nt * d - done * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Pose<T> {
    pub position: Point3<T>,
    pub orientation: Mat3<T>,
}

impl<T: Real> Pose<T> {
    pub fn new(position: Point3<T>, orientation: Mat3<T>) -> Self {
        Self { position, orientation }
    }

    pub fn is_valid(&self, tol: T) -> bool {
        self.position.is_finite() && self.orientation.is_rotation(tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gripper {
    G1,
    G2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grip {
    Open,
    Closed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waypoint<T> {
    pub id: usize,
    pub gripper: Gripper,
    pub pose: Pose<T>,
    pub grip: Grip,
    pub label: &'static str,
    /// Id of a waypoint (usually on the other arm) that must finish first.
    pub after: Option<usize>,
}

/// Flat JSON form of a [`Waypoint`]; `rotation` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointRecord {
    pub id: usize,
    pub gripper: Gripper,
    pub position: [f64; 3],
    pub rotation: [f64; 9],
    pub grip: Grip,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub after: Option<usize>,
}

impl<T: Real> Waypoint<T> {
    pub fn to_record(&self) -> WaypointRecord {
        let r = self.pose.orientation.rows;
        WaypointRecord {
            id: self.id,
            gripper: self.gripper,
            position: self.pose.position.cast::<f64>().to_array(),
            rotation: std::array::from_fn(|k| r[k / 3][k % 3].as_f64()),
            grip: self.grip,
            label: self.label.to_string(),
            after: self.after,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cinch_examples() {
        let d: Vec<f64> = (1..=6).map(|i| cinch_translation(6, i, 10.0).unwrap()).collect();
        assert_eq!(d, vec![60.0, 50.0, 40.0, 30.0, 20.0, 10.0]);
        assert_eq!(cinch_translation(6, 6, 7.5).unwrap(), 7.5);
        assert_eq!(
            cinch_translation(6, 7, 10.0),
            Err(ControlError::IndexOutOfRange { i: 7, n: 6 })
        );
        assert_eq!(
            cinch_translation(6, 0, 10.0),
            Err(ControlError::IndexOutOfRange { i: 0, n: 6 })
        );
        assert_eq!(cinch_translation(6, 1, 0.0), Err(ControlError::InvalidLength));
    }
}
