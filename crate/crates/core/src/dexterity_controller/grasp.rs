use serde::{Deserialize, Serialize};

use super::ControlError;
use crate::geom3d::{Point3, UnitVec3};
use crate::needle_estimator::{NeedleMeasurement, Side};
use crate::scalar::Real;

/// Arc length between a grasp and the needle end it is measured from (mm).
pub const GRASP_ARC_OFFSET: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NeedleGrasp<T> {
    pub grasp_point: Point3<T>,
    /// Jaw approach direction, along the needle normal.
    pub approach_dir: UnitVec3<T>,
    /// Arc length from the reference endpoint (mm).
    pub arc_offset: T,
}

/// Point `offset` mm along the arc from `side`'s endpoint, into the body.
fn grasp_from<T: Real>(estimate: &NeedleMeasurement<T>, side: Side, offset: T) -> Result<NeedleGrasp<T>, ControlError> {
    if !(estimate.radius > T::zero()) {
        return Err(ControlError::DegenerateEstimate("non-positive radius"));
    }
    if T::PI() * estimate.radius <= offset {
        return Err(ControlError::ArcTooShort {
            offset: offset.as_f64(),
        });
    }
    let circle = estimate.circle();
    let start = circle
        .closest_rim_point(estimate.endpoint(side))
        .ok_or(ControlError::DegenerateEstimate("endpoint at the center"))?;
    let body = estimate
        .body_direction()
        .ok_or(ControlError::DegenerateEstimate("endpoints coincide"))?;
    let fwd = circle.walk_along(start, offset);
    let back = circle.walk_along(start, -offset);
    let grasp_point = match (fwd, back) {
        (Some(f), Some(b)) => {
            if body.dot(b - start) > body.dot(f - start) {
                b
            } else {
                f
            }
        }
        _ => return Err(ControlError::DegenerateEstimate("endpoint at the center")),
    };
    Ok(NeedleGrasp {
        grasp_point,
        approach_dir: estimate.normal,
        arc_offset: offset,
    })
}

/// Grasp 2 mm along the arc from the tip.
pub fn extraction_grasp<T: Real>(
    estimate: &NeedleMeasurement<T>,
    tip_side: Side,
) -> Result<NeedleGrasp<T>, ControlError> {
    grasp_from(estimate, tip_side, T::lit(GRASP_ARC_OFFSET))
}

/// Grasp 2 mm along the arc from the end the thread is attached to.
pub fn handover_grasp<T: Real>(
    estimate: &NeedleMeasurement<T>,
    thread_side: Side,
) -> Result<NeedleGrasp<T>, ControlError> {
    grasp_from(estimate, thread_side, T::lit(GRASP_ARC_OFFSET))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom3d::Vec3;

    fn needle(r: f64) -> NeedleMeasurement<f64> {
        NeedleMeasurement {
            center: Vec3::zeros(),
            endpoint_left: Vec3::new(-r, 0.0, 0.0),
            endpoint_right: Vec3::new(r, 0.0, 0.0),
            normal: UnitVec3::z_axis(),
            radius: r,
        }
    }

    #[test]
    fn extraction_grasp_geometry() {
        let r = 12.7;
        let g = extraction_grasp(&needle(r), Side::Right).unwrap();
        let a = 2.0 / r;
        assert!((g.grasp_point - Vec3::new(r * a.cos(), r * a.sin(), 0.0)).norm() < 1e-12);
        let chord = g.grasp_point.distance(Vec3::new(r, 0.0, 0.0));
        assert!((chord - 2.0 * r * (1.0 / r).sin()).abs() < 1e-12);
        assert_eq!(g.arc_offset, 2.0);
    }

    #[test]
    fn handover_grasp_from_left_stays_on_body() {
        let g = handover_grasp(&needle(12.7), Side::Left).unwrap();
        assert!(g.grasp_point.y > 0.0 && g.grasp_point.x < 0.0);
        assert!((g.grasp_point.norm() - 12.7).abs() < 1e-9);
    }

    #[test]
    fn short_arc_rejected() {
        assert!(matches!(
            extraction_grasp(&needle(0.5), Side::Left),
            Err(ControlError::ArcTooShort { .. })
        ));
        assert!(matches!(
            handover_grasp(&needle(0.5), Side::Right),
            Err(ControlError::ArcTooShort { .. })
        ));
    }
}
