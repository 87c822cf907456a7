use serde::{Deserialize, Serialize};

use super::{ControlError, Grip, Gripper, Pose, Waypoint};
use crate::geom3d::{Mat3, Point3, UnitVec3, Vec3};
use crate::needle_estimator::{NeedleMeasurement, Side};
use crate::scalar::Real;
use crate::suture_planner::WoundModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct InsertionConfig<T> {
    /// Twist about the centerline after the first push (degrees).
    pub twist_deg: T,
    /// Final push after the twist (mm).
    pub advance: T,
    /// How far the tip may sit from the insertion point at the start (mm).
    pub start_tolerance: T,
}

impl<T: Real> Default for InsertionConfig<T> {
    fn default() -> Self {
        Self {
            twist_deg: T::lit(40.0),
            advance: T::lit(2.0),
            start_tolerance: T::lit(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsertionTrajectory<T: Real> {
    pub waypoints: Vec<Waypoint<T>>,
    /// Needle state at each waypoint.
    pub needle_states: Vec<NeedleMeasurement<T>>,
    pub tip_side: Side,
    /// Unit push direction across the wound.
    pub push_dir: UnitVec3<T>,
    /// Signed twist actually applied (radians, about the centerline direction).
    pub twist: T,
}

/// Needle frame: x along the chord, z along the normal.
fn needle_frame<T: Real>(needle: &NeedleMeasurement<T>) -> Mat3<T> {
    let z = needle.normal;
    let chord = needle.endpoint_right - needle.endpoint_left;
    let x = (chord - *z * z.dot(chord))
        .normalized()
        .unwrap_or_else(|| z.any_perpendicular());
    let y = z.cross(*x);
    Mat3::from_columns(*x, y, *z)
}

/// Push across the wound, twist about the centerline, push a little more,
/// release. Waypoint poses are the held needle's frame at its center.
pub fn insertion_trajectory<T: Real>(
    needle: &NeedleMeasurement<T>,
    insertion_point: Point3<T>,
    model: &WoundModel<T>,
    cfg: &InsertionConfig<T>,
) -> Result<InsertionTrajectory<T>, ControlError> {
    if !(model.width > T::zero()) {
        return Err(ControlError::ZeroWidth);
    }
    if !(cfg.advance >= T::zero() && cfg.start_tolerance >= T::zero()) {
        return Err(ControlError::InvalidConfig(
            "advance and tolerance must be non-negative",
        ));
    }
    let dl = needle.endpoint_left.distance(insertion_point);
    let dr = needle.endpoint_right.distance(insertion_point);
    let (tip_side, dist) = if dr < dl { (Side::Right, dr) } else { (Side::Left, dl) };
    if dist > cfg.start_tolerance {
        return Err(ControlError::MisalignedStart {
            distance: dist.as_f64(),
            tolerance: cfg.start_tolerance.as_f64(),
        });
    }

    let up = *model.surface_normal();
    let centered = model.surface_plane.project(model.centerline.project(insertion_point));
    let push_dir = if model.width_dir.dot(insertion_point - centered) > T::zero() {
        model.width_dir.flipped()
    } else {
        model.width_dir
    };
    let axis = model.centerline.direction;

    let pushed = needle.transformed(&Mat3::identity(), Vec3::zeros(), *push_dir * model.width);
    let twist_abs = cfg.twist_deg.to_radians();
    let lifted = |angle: T| {
        let r = Mat3::from_axis_angle(axis, angle);
        (r, pushed.transformed(&r, centered, Vec3::zeros()))
    };
    let (rp, np) = lifted(twist_abs);
    let (rn, nn) = lifted(-twist_abs);
    let (twist, rotation, twisted) = if up.dot(nn.endpoint(tip_side)) > up.dot(np.endpoint(tip_side)) {
        (-twist_abs, rn, nn)
    } else {
        (twist_abs, rp, np)
    };
    let advanced = twisted.transformed(&Mat3::identity(), Vec3::zeros(), *push_dir * cfg.advance);

    let frame = needle_frame(needle);
    let stages = [
        ("insert-start", Mat3::identity(), *needle, Grip::Closed),
        ("insert-push", Mat3::identity(), pushed, Grip::Closed),
        ("insert-twist", rotation, twisted, Grip::Closed),
        ("insert-advance", rotation, advanced, Grip::Closed),
        ("insert-release", rotation, advanced, Grip::Open),
    ];
    let waypoints = stages
        .iter()
        .enumerate()
        .map(|(id, (label, r, state, grip))| Waypoint {
            id,
            gripper: Gripper::G1,
            pose: Pose::new(state.center, *r * frame),
            grip: *grip,
            label,
            after: None,
        })
        .collect();
    Ok(InsertionTrajectory {
        waypoints,
        needle_states: stages.iter().map(|s| s.2).collect(),
        tip_side,
        push_dir,
        twist,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct SweepConfig<T> {
    /// Thread lift above the wound center (mm).
    pub lift: T,
    /// Sideways move along the width direction (mm).
    pub lateral: T,
    /// Height of g2's home pose above the wound center (mm).
    pub home_height: T,
}

impl<T: Real> Default for SweepConfig<T> {
    fn default() -> Self {
        Self {
            lift: T::lit(15.0),
            lateral: T::lit(20.0),
            home_height: T::lit(30.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTrajectory<T> {
    pub g1: Vec<Waypoint<T>>,
    pub g2: Vec<Waypoint<T>>,
}

/// g1 hooks the thread at the wound center, lifts it and carries it to one
/// side, then holds; g2 starts once g1 is aside, lifts the thread on the
/// other side and goes home.
pub fn thread_sweep_trajectory<T: Real>(
    model: &WoundModel<T>,
    cfg: &SweepConfig<T>,
) -> Result<SweepTrajectory<T>, ControlError> {
    if !(cfg.lift > T::zero() && cfg.lateral > T::zero() && cfg.home_height > T::zero()) {
        return Err(ControlError::InvalidConfig(
            "lift, lateral and home height must be positive",
        ));
    }
    let half = T::lit(0.5);
    let mid = (model.centerline_extent[0] + model.centerline_extent[1]) * half;
    let center = model.surface_plane.project(model.centerline.point_at(mid));
    let up = *model.surface_normal();
    let side = *model.width_dir * cfg.lateral;

    // Tool pointing down, jaws along the wound.
    let z = -up;
    let x = *model.centerline.direction;
    let tool = Mat3::from_columns(x, z.cross(x), z);

    let wp = |id, gripper, position, label, after| Waypoint {
        id,
        gripper,
        pose: Pose::new(position, tool),
        grip: Grip::Open,
        label,
        after,
    };
    let lifted = center + up * cfg.lift;
    let g1 = vec![
        wp(0, Gripper::G1, center, "sweep-descend", None),
        wp(1, Gripper::G1, lifted, "sweep-lift", None),
        wp(2, Gripper::G1, lifted + side, "sweep-lateral", None),
        wp(3, Gripper::G1, lifted + side, "hold-through-extraction", None),
    ];
    let g2 = vec![
        wp(4, Gripper::G2, center, "sweep-descend", Some(2)),
        wp(5, Gripper::G2, lifted - side, "sweep-lift", None),
        wp(6, Gripper::G2, center + up * cfg.home_height, "home", None),
    ];
    Ok(SweepTrajectory { g1, g2 })
}
