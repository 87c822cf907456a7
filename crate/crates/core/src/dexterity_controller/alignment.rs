use super::{ControlError, Pose};
use crate::geom3d::{Mat3, UnitVec3, Vec3};
use crate::needle_estimator::{NeedleMeasurement, Side};
use crate::scalar::Real;
use crate::suture_planner::WoundModel;

/// Target angle between the downward vertical and the tip-to-center line
/// before insertion (degrees).
pub const PRE_INSERTION_ANGLE_DEG: f64 = 20.0;

fn check<T: Real>(estimate: &NeedleMeasurement<T>) -> Result<(), ControlError> {
    if !(estimate.radius > T::zero()) {
        return Err(ControlError::DegenerateEstimate("non-positive radius"));
    }
    if estimate.endpoint_left.distance(estimate.endpoint_right) <= T::epsilon() {
        return Err(ControlError::DegenerateEstimate("endpoints coincide"));
    }
    Ok(())
}

/// Smallest rotation putting the needle normal on the centerline axis
/// (either sense), and the resulting normal.
fn normal_to_centerline<T: Real>(estimate: &NeedleMeasurement<T>, model: &WoundModel<T>) -> (Mat3<T>, UnitVec3<T>) {
    let axis = model.centerline.direction.oriented_towards(*estimate.normal);
    (Mat3::rotation_between(estimate.normal, axis), axis)
}

fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::TAU();
    let mut a = a % two_pi;
    if a > T::PI() {
        a -= two_pi;
    } else if a <= -T::PI() {
        a += two_pi;
    }
    a
}

/// Rotation about the needle center: first the normal onto the centerline,
/// then about the new normal until both endpoints sit at the same height
/// (along the surface normal).
pub fn handover_alignment<T: Real>(
    estimate: &NeedleMeasurement<T>,
    model: &WoundModel<T>,
) -> Result<Pose<T>, ControlError> {
    check(estimate)?;
    let (first, axis) = normal_to_centerline(estimate, model);
    let up = *model.surface_normal();
    let chord = first.mul_vec(estimate.endpoint_right - estimate.endpoint_left);
    // Height of the rotated chord is a·cos θ + b·sin θ.
    let a = up.dot(chord);
    let b = up.dot(axis.cross(chord));
    let theta = if b == T::zero() {
        if a == T::zero() {
            T::zero()
        } else {
            T::FRAC_PI_2()
        }
    } else {
        (-a / b).atan()
    };
    let second = Mat3::from_axis_angle(axis, theta);
    Ok(Pose::new(estimate.center, second * first))
}

/// As [`handover_alignment`], but the second rotation sets the angle between
/// the downward vertical and `tip − center` to 20°.
pub fn pre_insertion_alignment<T: Real>(
    estimate: &NeedleMeasurement<T>,
    model: &WoundModel<T>,
    tip_side: Side,
) -> Result<Pose<T>, ControlError> {
    check(estimate)?;
    let (first, axis) = normal_to_centerline(estimate, model);
    let down = -*model.surface_normal();
    let down_in_plane = down - *axis * axis.dot(down);
    let reach = down_in_plane.norm();
    let tip = first.mul_vec(estimate.endpoint(tip_side) - estimate.center);
    let along = axis.dot(tip);
    let radial = (tip - *axis * along).norm();
    let steep = ControlError::DegenerateEstimate("pre-insertion angle is unreachable");
    if reach <= T::epsilon() || radial <= T::epsilon() {
        return Err(steep);
    }
    let e1 = down_in_plane / reach;
    let e2 = axis.cross(e1);
    let phi = tip.dot(e2).atan2(tip.dot(e1));
    // In-plane angle from e1 at which the 3D angle to the vertical hits the target.
    let target = T::lit(PRE_INSERTION_ANGLE_DEG).to_radians();
    let c = (target.cos() * tip.norm() - along * axis.dot(down)) / (radial * reach);
    if c.abs() > T::one() {
        return Err(steep);
    }
    let alpha = c.acos();
    let up_turn = wrap_angle(alpha - phi);
    let down_turn = wrap_angle(-alpha - phi);
    let theta = if down_turn.abs() < up_turn.abs() {
        down_turn
    } else {
        up_turn
    };
    let second = Mat3::from_axis_angle(axis, theta);
    Ok(Pose::new(estimate.center, second * first))
}

/// Applies an alignment pose to a needle (rotation about its center).
pub fn apply_alignment<T: Real>(estimate: &NeedleMeasurement<T>, pose: &Pose<T>) -> NeedleMeasurement<T> {
    estimate.transformed(&pose.orientation, pose.position, Vec3::zeros())
}
