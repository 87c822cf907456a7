//! Primitive 3D geometry and the robust fitters the rest of the crate builds on.
//!
//! All operations are pure; RANSAC randomness comes only from the seed in
//! [`RansacConfig`].

mod fit;
mod primitives;
mod ransac;
mod vector;

use thiserror::Error;

pub use fit::{
    arc_window_endpoints, arc_window_points, farthest_pair, farthest_pair_along_arc, fit_circle_in_plane,
    fit_circle_in_plane_with, plane_plane_distance, plane_plane_distance_at, project_point_to_plane,
    ray_circle_intersection, CircleFitMethod,
};
pub use primitives::{Circle3, Line3, Plane, Ray3};
pub(crate) use ransac::gather;
pub use ransac::{least_squares_plane, principal_line, ransac_fit_line, ransac_fit_plane, RansacConfig};
pub use vector::{Mat3, Point3, UnitVec3, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("no consensus: best model has {found} inliers, {required} required")]
    NoConsensus { found: usize, required: usize },
    #[error("points do not determine a circle")]
    NotACircle,
    #[error("ray is parallel to the circle plane")]
    RayParallel,
    #[error("circle plane lies behind the ray origin")]
    BehindRay,
    #[error("plane hit is {distance:.4} mm from the rim (tolerance {tolerance:.4} mm)")]
    TipUnresolved { distance: f64, tolerance: f64 },
    #[error("planes are {angle_deg:.2} deg apart (limit {max_deg:.2} deg)")]
    NonParallel { angle_deg: f64, max_deg: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}
