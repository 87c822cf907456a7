//! Binary masks and single-channel rasters: flood-fill averaging,
//! skeletonization, adaptive depth thresholding and tip-pixel lookup.
//! Connectivity is 8-connectivity throughout.

mod raster;
mod skeleton;
mod threshold;
mod tip;

use thiserror::Error;

pub use raster::{flood_fill_average, BinaryMask, Pixel, Raster};
pub use skeleton::skeletonize;
pub use threshold::{adaptive_depth_threshold, otsu_depth_threshold};
pub use tip::{skeleton_endpoints, tip_pixel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Mask2dError {
    #[error("image is {image:?} but mask is {mask:?}")]
    DimensionMismatch {
        image: (usize, usize),
        mask: (usize, usize),
    },
    #[error("{len} values do not fill a {width}x{height} grid")]
    InvalidDimensions { width: usize, height: usize, len: usize },
    #[error("fewer than two distinct valid depth values")]
    NoContrast,
    #[error("skeleton has no end point")]
    NoEndpoint,
}
