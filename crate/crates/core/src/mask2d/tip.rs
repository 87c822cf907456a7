use super::raster::{BinaryMask, Pixel};
use super::Mask2dError;

/// Skeleton end points: set pixels with exactly one set 8-neighbor.
pub fn skeleton_endpoints(skeleton: &BinaryMask) -> Vec<Pixel> {
    skeleton.pixels().filter(|p| skeleton.neighbor_count(*p) == 1).collect()
}

/// The skeleton end point closest to `hint` (column, row in pixels).
/// Equidistant end points resolve to the smaller `(x, y)`.
pub fn tip_pixel(skeleton: &BinaryMask, hint: [f64; 2]) -> Result<Pixel, Mask2dError> {
    skeleton_endpoints(skeleton)
        .into_iter()
        .map(|p| {
            let dx = p.x as f64 - hint[0];
            let dy = p.y as f64 - hint[1];
            (dx * dx + dy * dy, p)
        })
        .min_by(|(da, pa), (db, pb)| da.total_cmp(db).then(pa.cmp(pb)))
        .map(|(_, p)| p)
        .ok_or(Mask2dError::NoEndpoint)
}
