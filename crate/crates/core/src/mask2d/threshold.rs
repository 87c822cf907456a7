use super::raster::{BinaryMask, Raster};
use super::Mask2dError;
use crate::scalar::Real;

/// Otsu threshold over the valid depth samples of `crop`, evaluated exactly
/// over every split between consecutive distinct values. Returns the mask of
/// the nearer class together with the threshold (largest depth in that class).
pub fn otsu_depth_threshold<T: Real>(crop: &Raster<T>) -> Result<(BinaryMask, T), Mask2dError> {
    let mut valid: Vec<T> = crop
        .values()
        .iter()
        .copied()
        .filter(|v| Raster::is_valid_depth(*v))
        .collect();
    valid.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));

    // (value, count) runs of distinct values.
    let mut runs: Vec<(T, usize)> = Vec::new();
    for v in valid {
        match runs.last_mut() {
            Some((last, n)) if *last == v => *n += 1,
            _ => runs.push((v, 1)),
        }
    }
    if runs.len() < 2 {
        return Err(Mask2dError::NoContrast);
    }

    // Between-class variance w0 w1 (mu0 - mu1)^2, computed around the first
    // value to keep the sums well conditioned.
    let base = runs[0].0;
    let total_n: usize = runs.iter().map(|r| r.1).sum();
    let total_sum: T = runs
        .iter()
        .map(|(v, n)| (*v - base) * T::from_usize(*n).unwrap_or_else(T::zero))
        .sum();
    let total = T::from_usize(total_n).unwrap_or_else(T::one);

    let mut best = (T::neg_infinity(), runs[0].0);
    let (mut n0, mut s0) = (0usize, T::zero());
    for (v, n) in &runs[..runs.len() - 1] {
        n0 += n;
        s0 += (*v - base) * T::from_usize(*n).unwrap_or_else(T::zero);
        let c0 = T::from_usize(n0).unwrap_or_else(T::one);
        let c1 = total - c0;
        let mu0 = s0 / c0;
        let mu1 = (total_sum - s0) / c1;
        let between = (c0 / total) * (c1 / total) * (mu0 - mu1) * (mu0 - mu1);
        if between > best.0 {
            best = (between, *v);
        }
    }
    let threshold = best.1;
    let bits = crop
        .values()
        .iter()
        .map(|v| Raster::is_valid_depth(*v) && *v <= threshold)
        .collect();
    let mask = BinaryMask::from_bits(crop.width(), crop.height(), bits)?;
    Ok((mask, threshold))
}

/// Selects the nearer depth class of `crop` by Otsu's criterion.
pub fn adaptive_depth_threshold<T: Real>(crop: &Raster<T>) -> Result<BinaryMask, Mask2dError> {
    otsu_depth_threshold(crop).map(|(mask, _)| mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_crop_has_no_contrast() {
        let r = Raster::filled(4, 4, 120.0f64);
        assert_eq!(adaptive_depth_threshold(&r), Err(Mask2dError::NoContrast));
    }

    #[test]
    fn invalid_pixels_never_selected() {
        let r = Raster::from_values(3, 2, vec![0.0, f64::NAN, 100.0, 101.0, 200.0, f64::INFINITY]).unwrap();
        let m = adaptive_depth_threshold(&r).unwrap();
        assert_eq!(m.bits(), &[false, false, true, true, false, false]);
    }

    #[test]
    fn two_values_split_between_them() {
        let r = Raster::from_values(2, 1, vec![50.0, 60.0]).unwrap();
        let (m, t) = otsu_depth_threshold(&r).unwrap();
        assert_eq!(t, 50.0);
        assert_eq!(m.bits(), &[true, false]);
    }
}
