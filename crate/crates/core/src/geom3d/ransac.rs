use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::primitives::{Line3, Plane};
use super::vector::{Point3, UnitVec3, Vec3};
use super::GeomError;
use crate::linalg::SquareMatrix;
use crate::scalar::Real;

/// Parameters shared by the plane and line consensus fitters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct RansacConfig<T> {
    pub iterations: usize,
    /// Point-to-model distance (mm) under which a point counts as an inlier.
    pub inlier_threshold: T,
    /// Absolute floor on the consensus size.
    pub min_inliers: usize,
    /// Relative floor on the consensus size, as a fraction of the input.
    pub min_inlier_fraction: f64,
    pub seed: u64,
}

impl<T: Real> Default for RansacConfig<T> {
    fn default() -> Self {
        Self {
            iterations: 500,
            inlier_threshold: T::lit(0.5),
            min_inliers: 20,
            min_inlier_fraction: 0.3,
            seed: 0,
        }
    }
}

impl<T: Real> RansacConfig<T> {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Consensus size needed for `n` input points.
    pub fn required_inliers(&self, n: usize) -> usize {
        let frac = (self.min_inlier_fraction * n as f64).ceil() as usize;
        self.min_inliers.max(frac)
    }

    pub fn validate(&self, model_minimum: usize) -> Result<(), GeomError> {
        if self.iterations == 0 {
            return Err(GeomError::InvalidConfig("ransac iterations must be >= 1"));
        }
        if !(self.inlier_threshold > T::zero()) {
            return Err(GeomError::InvalidConfig("ransac inlier threshold must be > 0"));
        }
        if self.min_inliers < model_minimum {
            return Err(GeomError::InvalidConfig(
                "ransac min_inliers below the model's minimal sample",
            ));
        }
        if !(0.0..=1.0).contains(&self.min_inlier_fraction) {
            return Err(GeomError::InvalidConfig("ransac min_inlier_fraction outside [0, 1]"));
        }
        Ok(())
    }
}

/// Robust plane fit. Returns the least-squares plane through the consensus set
/// (normal sign canonicalized) and the indices within threshold of it.
pub fn ransac_fit_plane<T: Real>(
    points: &[Point3<T>],
    cfg: &RansacConfig<T>,
) -> Result<(Plane<T>, Vec<usize>), GeomError> {
    cfg.validate(3)?;
    if points.len() < 3 {
        return Err(GeomError::DegenerateInput("plane fit needs at least 3 points"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(usize, Plane<T>)> = None;
    for _ in 0..cfg.iterations {
        let idx = sample(&mut rng, points.len(), 3);
        let (a, b, c) = (points[idx.index(0)], points[idx.index(1)], points[idx.index(2)]);
        let Some(normal) = (b - a).cross(c - a).normalized() else {
            continue;
        };
        let candidate = Plane::from_point_normal(a, normal);
        let count = count_within(points, cfg.inlier_threshold, |p| candidate.distance(p));
        if best.as_ref().is_none_or(|(n, _)| count > *n) {
            best = Some((count, candidate));
        }
    }
    let (_, candidate) = best.ok_or(GeomError::DegenerateInput("every sampled triplet was collinear"))?;
    let consensus = indices_within(points, cfg.inlier_threshold, |p| candidate.distance(p));
    let refit = least_squares_plane(&gather(points, &consensus)).unwrap_or(candidate);
    let plane = refit.canonical();
    let inliers = indices_within(points, cfg.inlier_threshold, |p| plane.distance(p));
    let required = cfg.required_inliers(points.len());
    if inliers.len() < required {
        return Err(GeomError::NoConsensus {
            found: inliers.len(),
            required,
        });
    }
    Ok((plane, inliers))
}

/// Robust line fit. The direction is refit as the principal axis of the
/// consensus set, its sign canonicalized, and the origin is the inlier centroid.
pub fn ransac_fit_line<T: Real>(
    points: &[Point3<T>],
    cfg: &RansacConfig<T>,
) -> Result<(Line3<T>, Vec<usize>), GeomError> {
    cfg.validate(2)?;
    if points.len() < 2 {
        return Err(GeomError::DegenerateInput("line fit needs at least 2 points"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(usize, Line3<T>)> = None;
    for _ in 0..cfg.iterations {
        let idx = sample(&mut rng, points.len(), 2);
        let (a, b) = (points[idx.index(0)], points[idx.index(1)]);
        let Some(direction) = (b - a).normalized() else {
            continue;
        };
        let candidate = Line3::new(a, direction);
        let count = count_within(points, cfg.inlier_threshold, |p| candidate.distance(p));
        if best.as_ref().is_none_or(|(n, _)| count > *n) {
            best = Some((count, candidate));
        }
    }
    let (_, candidate) = best.ok_or(GeomError::DegenerateInput("every sampled pair was coincident"))?;
    let consensus = indices_within(points, cfg.inlier_threshold, |p| candidate.distance(p));
    let line = principal_line(&gather(points, &consensus)).unwrap_or(candidate);
    let line = Line3::new(line.origin, line.direction.canonical());
    let inliers = indices_within(points, cfg.inlier_threshold, |p| line.distance(p));
    let required = cfg.required_inliers(points.len());
    if inliers.len() < required {
        return Err(GeomError::NoConsensus {
            found: inliers.len(),
            required,
        });
    }
    Ok((line, inliers))
}

/// Total least-squares plane: through the centroid, normal along the
/// smallest principal axis.
pub fn least_squares_plane<T: Real>(points: &[Point3<T>]) -> Option<Plane<T>> {
    let (centroid, axes) = principal_axes(points)?;
    let normal = UnitVec3::new_normalize(axes[0])?;
    Some(Plane::from_point_normal(centroid, normal))
}

/// Line through the centroid along the largest principal axis.
pub fn principal_line<T: Real>(points: &[Point3<T>]) -> Option<Line3<T>> {
    let (centroid, axes) = principal_axes(points)?;
    let dir = UnitVec3::new_normalize(axes[2])?;
    Some(Line3::new(centroid, dir))
}

/// Centroid and covariance eigenvectors, smallest eigenvalue first.
fn principal_axes<T: Real>(points: &[Point3<T>]) -> Option<(Point3<T>, [Vec3<T>; 3])> {
    let centroid = Vec3::centroid(points)?;
    let mut cov = SquareMatrix::<T, 3>::zeros();
    for p in points {
        let d = (*p - centroid).to_array();
        for i in 0..3 {
            for j in 0..3 {
                cov.0[i][j] += d[i] * d[j];
            }
        }
    }
    let (_, vecs) = cov.symmetric_eigen();
    Some((centroid, std::array::from_fn(|k| Vec3::from_array(vecs.column(k)))))
}

fn count_within<T: Real>(points: &[Point3<T>], thr: T, dist: impl Fn(Point3<T>) -> T) -> usize {
    points.iter().filter(|p| dist(**p) <= thr).count()
}

fn indices_within<T: Real>(points: &[Point3<T>], thr: T, dist: impl Fn(Point3<T>) -> T) -> Vec<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| dist(**p) <= thr)
        .map(|(i, _)| i)
        .collect()
}

pub(crate) fn gather<T: Copy>(points: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| points[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn grid_on_z(z: f64, n: usize) -> Vec<Point3<f64>> {
        (0..n)
            .map(|i| Vec3::new((i % 20) as f64, (i / 20) as f64 * 0.7, z))
            .collect()
    }

    #[test]
    fn exact_plane_keeps_every_point() {
        let pts = grid_on_z(0.0, 200);
        let (plane, inliers) = ransac_fit_plane(&pts, &RansacConfig::default()).unwrap();
        assert!((plane.normal.z - 1.0).abs() < 1e-12);
        assert!(plane.offset.abs() < 1e-12);
        assert_eq!(inliers.len(), 200);
    }

    #[test]
    fn plane_rejects_labelled_outliers() {
        let mut pts = grid_on_z(5.0, 190);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            pts.push(Vec3::new(rng.random_range(0.0..20.0), rng.random_range(0.0..7.0), 50.0));
        }
        let (plane, inliers) = ransac_fit_plane(&pts, &RansacConfig::default()).unwrap();
        assert_eq!(inliers, (0..190).collect::<Vec<_>>());
        assert!((plane.offset - 5.0).abs() < 1e-9);
    }

    #[test]
    fn plane_needs_three_points() {
        let pts = vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)];
        assert!(matches!(
            ransac_fit_plane(&pts, &RansacConfig::default()),
            Err(GeomError::DegenerateInput(_))
        ));
    }

    #[test]
    fn collinear_input_is_degenerate_for_planes() {
        let pts: Vec<_> = (0..30).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        assert!(matches!(
            ransac_fit_plane(&pts, &RansacConfig::default()),
            Err(GeomError::DegenerateInput(_))
        ));
    }

    #[test]
    fn sparse_consensus_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<_> = (0..100)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-50.0..50.0),
                    rng.random_range(-50.0..50.0),
                    rng.random_range(-50.0..50.0),
                )
            })
            .collect();
        assert!(matches!(
            ransac_fit_plane(&pts, &RansacConfig::default()),
            Err(GeomError::NoConsensus { .. })
        ));
    }

    #[test]
    fn line_along_x_axis() {
        let pts: Vec<_> = (0..50).map(|i| Vec3::new(-(i as f64), 0.0, 0.0)).collect();
        let (line, inliers) = ransac_fit_line(&pts, &RansacConfig::default()).unwrap();
        assert_eq!(*line.direction, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(inliers.len(), 50);
    }

    #[test]
    fn noisy_line_direction_within_one_degree() {
        let truth = Vec3::new(1.0, 2.0, -0.5).normalized().unwrap();
        let origin = Vec3::new(3.0, -1.0, 4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let jitter = Normal::new(0.0, 0.1).unwrap();
        let mut pts = Vec::new();
        for i in 0..190 {
            let s = -60.0 + 120.0 * i as f64 / 189.0;
            let p = origin + *truth * s;
            pts.push(
                p + Vec3::new(
                    jitter.sample(&mut rng),
                    jitter.sample(&mut rng),
                    jitter.sample(&mut rng),
                ),
            );
        }
        for _ in 0..10 {
            pts.push(Vec3::new(
                rng.random_range(-40.0..40.0),
                rng.random_range(-40.0..40.0),
                rng.random_range(-40.0..40.0),
            ));
        }
        let (line, _) = ransac_fit_line(&pts, &RansacConfig::default()).unwrap();
        let angle = line.direction.angle_to(truth.canonical());
        assert!(angle.to_degrees() < 1.0, "angle {angle}");
    }

    #[test]
    fn identical_points_are_degenerate_for_lines() {
        let pts = vec![Vec3::new(1.0, 1.0, 1.0); 40];
        assert!(matches!(
            ransac_fit_line(&pts, &RansacConfig::default()),
            Err(GeomError::DegenerateInput(_))
        ));
    }

    #[test]
    fn zero_iterations_is_a_config_error() {
        let cfg = RansacConfig::<f64> {
            iterations: 0,
            ..Default::default()
        };
        assert!(matches!(
            ransac_fit_plane(&grid_on_z(0.0, 50), &cfg),
            Err(GeomError::InvalidConfig(_))
        ));
    }
}
