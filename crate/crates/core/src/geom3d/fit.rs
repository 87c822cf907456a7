use std::cmp::Ordering;

use super::primitives::{plane_basis, Circle3, Plane, Ray3};
use super::vector::{Point3, Vec3};
use super::GeomError;
use crate::linalg::SquareMatrix;
use crate::scalar::Real;

pub fn project_point_to_plane<T: Real>(p: Point3<T>, plane: &Plane<T>) -> Point3<T> {
    plane.project(p)
}

/// How `fit_circle_in_plane_with` solves for center and radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CircleFitMethod {
    /// Closed-form algebraic (Kåsa) least squares.
    #[default]
    Algebraic,
    /// Algebraic start followed by Gauss-Newton on the geometric residual.
    Geometric,
}

/// Algebraic least-squares circle in the plane. Points are projected onto the
/// plane first; the returned circle carries the plane's normal.
pub fn fit_circle_in_plane<T: Real>(points: &[Point3<T>], plane: &Plane<T>) -> Result<Circle3<T>, GeomError> {
    fit_circle_in_plane_with(points, plane, CircleFitMethod::Algebraic)
}

pub fn fit_circle_in_plane_with<T: Real>(
    points: &[Point3<T>],
    plane: &Plane<T>,
    method: CircleFitMethod,
) -> Result<Circle3<T>, GeomError> {
    if points.len() < 3 {
        return Err(GeomError::NotACircle);
    }
    let projected: Vec<_> = points.iter().map(|p| plane.project(*p)).collect();
    let origin = Vec3::centroid(&projected).ok_or(GeomError::NotACircle)?;
    let (u, v) = plane.basis();
    let coords: Vec<[T; 2]> = projected
        .iter()
        .map(|p| {
            let d = *p - origin;
            [d.dot(*u), d.dot(*v)]
        })
        .collect();

    // Reject (near) collinear configurations before the normal equations
    // produce an arbitrarily large circle.
    let mut cov = SquareMatrix::<T, 2>::zeros();
    for [a, b] in &coords {
        cov.0[0][0] += *a * *a;
        cov.0[0][1] += *a * *b;
        cov.0[1][1] += *b * *b;
    }
    cov.0[1][0] = cov.0[0][1];
    let (spread, _) = cov.symmetric_eigen();
    if !(spread[0] > spread[1] * T::epsilon().sqrt()) {
        return Err(GeomError::NotACircle);
    }

    // Minimize sum (a^2 + b^2 + D a + E b + F)^2.
    let n = T::from_usize(coords.len()).ok_or(GeomError::NotACircle)?;
    let mut m = SquareMatrix::<T, 3>::zeros();
    let mut rhs = [T::zero(); 3];
    for [a, b] in &coords {
        let row = [*a, *b, T::one()];
        let s = *a * *a + *b * *b;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] += row[i] * row[j];
            }
            rhs[i] -= row[i] * s;
        }
    }
    m.0[2][2] = n;
    let [d, e, f] = m
        .solve(&rhs, T::epsilon() * T::lit(16.0))
        .ok_or(GeomError::NotACircle)?;
    let half = T::lit(0.5);
    let mut center = [-d * half, -e * half];
    let r2 = center[0] * center[0] + center[1] * center[1] - f;
    if !(r2 > T::zero()) || !r2.is_finite() {
        return Err(GeomError::NotACircle);
    }
    let mut radius = r2.sqrt();

    if method == CircleFitMethod::Geometric {
        (center, radius) = gauss_newton_circle(&coords, center, radius);
    }
    if !(radius > T::zero()) || !radius.is_finite() {
        return Err(GeomError::NotACircle);
    }
    let center3 = origin + *u * center[0] + *v * center[1];
    Ok(Circle3::new(center3, plane.normal, radius))
}

fn gauss_newton_circle<T: Real>(coords: &[[T; 2]], mut c: [T; 2], mut r: T) -> ([T; 2], T) {
    for _ in 0..25 {
        let mut jtj = SquareMatrix::<T, 3>::zeros();
        let mut jtr = [T::zero(); 3];
        for [a, b] in coords {
            let (dx, dy) = (*a - c[0], *b - c[1]);
            let dist = (dx * dx + dy * dy).sqrt();
            if dist == T::zero() {
                continue;
            }
            let res = dist - r;
            let jac = [-dx / dist, -dy / dist, -T::one()];
            for i in 0..3 {
                for j in 0..3 {
                    jtj.0[i][j] += jac[i] * jac[j];
                }
                jtr[i] -= jac[i] * res;
            }
        }
        let Some(step) = jtj.solve_spd(&jtr) else {
            break;
        };
        c[0] += step[0];
        c[1] += step[1];
        r += step[2];
        let size = step.iter().fold(T::zero(), |m, s| m.max(s.abs()));
        if size <= T::epsilon() * (T::one() + r) {
            break;
        }
    }
    (c, r)
}

/// The two input points farthest apart, returned in lexicographic order.
/// Among equally distant pairs the lexicographically smallest pair wins.
pub fn farthest_pair<T: Real>(points: &[Point3<T>]) -> Result<(Point3<T>, Point3<T>), GeomError> {
    if points.len() < 2 {
        return Err(GeomError::DegenerateInput("farthest pair needs at least 2 points"));
    }
    let ordered = |a: Point3<T>, b: Point3<T>| {
        if b.lex_cmp(&a) == Ordering::Less {
            (b, a)
        } else {
            (a, b)
        }
    };
    let mut best = ordered(points[0], points[1]);
    let mut best_d = best.0.distance_squared(best.1);
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = a.distance_squared(*b);
            if d < best_d {
                continue;
            }
            let pair = ordered(*a, *b);
            let wins = d > best_d || pair.0.lex_cmp(&best.0).then(pair.1.lex_cmp(&best.1)) == Ordering::Less;
            if wins {
                best = pair;
                best_d = d;
            }
        }
    }
    Ok(best)
}

/// Points' angles about `circle` in its plane basis, sorted, with their
/// indices. Points on the center are skipped.
fn sorted_arc_angles<T: Real>(points: &[Point3<T>], circle: &Circle3<T>) -> Vec<(T, usize)> {
    let (u, v) = plane_basis(circle.normal);
    let mut angles: Vec<(T, usize)> = points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let d = *p - circle.center;
            let (x, y) = (u.dot(d), v.dot(d));
            (x != T::zero() || y != T::zero()).then(|| (y.atan2(x), i))
        })
        .collect();
    angles.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
    angles
}

/// Angular gap after sorted position `k`, wrapping at the end.
fn arc_gap<T: Real>(angles: &[(T, usize)], k: usize) -> T {
    let n = angles.len();
    let g = angles[(k + 1) % n].0 - angles[k].0;
    if k + 1 == n {
        g + T::TAU()
    } else {
        g
    }
}

/// The two points farthest apart along the arc of `circle` that the points
/// cover: the rim projections of the points bounding the widest angular gap.
/// Returned in angular order, counter-clockwise about the normal from the
/// first to the second through the covered arc.
pub fn farthest_pair_along_arc<T: Real>(
    points: &[Point3<T>],
    circle: &Circle3<T>,
) -> Result<(Point3<T>, Point3<T>), GeomError> {
    if points.len() < 2 {
        return Err(GeomError::DegenerateInput("farthest pair needs at least 2 points"));
    }
    let angles = sorted_arc_angles(points, circle);
    if angles.len() < 2 {
        return Err(GeomError::DegenerateInput("points sit on the circle center"));
    }
    let n = angles.len();
    let widest = (0..n).fold(0, |best, k| {
        if arc_gap(&angles, k) > arc_gap(&angles, best) {
            k
        } else {
            best
        }
    });
    let rim = |i: usize| circle.closest_rim_point(points[i]).unwrap_or(points[i]);
    // The covered arc starts after the gap and ends where the gap begins.
    Ok((rim(angles[(widest + 1) % n].1), rim(angles[widest].1)))
}

/// Best window of angular length `span` over sorted angles: (first sorted
/// position, point count, angular extent of the covered points). Most points
/// wins, then the widest extent.
fn best_arc_window<T: Real>(angles: &[(T, usize)], span: T) -> (usize, usize, T) {
    let n = angles.len();
    // Unrolled angle of sorted position m, for m < 2n.
    let at = |m: usize| angles[m % n].0 + if m >= n { T::TAU() } else { T::zero() };
    let mut best = (0, 0, T::zero());
    let mut j = 0;
    for i in 0..n {
        j = j.max(i);
        while j + 1 < i + n && at(j + 1) - at(i) <= span {
            j += 1;
        }
        let (count, extent) = (j - i + 1, at(j) - at(i));
        if count > best.1 || (count == best.1 && extent > best.2) {
            best = (i, count, extent);
        }
    }
    best
}

fn check_span<T: Real>(span: T) -> Result<(), GeomError> {
    if span > T::zero() && span < T::TAU() {
        Ok(())
    } else {
        Err(GeomError::DegenerateInput("arc span must lie in (0, 2pi)"))
    }
}

/// The points inside the arc of angular length `span` on `circle` that covers
/// the most of them (ties go to the widest covered angle). Input order is kept.
pub fn arc_window_points<T: Real>(
    points: &[Point3<T>],
    circle: &Circle3<T>,
    span: T,
) -> Result<Vec<Point3<T>>, GeomError> {
    check_span(span)?;
    let angles = sorted_arc_angles(points, circle);
    let n = angles.len();
    if n < 2 {
        return Ok(angles.iter().map(|(_, i)| points[*i]).collect());
    }
    let (i, count, _) = best_arc_window(&angles, span);
    let mut keep = vec![false; points.len()];
    for k in i..i + count {
        keep[angles[k % n].1] = true;
    }
    Ok(points.iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| *p).collect())
}

/// End points of the best arc window of angular length `span` (see
/// [`arc_window_points`]), placed so the covered points sit in its middle.
/// Returned counter-clockwise about the normal, like
/// [`farthest_pair_along_arc`].
pub fn arc_window_endpoints<T: Real>(
    points: &[Point3<T>],
    circle: &Circle3<T>,
    span: T,
) -> Result<(Point3<T>, Point3<T>), GeomError> {
    check_span(span)?;
    let angles = sorted_arc_angles(points, circle);
    if angles.len() < 2 {
        return Err(GeomError::DegenerateInput(
            "arc window needs at least 2 points off center",
        ));
    }
    let (i, _, extent) = best_arc_window(&angles, span);
    let start = angles[i].0 - (span - extent) / T::lit(2.0);
    let (u, v) = plane_basis(circle.normal);
    let rim = |t: T| circle.center + (*u * t.cos() + *v * t.sin()) * circle.radius;
    Ok((rim(start), rim(start + span)))
}

/// Hits the circle's plane with the ray and snaps the hit radially onto the rim.
pub fn ray_circle_intersection<T: Real>(
    ray: &Ray3<T>,
    circle: &Circle3<T>,
    snap_tolerance: T,
) -> Result<Point3<T>, GeomError> {
    let denom = circle.normal.dot(*ray.direction);
    if denom.abs() < T::lit(1.0e-6).sin() {
        return Err(GeomError::RayParallel);
    }
    let t = circle.normal.dot(circle.center - ray.origin) / denom;
    if t < T::zero() {
        return Err(GeomError::BehindRay);
    }
    let hit = ray.point_at(t);
    let d = hit - circle.center;
    let radial = d - *circle.normal * circle.normal.dot(d);
    let dist = radial.norm();
    let snap = (dist - circle.radius).abs();
    let unresolved = GeomError::TipUnresolved {
        distance: snap.as_f64(),
        tolerance: snap_tolerance.as_f64(),
    };
    if snap > snap_tolerance {
        return Err(unresolved);
    }
    let dir = radial.normalized().ok_or(unresolved)?;
    Ok(circle.center + *dir * circle.radius)
}

/// Distance between near-parallel planes, measured along `a`'s normal at
/// `b`'s reference point.
pub fn plane_plane_distance<T: Real>(a: &Plane<T>, b: &Plane<T>, max_angle_deg: T) -> Result<T, GeomError> {
    plane_plane_distance_at(a, b, max_angle_deg, Vec3::zeros())
}

/// As [`plane_plane_distance`], but measured where `anchor` projects onto `b`.
/// Anchoring near the data keeps a slight tilt from being amplified by the
/// distance to the world origin.
pub fn plane_plane_distance_at<T: Real>(
    a: &Plane<T>,
    b: &Plane<T>,
    max_angle_deg: T,
    anchor: Point3<T>,
) -> Result<T, GeomError> {
    let mut angle = a.normal.angle_to(b.normal);
    if angle > T::FRAC_PI_2() {
        angle = T::PI() - angle;
    }
    let angle_deg = angle.to_degrees();
    if angle_deg > max_angle_deg {
        return Err(GeomError::NonParallel {
            angle_deg: angle_deg.as_f64(),
            max_deg: max_angle_deg.as_f64(),
        });
    }
    Ok(a.signed_distance(b.project(anchor)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom3d::UnitVec3;
    use std::f64::consts::PI;

    fn z_plane(offset: f64) -> Plane<f64> {
        Plane::new(UnitVec3::z_axis(), offset)
    }

    #[test]
    fn projection_examples() {
        assert_eq!(
            project_point_to_plane(Vec3::new(1.0, 2.0, 3.0), &z_plane(0.0)),
            Vec3::new(1.0, 2.0, 0.0)
        );
        assert_eq!(
            project_point_to_plane(Vec3::new(4.0, 5.0, 0.0), &z_plane(0.0)),
            Vec3::new(4.0, 5.0, 0.0)
        );
        assert_eq!(
            project_point_to_plane(Vec3::new(0.0, 0.0, 5.0), &z_plane(2.0)),
            Vec3::new(0.0, 0.0, 2.0)
        );
    }

    #[test]
    fn exact_circle_samples() {
        let pts: Vec<_> = (0..12)
            .map(|i| {
                let a = i as f64 * 0.4;
                Vec3::new(10.0 * a.cos(), 10.0 * a.sin(), 0.0)
            })
            .collect();
        for method in [CircleFitMethod::Algebraic, CircleFitMethod::Geometric] {
            let c = fit_circle_in_plane_with(&pts, &z_plane(0.0), method).unwrap();
            assert!(c.center.norm() < 1e-9);
            assert!((c.radius - 10.0).abs() < 1e-9);
        }
    }

    #[test]
    fn three_points_determine_a_circle() {
        let pts = [
            Vec3::new(1.0, 0.0, 3.0),
            Vec3::new(0.0, 1.0, 3.0),
            Vec3::new(-1.0, 0.0, 3.0),
        ];
        let c = fit_circle_in_plane(&pts, &z_plane(3.0)).unwrap();
        assert!((c.center - Vec3::new(0.0, 0.0, 3.0)).norm() < 1e-12);
        assert!((c.radius - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_points_are_not_a_circle() {
        let pts = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(2.0, 2.0, 0.0),
        ];
        assert_eq!(fit_circle_in_plane(&pts, &z_plane(0.0)), Err(GeomError::NotACircle));
    }

    #[test]
    fn farthest_pair_on_semicircle_is_the_diameter() {
        let r = 7.5;
        let pts: Vec<_> = (0..=40)
            .map(|i| {
                let a = PI * i as f64 / 40.0;
                Vec3::new(r * a.cos(), r * a.sin(), 1.0)
            })
            .collect();
        let (a, b) = farthest_pair(&pts).unwrap();
        assert!((a.distance(b) - 2.0 * r).abs() < 1e-12);
        assert_eq!(a, pts[40]);
        assert_eq!(b, pts[0]);
    }

    #[test]
    fn arc_window_ignores_a_stray() {
        let c = Circle3::new(Vec3::zeros(), UnitVec3::z_axis(), 10.0);
        let at = |deg: f64| Vec3::new(10.0 * deg.to_radians().cos(), 10.0 * deg.to_radians().sin(), 0.0);
        // Points over [20, 160] degrees and one stray at 270.
        let mut pts: Vec<_> = (0..=14).map(|k| at(20.0 + 10.0 * k as f64)).collect();
        pts.push(at(270.0));
        let kept = arc_window_points(&pts, &c, PI).unwrap();
        assert_eq!(kept.len(), 15);
        assert!(!kept.contains(&at(270.0)));
        let (a, b) = farthest_pair_along_arc(&kept, &c).unwrap();
        assert!(a.distance(at(20.0)) < 1e-9 && b.distance(at(160.0)) < 1e-9);
        // The half circle is centered on the covered 140 degrees.
        let (a, b) = arc_window_endpoints(&pts, &c, PI).unwrap();
        assert!(a.distance(at(0.0)) < 1e-9, "{a:?}");
        assert!(b.distance(at(180.0)) < 1e-9, "{b:?}");
        assert!(arc_window_points(&pts, &c, 0.0).is_err());
    }

    #[test]
    fn farthest_pair_small_inputs() {
        let p = Vec3::new(3.0, 1.0, 0.0);
        let q = Vec3::new(-1.0, 2.0, 0.0);
        assert_eq!(farthest_pair(&[p, q]).unwrap(), (q, p));
        assert!(matches!(farthest_pair(&[p]), Err(GeomError::DegenerateInput(_))));
    }

    #[test]
    fn farthest_pair_ties_break_lexicographically() {
        // Square: both diagonals have the same length.
        let pts = [
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 0.0),
        ];
        let (a, b) = farthest_pair(&pts).unwrap();
        assert_eq!((a, b), (Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0)));
    }

    fn unit_circle() -> Circle3<f64> {
        Circle3::new(Vec3::zeros(), UnitVec3::z_axis(), 1.0)
    }

    #[test]
    fn ray_hits_rim() {
        let ray = Ray3::new(Vec3::new(1.0, 0.0, 5.0), UnitVec3::z_axis().flipped());
        let p = ray_circle_intersection(&ray, &unit_circle(), 0.25).unwrap();
        assert!((p - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn parallel_ray_is_rejected() {
        let ray = Ray3::new(Vec3::new(0.0, 0.0, 2.0), UnitVec3::x_axis());
        assert_eq!(
            ray_circle_intersection(&ray, &unit_circle(), 0.25),
            Err(GeomError::RayParallel)
        );
    }

    #[test]
    fn far_plane_hit_is_unresolved() {
        let ray = Ray3::new(Vec3::new(1.5, 0.0, 5.0), UnitVec3::z_axis().flipped());
        assert!(matches!(
            ray_circle_intersection(&ray, &unit_circle(), 0.25),
            Err(GeomError::TipUnresolved { .. })
        ));
    }

    #[test]
    fn plane_distance_examples() {
        assert_eq!(plane_plane_distance(&z_plane(0.0), &z_plane(7.0), 10.0).unwrap(), 7.0);
        assert_eq!(plane_plane_distance(&z_plane(2.0), &z_plane(2.0), 10.0).unwrap(), 0.0);
        let tilted = Plane::new(
            Vec3::new(15f64.to_radians().sin(), 0.0, 15f64.to_radians().cos())
                .normalized()
                .unwrap(),
            0.0,
        );
        assert!(matches!(
            plane_plane_distance(&z_plane(0.0), &tilted, 10.0),
            Err(GeomError::NonParallel { .. })
        ));
        // Opposite normals describe parallel planes too.
        assert_eq!(
            plane_plane_distance(&z_plane(0.0), &z_plane(3.0).flipped(), 10.0).unwrap(),
            3.0
        );
    }
}
