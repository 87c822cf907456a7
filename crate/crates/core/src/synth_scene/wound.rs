use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SceneError;
use crate::dexterity_controller::Pose;
use crate::geom3d::{Line3, Mat3, Plane, Point3, UnitVec3, Vec3};
use crate::suture_planner::{WoundModel, WoundScene};

/// Raised straight wound on a flat phantom. In the wound frame the phantom is
/// `z = 0`, the wound top is `z = height`, the centerline runs along `y`
/// through the origin and the width is along `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WoundSceneParams {
    pub height: f64,
    pub width: f64,
    pub length: f64,
    /// Wound frame to world.
    pub placement: Pose<f64>,
    /// Grid pitch of the surface and center clouds (mm).
    pub surface_spacing: f64,
    /// Grid pitch of the phantom cloud (mm).
    pub phantom_spacing: f64,
    /// Phantom strip width on each side of the wound (mm).
    pub phantom_margin: f64,
    pub sigma: f64,
    /// Jitter all three axes instead of only the depth (surface normal) axis.
    pub isotropic_noise: bool,
    pub seed: u64,
}

impl Default for WoundSceneParams {
    fn default() -> Self {
        Self {
            height: 5.0,
            width: 9.0,
            length: 60.0,
            placement: Pose::new(Vec3::zeros(), Mat3::identity()),
            surface_spacing: 0.5,
            phantom_spacing: 1.0,
            phantom_margin: 15.0,
            sigma: 0.0,
            isotropic_noise: false,
            seed: 0,
        }
    }
}

impl WoundSceneParams {
    pub fn validate(&self) -> Result<(), SceneError> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !(positive(self.height) && positive(self.width) && positive(self.length)) {
            return Err(SceneError::InvalidParams("height, width and length must be positive"));
        }
        if !(positive(self.surface_spacing) && positive(self.phantom_spacing) && positive(self.phantom_margin)) {
            return Err(SceneError::InvalidParams("spacings and margin must be positive"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(SceneError::InvalidParams("sigma must be >= 0"));
        }
        if !self.placement.is_valid(1e-9) {
            return Err(SceneError::InvalidParams("placement is not a rigid pose"));
        }
        Ok(())
    }
}

/// `n + 1` evenly spaced values covering `[a, b]` with both ends exact.
fn span(a: f64, b: f64, pitch: f64) -> Vec<f64> {
    let n = ((b - a) / pitch).ceil().max(1.0) as usize;
    (0..=n)
        .map(|k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 })
        .collect()
}

/// Segmented clouds of a raised wound and the model they were drawn from.
pub fn generate_wound_scene(params: &WoundSceneParams) -> Result<(WoundScene<f64>, WoundModel<f64>), SceneError> {
    params.validate()?;
    let (h, hw, hl) = (params.height, params.width / 2.0, params.length / 2.0);
    let ys = span(-hl, hl, params.surface_spacing);

    let mut surface = Vec::new();
    for &x in &span(-hw, hw, params.surface_spacing) {
        for &y in &ys {
            surface.push(Vec3::new(x, y, h));
        }
    }
    let center: Vec<_> = ys.iter().map(|&y| Vec3::new(0.0, y, h)).collect();
    let mut phantom = Vec::new();
    let side = span(
        hw + params.phantom_spacing,
        hw + params.phantom_margin,
        params.phantom_spacing,
    );
    for &y in &span(-hl, hl, params.phantom_spacing) {
        for &x in &side {
            phantom.push(Vec3::new(-x, y, 0.0));
            phantom.push(Vec3::new(x, y, 0.0));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let place = |cloud: Vec<Point3<f64>>, rng: &mut ChaCha8Rng| -> Vec<Point3<f64>> {
        cloud
            .into_iter()
            .map(|p| {
                let jitter = if params.sigma == 0.0 {
                    Vec3::zeros()
                } else if params.isotropic_noise {
                    Vec3::new(unit.sample(rng), unit.sample(rng), unit.sample(rng)) * params.sigma
                } else {
                    Vec3::new(0.0, 0.0, unit.sample(rng) * params.sigma)
                };
                params.placement.orientation.mul_vec(p + jitter) + params.placement.position
            })
            .collect()
    };
    let scene = WoundScene {
        wound_center_cloud: place(center, &mut rng),
        wound_surface_cloud: place(surface, &mut rng),
        phantom_cloud: place(phantom, &mut rng),
    };

    let rot = &params.placement.orientation;
    let origin = params.placement.position;
    let normal = UnitVec3::new_unchecked(rot.column(2));
    let dir = UnitVec3::new_unchecked(rot.column(1)).canonical();
    let top = origin + *normal * h;
    let model = WoundModel {
        surface_plane: Plane::from_point_normal(top, normal),
        phantom_plane: Plane::from_point_normal(origin, normal),
        centerline: Line3::new(top, dir),
        centerline_extent: [-hl, hl],
        width: params.width,
        height: params.height,
        width_dir: normal.cross(*dir).normalized().expect("orthonormal placement"),
    };
    Ok((scene, model))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_matches_parameters() {
        let (scene, model) = generate_wound_scene(&WoundSceneParams::default()).unwrap();
        assert_eq!(model.height, 5.0);
        assert_eq!(model.width, 9.0);
        assert_eq!(model.length(), 60.0);
        assert!(scene.wound_surface_cloud.iter().all(|p| p.z == 5.0));
        assert!(scene.phantom_cloud.iter().all(|p| p.z == 0.0 && p.x.abs() > 4.5));
        let xs: Vec<f64> = scene.wound_surface_cloud.iter().map(|p| p.x).collect();
        assert_eq!(xs.iter().cloned().fold(f64::INFINITY, f64::min), -4.5);
        assert_eq!(xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 4.5);
    }

    #[test]
    fn bad_params_rejected() {
        let p = WoundSceneParams {
            height: -1.0,
            ..Default::default()
        };
        assert!(matches!(generate_wound_scene(&p), Err(SceneError::InvalidParams(_))));
    }

    #[test]
    fn span_hits_both_ends() {
        let s = span(-4.5, 4.5, 0.5);
        assert_eq!(s.len(), 19);
        assert_eq!((s[0], s[18]), (-4.5, 4.5));
    }
}
