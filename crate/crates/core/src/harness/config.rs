use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::dexterity_controller::{InsertionConfig, SweepConfig};
use crate::geom3d::{Mat3, RansacConfig, Vec3};
use crate::needle_estimator::{CameraModel, EkfConfig, MeasureConfig, TipRefineConfig};
use crate::suture_planner::PlannerConfig;
use crate::synth_scene::{NoiseModel, PoseSampler, RenderConfig, WoundSceneParams};

/// Failure-injection parameters. The defaults are calibrated against the
/// simulator, not measured on hardware.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FailureParams {
    /// Largest grasp-point error that still catches the needle (mm).
    pub grasp_tolerance: f64,
    /// Largest vertical tip error at insertion (mm).
    pub insertion_height_tolerance: f64,
    /// Largest needle-normal error after alignment (deg).
    pub alignment_tolerance_deg: f64,
    pub tangle_prob_raw: f64,
    pub tangle_prob_swept: f64,
    /// Chance the needle snaps out of line when the alignment steps are skipped.
    pub alignment_snap_prob: f64,
    /// Chance a successful suture also closes its part of the gap.
    pub closure_prob: f64,
    /// Endpoint error below which a pose estimate counts as a success (mm).
    pub estimate_success_threshold: f64,
}

impl Default for FailureParams {
    fn default() -> Self {
        Self {
            grasp_tolerance: 2.5,
            insertion_height_tolerance: 0.5,
            alignment_tolerance_deg: 3.0,
            tangle_prob_raw: 0.2,
            tangle_prob_swept: 0.06,
            alignment_snap_prob: 0.1,
            closure_prob: 0.92,
            estimate_success_threshold: 2.0,
        }
    }
}

impl FailureParams {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let probs = [
            ("tangle_prob_raw", self.tangle_prob_raw),
            ("tangle_prob_swept", self.tangle_prob_swept),
            ("alignment_snap_prob", self.alignment_snap_prob),
        ];
        for (name, p) in probs {
            if !(0.0..1.0).contains(&p) {
                return Err(HarnessError::InvalidConfig(format!("{name} must lie in [0, 1)")));
            }
        }
        if !(0.0..=1.0).contains(&self.closure_prob) {
            return Err(HarnessError::InvalidConfig("closure_prob must lie in [0, 1]".into()));
        }
        let tols = [
            ("grasp_tolerance", self.grasp_tolerance),
            ("insertion_height_tolerance", self.insertion_height_tolerance),
            ("alignment_tolerance_deg", self.alignment_tolerance_deg),
            ("estimate_success_threshold", self.estimate_success_threshold),
        ];
        for (name, t) in tols {
            if !(t > 0.0 && t.is_finite()) {
                return Err(HarnessError::InvalidConfig(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Camera looking straight down at the wound from 150 mm.
pub fn overhead_camera() -> CameraModel<f64> {
    CameraModel {
        fx: 600.0,
        fy: 600.0,
        cx: 320.0,
        cy: 240.0,
        width: 640,
        height: 480,
        rotation: Mat3::from_columns(
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 0.0, -1.0),
        ),
        translation: Vec3::new(0.0, 0.0, 150.0),
    }
}

/// Perception stand-in: how needle observations and the wound are generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimSceneConfig {
    pub camera: CameraModel<f64>,
    pub poses: PoseSampler,
    /// Points drawn per needle cloud before dropout.
    pub cloud_points: usize,
    pub measure: MeasureConfig<f64>,
    pub render: RenderConfig,
    /// Background depth behind the needle, relative to the needle center (mm).
    pub background_offset: f64,
    pub refine: TipRefineConfig<f64>,
    pub wound: WoundSceneParams,
    pub planner: PlannerConfig<f64>,
    pub insertion: InsertionConfig<f64>,
    pub sweep: SweepConfig<f64>,
}

impl Default for SimSceneConfig {
    fn default() -> Self {
        Self {
            camera: overhead_camera(),
            poses: PoseSampler::default(),
            cloud_points: 150,
            measure: MeasureConfig {
                ransac: RansacConfig {
                    iterations: 200,
                    ..RansacConfig::default()
                },
                ..MeasureConfig::default()
            },
            render: RenderConfig {
                depth_noise: 0.5,
                ..RenderConfig::default()
            },
            background_offset: 25.0,
            refine: TipRefineConfig::default(),
            wound: WoundSceneParams {
                sigma: 0.2,
                ..WoundSceneParams::default()
            },
            planner: PlannerConfig {
                ransac: RansacConfig {
                    iterations: 100,
                    ..RansacConfig::default()
                },
                ..PlannerConfig::default()
            },
            insertion: InsertionConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrialConfig {
    pub n_sutures: usize,
    pub enable_ekf: bool,
    pub enable_thread_mgmt: bool,
    /// Run the handover and pre-insertion alignment steps.
    pub enable_alignment: bool,
    pub noise: NoiseModel,
    pub failure: FailureParams,
    pub ekf: EkfConfig<f64>,
    pub scene: SimSceneConfig,
    pub seed: u64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            n_sutures: 6,
            enable_ekf: true,
            enable_thread_mgmt: true,
            enable_alignment: true,
            noise: NoiseModel::default(),
            failure: FailureParams::default(),
            ekf: EkfConfig::default(),
            scene: SimSceneConfig::default(),
            seed: 0,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.n_sutures == 0 {
            return Err(HarnessError::InvalidConfig("n_sutures must be >= 1".into()));
        }
        if self.scene.cloud_points < 10 {
            return Err(HarnessError::InvalidConfig("cloud_points must be >= 10".into()));
        }
        self.failure.validate()?;
        self.noise
            .validate()
            .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        self.ekf
            .validate()
            .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        self.scene
            .camera
            .validate()
            .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        self.scene
            .wound
            .validate()
            .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        Ok(())
    }

    pub fn with_ablation(mut self, ablation: Ablation) -> Self {
        self.enable_ekf = ablation != Ablation::NoEkf;
        self.enable_thread_mgmt = ablation != Ablation::NoThread;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    Full,
    NoEkf,
    NoThread,
}

/// A batch of trials: trial `k` runs with seed `derive_seed(seed, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub seed: u64,
    pub trial: TrialConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            trials: 15,
            seed: 42,
            trial: TrialConfig::default(),
        }
    }
}
