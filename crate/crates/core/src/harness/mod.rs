//! Monte-Carlo suturing trials and the metrics computed over them.
//!
//! A trial plans sutures on a synthetic wound and runs every suture through
//! estimation, alignment, insertion, thread handling, extraction and
//! handover. Measurable geometric errors are compared against tolerances and
//! the remaining failure modes are drawn as Bernoulli events. A trial stops at
//! its first failed suture.

mod config;
mod metrics;
mod trial;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{overhead_camera, Ablation, ExperimentConfig, FailureParams, SimSceneConfig, TrialConfig};
pub use metrics::{aggregate, ErrorCounts, MetricsReport};
pub use trial::{derive_seed, observe, refine_observed_tip, run_experiment, run_trial, ExperimentReport, Observation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no trial results to aggregate")]
    EmptyResults,
    #[error("wound planning failed: {0}")]
    Planning(String),
}

/// Failure taxonomy: alignment, thread management, insertion, missed grasp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorKind {
    A,
    T,
    I,
    M,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEvent {
    pub kind: ErrorKind,
    /// 1-based suture number.
    pub suture_index: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub seed: u64,
    pub sutures_attempted: usize,
    pub sutures_succeeded: usize,
    pub closed_stitches: usize,
    pub errors: Vec<ErrorEvent>,
    pub pose_estimate_successes: usize,
    pub pose_estimate_attempts: usize,
}

impl TrialResult {
    pub fn count(&self, kind: ErrorKind) -> usize {
        self.errors.iter().filter(|e| e.kind == kind).count()
    }
}
