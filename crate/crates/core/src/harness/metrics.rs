use serde::{Deserialize, Serialize};

use super::{ErrorKind, HarnessError, TrialResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ErrorCounts {
    #[serde(rename = "A")]
    pub a: usize,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "I")]
    pub i: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub total: usize,
}

/// Table-style summary over a batch of trials. Rates are percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub trials: usize,
    pub n_planned: usize,
    pub avg_sutures: f64,
    /// Sample standard deviation of sutures per trial (0 for a single trial).
    pub std_sutures: f64,
    pub single_suture_success_rate: f64,
    /// Closed stitches over planned stitches.
    pub wound_gap_closure_rate: f64,
    pub errors: ErrorCounts,
    pub needle_estimate_success_rate: f64,
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

pub fn aggregate(results: &[TrialResult], n_planned: usize) -> Result<MetricsReport, HarnessError> {
    if results.is_empty() {
        return Err(HarnessError::EmptyResults);
    }
    let n = results.len() as f64;
    let sutures: Vec<f64> = results.iter().map(|r| r.sutures_succeeded as f64).collect();
    let mean = sutures.iter().sum::<f64>() / n;
    let std = if results.len() > 1 {
        (sutures.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let sum = |f: fn(&TrialResult) -> usize| results.iter().map(f).sum::<usize>();
    let count = |k| results.iter().map(|r| r.count(k)).sum::<usize>();
    let mut errors = ErrorCounts {
        a: count(ErrorKind::A),
        t: count(ErrorKind::T),
        i: count(ErrorKind::I),
        m: count(ErrorKind::M),
        total: 0,
    };
    errors.total = errors.a + errors.t + errors.i + errors.m;
    Ok(MetricsReport {
        trials: results.len(),
        n_planned,
        avg_sutures: mean,
        std_sutures: std,
        single_suture_success_rate: percent(sum(|r| r.sutures_succeeded), sum(|r| r.sutures_attempted)),
        wound_gap_closure_rate: percent(sum(|r| r.closed_stitches), n_planned * results.len()),
        errors,
        needle_estimate_success_rate: percent(sum(|r| r.pose_estimate_successes), sum(|r| r.pose_estimate_attempts)),
    })
}
