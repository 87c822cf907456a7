//! Per-interaction needle filter.
//!
//! The needle is stationary while it is observed and every measurement
//! observes the full state, so both the transition and the measurement model
//! are the 13x13 identity. A fresh filter is built before each needle
//! interaction: it is initialized from the average of the first
//! `init_count` measurements and then absorbs `update_count` gated updates.

use serde::{Deserialize, Serialize};

use super::measurement::{NeedleMeasurement, STATE_DIM};
use super::EstimateError;
use crate::linalg::SquareMatrix;
use crate::scalar::Real;

pub type StateVector<T> = [T; STATE_DIM];
pub type StateMatrix<T> = SquareMatrix<T, STATE_DIM>;

/// Where the measurement noise `R` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", bound = "T: Real")]
pub enum MeasurementNoise<T> {
    /// Diagonal sample covariance of the initialization batch, floored.
    InitSampleCovariance,
    /// `R = sigma² I`, given as the variance.
    Isotropic(T),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateMode {
    /// Every component within `gate_sigma` reference standard deviations.
    PerComponent,
    /// RMS of the per-component z-scores within `gate_sigma`.
    Mahalanobis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct EkfConfig<T> {
    pub init_count: usize,
    pub update_count: usize,
    pub gate_sigma: T,
    /// Total draws allowed (initialization included) before giving up.
    pub max_measurements: usize,
    /// `Q = process_noise · I`.
    pub process_noise: T,
    /// Lower bound on covariance diagonal entries.
    pub covariance_floor: T,
    pub measurement_noise: MeasurementNoise<T>,
    pub gate: GateMode,
}

impl<T: Real> Default for EkfConfig<T> {
    fn default() -> Self {
        Self {
            init_count: 7,
            update_count: 3,
            gate_sigma: T::lit(3.0),
            max_measurements: 15,
            process_noise: T::lit(1.0e-6),
            covariance_floor: T::lit(1.0e-4),
            measurement_noise: MeasurementNoise::InitSampleCovariance,
            gate: GateMode::PerComponent,
        }
    }
}

impl<T: Real> EkfConfig<T> {
    pub fn validate(&self) -> Result<(), EstimateError> {
        if self.init_count == 0 {
            return Err(EstimateError::InvalidConfig("init_count must be >= 1"));
        }
        if self.max_measurements < self.init_count + self.update_count {
            return Err(EstimateError::InvalidConfig(
                "max_measurements must cover init_count + update_count",
            ));
        }
        if !(self.gate_sigma > T::zero()) {
            return Err(EstimateError::InvalidConfig("gate_sigma must be positive"));
        }
        if !(self.covariance_floor > T::zero()) || self.process_noise < T::zero() {
            return Err(EstimateError::InvalidConfig("noise terms must be non-negative"));
        }
        if let MeasurementNoise::Isotropic(r) = self.measurement_noise {
            if !(r > T::zero()) {
                return Err(EstimateError::InvalidConfig("measurement variance must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EkfState<T: Real> {
    pub mean: StateVector<T>,
    pub covariance: StateMatrix<T>,
    /// Measurements seen, rejected ones included.
    pub measurement_count: usize,
    pub accepted_updates: usize,
    /// Initialization mean and variance the gate compares against.
    pub reference_mean: StateVector<T>,
    pub reference_variance: StateVector<T>,
    /// Diagonal of `R`.
    pub measurement_variance: StateVector<T>,
}

impl<T: Real> EkfState<T> {
    pub fn estimate(&self) -> Result<NeedleMeasurement<T>, EstimateError> {
        NeedleMeasurement::from_vector(&self.mean)
    }
}

/// Builds the filter from the first `cfg.init_count` measurements.
pub fn ekf_initialize<T: Real>(
    measurements: &[NeedleMeasurement<T>],
    cfg: &EkfConfig<T>,
) -> Result<EkfState<T>, EstimateError> {
    cfg.validate()?;
    if measurements.len() < cfg.init_count {
        return Err(EstimateError::InsufficientMeasurements {
            got: measurements.len(),
            needed: cfg.init_count,
        });
    }
    let batch: Vec<_> = measurements[..cfg.init_count]
        .iter()
        .map(NeedleMeasurement::to_vector)
        .collect();

    // Running mean: identical inputs reproduce themselves bit for bit.
    let mut mean = batch[0];
    for (k, x) in batch.iter().enumerate().skip(1) {
        let w = T::one() / T::from_usize(k + 1).unwrap_or_else(T::one);
        for i in 0..STATE_DIM {
            mean[i] += (x[i] - mean[i]) * w;
        }
    }
    let mut variance = [T::zero(); STATE_DIM];
    if batch.len() > 1 {
        let denom = T::from_usize(batch.len() - 1).unwrap_or_else(T::one);
        for x in &batch {
            for i in 0..STATE_DIM {
                let d = x[i] - mean[i];
                variance[i] += d * d / denom;
            }
        }
    }
    let floored = variance.map(|v| v.max(cfg.covariance_floor));
    renormalize_normal(&mut mean);

    let measurement_variance = match cfg.measurement_noise {
        MeasurementNoise::InitSampleCovariance => floored,
        MeasurementNoise::Isotropic(r) => [r; STATE_DIM],
    };
    Ok(EkfState {
        mean,
        covariance: SquareMatrix::from_diagonal(&floored),
        measurement_count: cfg.init_count,
        accepted_updates: 0,
        reference_mean: mean,
        reference_variance: floored,
        measurement_variance,
    })
}

/// Gate test of `z` against the initialization reference.
pub fn passes_gate<T: Real>(state: &EkfState<T>, z: &StateVector<T>, cfg: &EkfConfig<T>) -> bool {
    let scores = (0..STATE_DIM).map(|i| (z[i] - state.reference_mean[i]).abs() / state.reference_variance[i].sqrt());
    match cfg.gate {
        GateMode::PerComponent => scores.into_iter().all(|s| s <= cfg.gate_sigma),
        GateMode::Mahalanobis => {
            let sum: T = scores.map(|s| s * s).sum();
            let dim = T::from_usize(STATE_DIM).unwrap_or_else(T::one);
            (sum / dim).sqrt() <= cfg.gate_sigma
        }
    }
}

/// One predict/update cycle. A gated-out measurement only bumps the count;
/// mean and covariance come back untouched.
pub fn ekf_update<T: Real>(state: &EkfState<T>, z: &NeedleMeasurement<T>, cfg: &EkfConfig<T>) -> (EkfState<T>, bool) {
    let zv = z.to_vector();
    let mut next = state.clone();
    next.measurement_count += 1;
    if !passes_gate(state, &zv, cfg) {
        return (next, false);
    }

    // Predict: F = I, so only the covariance grows.
    let predicted = state.covariance + StateMatrix::scaled_identity(cfg.process_noise);
    // Update: H = I, S = P + R, K = P S^-1.
    let r = StateMatrix::from_diagonal(&state.measurement_variance);
    let s = predicted + r;
    let Some(s_inv) = s.inverse_spd() else {
        return (next, false);
    };
    let gain = predicted * s_inv;
    let innovation: StateVector<T> = std::array::from_fn(|i| zv[i] - state.mean[i]);
    let correction = gain.mul_vec(&innovation);
    for i in 0..STATE_DIM {
        next.mean[i] += correction[i];
    }
    renormalize_normal(&mut next.mean);

    // Joseph form keeps the posterior symmetric positive semi-definite.
    let i_minus_k = StateMatrix::identity() - gain;
    let mut posterior = (i_minus_k * predicted * i_minus_k.transpose() + gain * r * gain.transpose()).symmetrized();
    for i in 0..STATE_DIM {
        posterior.0[i][i] = posterior.0[i][i].max(cfg.covariance_floor);
    }
    next.covariance = posterior;
    next.accepted_updates += 1;
    (next, true)
}

fn renormalize_normal<T: Real>(x: &mut StateVector<T>) {
    if let Some(n) = crate::geom3d::Vec3::new(x[9], x[10], x[11]).normalized() {
        x[9] = n.x;
        x[10] = n.y;
        x[11] = n.z;
    }
}

/// Final filter output plus how much of the stream it used.
#[derive(Debug, Clone)]
pub struct EkfEstimate<T: Real> {
    pub estimate: NeedleMeasurement<T>,
    pub accepted_count: usize,
    pub consumed_count: usize,
    pub state: EkfState<T>,
}

/// Runs a fresh filter over a stream of measurements of one stationary needle.
pub fn estimate_needle<T: Real, I>(stream: I, cfg: &EkfConfig<T>) -> Result<EkfEstimate<T>, EstimateError>
where
    I: IntoIterator<Item = NeedleMeasurement<T>>,
{
    cfg.validate()?;
    let mut stream = stream.into_iter();
    let init: Vec<_> = stream.by_ref().take(cfg.init_count).collect();
    let mut state = ekf_initialize(&init, cfg)?;
    while state.accepted_updates < cfg.update_count {
        if state.measurement_count >= cfg.max_measurements {
            return Err(EstimateError::EstimateTimeout {
                consumed: state.measurement_count,
                accepted: state.accepted_updates,
            });
        }
        let Some(z) = stream.next() else {
            // The fewest draws that could still have finished the filter.
            return Err(EstimateError::InsufficientMeasurements {
                got: state.measurement_count,
                needed: state.measurement_count + cfg.update_count - state.accepted_updates,
            });
        };
        state = ekf_update(&state, &z, cfg).0;
    }
    Ok(EkfEstimate {
        estimate: state.estimate()?,
        accepted_count: state.accepted_updates,
        consumed_count: state.measurement_count,
        state,
    })
}
