//! PI control, SIMC tuning, split-range mapping and step-test identification.

mod identify;
mod pid;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use identify::{fit_fopdt, FitError, StepResponse};
pub use pid::{pid_step, Direction, PidParams, PidState};

/// First-order-plus-dead-time plant `k·e^(−θs)/(τ₁s + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantModel {
    pub gain: f64,
    /// s
    pub time_constant: f64,
    /// s
    pub dead_time: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TuningError {
    #[error("plant gain is zero or not finite ({0})")]
    ZeroGain(f64),
    #[error("closed-loop time constant must be > 0, got {0}")]
    BadClosedLoopTime(f64),
    #[error("plant time constant must be > 0 and dead time ≥ 0 (τ₁={tau}, θ={theta})")]
    BadPlant { tau: f64, theta: f64 },
}

/// SIMC PI settings for `plant` with closed-loop time constant `tau_c`.
///
/// Kc = τ₁/(k(τc+θ)), τI = min(τ₁, 4(τc+θ)). The gain is returned as a
/// magnitude; `direction` follows the sign of k for a reverse-acting loop
/// on a positive-gain plant.
pub fn simc_tune(plant: &PlantModel, tau_c: f64) -> Result<PidParams, TuningError> {
    let k = plant.gain;
    if k == 0.0 || !k.is_finite() {
        return Err(TuningError::ZeroGain(k));
    }
    if !(tau_c > 0.0) {
        return Err(TuningError::BadClosedLoopTime(tau_c));
    }
    if !(plant.time_constant > 0.0 && plant.dead_time >= 0.0) {
        return Err(TuningError::BadPlant {
            tau: plant.time_constant,
            theta: plant.dead_time,
        });
    }
    let horizon = tau_c + plant.dead_time;
    Ok(PidParams {
        gain: plant.time_constant / (k.abs() * horizon),
        integral_time: plant.time_constant.min(4.0 * horizon),
        derivative_time: 0.0,
        output_low: 0.0,
        output_high: 1.0,
        direction: if k > 0.0 {
            Direction::Reverse
        } else {
            Direction::Direct
        },
    })
}

/// [`simc_tune`] for a controller sampled every `dt` with zero-order hold,
/// which adds `dt/2` of effective dead time.
pub fn simc_tune_sampled(plant: &PlantModel, tau_c: f64, dt: f64) -> Result<PidParams, TuningError> {
    let effective = PlantModel {
        dead_time: plant.dead_time + 0.5 * dt,
        ..*plant
    };
    simc_tune(&effective, tau_c)
}

/// One controller output shared by the throttling valve (below the split
/// point) and the pump speed (above it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRangeConfig {
    pub split_point: f64,
    /// Hz
    pub min_speed: f64,
    /// Hz
    pub max_speed: f64,
}

/// `(valve_opening, pump_speed)` for controller output `u`.
pub fn split_range_map(u: f64, config: &SplitRangeConfig) -> (f64, f64) {
    let u = u.clamp(0.0, 1.0);
    let s = config.split_point;
    if u <= s {
        (u / s, config.min_speed)
    } else {
        let frac = (u - s) / (1.0 - s);
        (1.0, config.min_speed + frac * (config.max_speed - config.min_speed))
    }
}
