//! Sampled PI(D) controller with conditional-integration anti-windup.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Output rises when the measurement rises above set-point.
    Direct,
    /// Output rises when the measurement falls below set-point.
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidParams {
    /// Proportional gain, output units per PV unit (always ≥ 0; sign from `direction`).
    pub gain: f64,
    /// s
    pub integral_time: f64,
    /// s
    pub derivative_time: f64,
    pub output_low: f64,
    pub output_high: f64,
    pub direction: Direction,
}

impl PidParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.integral_time > 0.0) {
            return Err(format!("integral time must be > 0, got {}", self.integral_time));
        }
        if !(self.output_low < self.output_high) {
            return Err(format!(
                "output range [{}, {}] is empty",
                self.output_low, self.output_high
            ));
        }
        if !(self.gain >= 0.0) || !self.gain.is_finite() {
            return Err(format!("gain must be finite and ≥ 0, got {}", self.gain));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidState {
    /// Integral contribution, output units.
    pub integral: f64,
    pub previous_pv: Option<f64>,
    pub last_output: f64,
}

impl PidState {
    /// Bumpless start at `output` with zero error.
    pub fn at_output(output: f64, params: &PidParams) -> Self {
        let u = output.clamp(params.output_low, params.output_high);
        Self {
            integral: u,
            previous_pv: None,
            last_output: u,
        }
    }
}

/// One controller sample. While the error pushes the output into a clamp the
/// integral stops at the value that just reaches it (never grows further).
pub fn pid_step(state: &mut PidState, params: &PidParams, setpoint: f64, pv: f64, dt: f64) -> f64 {
    let e = match params.direction {
        Direction::Reverse => setpoint - pv,
        Direction::Direct => pv - setpoint,
    };
    let derivative = match (state.previous_pv, params.derivative_time > 0.0) {
        (Some(prev), true) => {
            let dpv = (pv - prev) / dt;
            let sign = if params.direction == Direction::Reverse { -1.0 } else { 1.0 };
            params.gain * params.derivative_time * sign * dpv
        }
        _ => 0.0,
    };
    let p = params.gain * e;
    let candidate = state.integral + params.gain / params.integral_time * e * dt;
    let raw = p + candidate + derivative;
    let (lo, hi) = (params.output_low, params.output_high);
    let u = if raw > hi && e > 0.0 {
        // integrate only up to the point where the output meets the clamp
        state.integral = state.integral.max(hi - p - derivative);
        hi
    } else if raw < lo && e < 0.0 {
        state.integral = state.integral.min(lo - p - derivative);
        lo
    } else {
        state.integral = candidate;
        raw.clamp(lo, hi)
    };
    state.previous_pv = Some(pv);
    state.last_output = u;
    u
}
