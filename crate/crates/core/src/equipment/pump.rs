//! Centrifugal pump with a quadratic head curve and homologous scaling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::h2props::{self, FluidState, PropsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpModel {
    /// Hz
    pub ref_speed: f64,
    /// Hz
    pub min_speed: f64,
    /// Hz
    pub max_speed: f64,
    /// m³/h at `ref_speed`
    pub best_point_flow: f64,
    /// Pa at `ref_speed`
    pub best_point_dp: f64,
    /// Shut-off Δp over best-point Δp.
    pub shutoff_head_ratio: f64,
    pub peak_efficiency: f64,
    /// `c` in η = η_peak·(1 − c·(q − 1)²), q = homologous flow ratio.
    pub efficiency_curvature: f64,
    /// Efficiency floor.
    pub min_efficiency: f64,
}

impl Default for PumpModel {
    fn default() -> Self {
        Self {
            ref_speed: 60.0,
            min_speed: 25.0,
            max_speed: 60.0,
            best_point_flow: 3250.0,
            best_point_dp: 2.0e5,
            shutoff_head_ratio: 1.25,
            peak_efficiency: 0.60,
            efficiency_curvature: 0.6,
            min_efficiency: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PumpError {
    #[error("pump speed {speed} Hz outside [{min}, {max}] Hz")]
    SpeedOutOfRange { speed: f64, min: f64, max: f64 },
    #[error("pump flow {0} m³/h is negative")]
    NegativeFlow(f64),
    #[error("pump inlet must be liquid")]
    InletNotLiquid,
    #[error(transparent)]
    Props(#[from] PropsError),
}

impl PumpModel {
    fn check(&self, flow: f64, speed: f64) -> Result<(), PumpError> {
        let slack = 1e-9 * self.max_speed;
        if !(speed >= self.min_speed - slack && speed <= self.max_speed + slack) {
            return Err(PumpError::SpeedOutOfRange {
                speed,
                min: self.min_speed,
                max: self.max_speed,
            });
        }
        if flow < 0.0 {
            return Err(PumpError::NegativeFlow(flow));
        }
        Ok(())
    }

    /// Δp on the curve without range checks; negative beyond run-out.
    #[inline]
    pub(crate) fn curve(&self, flow: f64, speed: f64) -> f64 {
        let r = speed / self.ref_speed;
        let q = flow / self.best_point_flow;
        let s = self.shutoff_head_ratio;
        self.best_point_dp * (s * r * r - (s - 1.0) * q * q)
    }

    #[inline]
    pub(crate) fn efficiency_unchecked(&self, flow: f64, speed: f64) -> (f64, bool) {
        let r = speed / self.ref_speed;
        let q = flow / (self.best_point_flow * r);
        let eta = self.peak_efficiency * (1.0 - self.efficiency_curvature * (q - 1.0).powi(2));
        if eta < self.min_efficiency {
            (self.min_efficiency, true)
        } else {
            (eta, false)
        }
    }

    /// Flow at which Δp reaches zero, m³/h.
    pub fn runout_flow(&self, speed: f64) -> f64 {
        let s = self.shutoff_head_ratio;
        self.best_point_flow * speed / self.ref_speed * (s / (s - 1.0)).sqrt()
    }
}

/// Pressure rise at `flow` m³/h and `speed` Hz, clamped at zero.
pub fn pump_dp(flow: f64, speed: f64, model: &PumpModel) -> Result<f64, PumpError> {
    model.check(flow, speed)?;
    Ok(model.curve(flow, speed).max(0.0))
}

/// Hydraulic efficiency at `flow` m³/h and `speed` Hz.
pub fn pump_efficiency(flow: f64, speed: f64, model: &PumpModel) -> Result<f64, PumpError> {
    model.check(flow, speed)?;
    Ok(model.efficiency_unchecked(flow, speed).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpOutlet {
    pub state: FluidState,
    /// W
    pub shaft_power: f64,
    /// kg/s
    pub mass_flow: f64,
    pub efficiency: f64,
    /// Set when the efficiency curve fell below the floor.
    pub efficiency_floored: bool,
}

/// Outlet state and shaft power. All loss heat stays in the fluid.
pub fn pump_outlet(
    inlet: &FluidState,
    flow: f64,
    speed: f64,
    model: &PumpModel,
) -> Result<PumpOutlet, PumpError> {
    if matches!(inlet.phase, h2props::Phase::Vapor) {
        return Err(PumpError::InletNotLiquid);
    }
    let dp = pump_dp(flow, speed, model)?;
    let (eta, floored) = model.efficiency_unchecked(flow, speed);
    let w = dp / (inlet.density * eta);
    let state = h2props::liquid_state(inlet.pressure + dp, inlet.enthalpy + w)?;
    let mass_flow = flow / 3600.0 * inlet.density;
    Ok(PumpOutlet {
        state,
        shaft_power: mass_flow * w,
        mass_flow,
        efficiency: eta,
        efficiency_floored: floored,
    })
}
