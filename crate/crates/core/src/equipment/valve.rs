//! Throttling valve: `ṁ = Cv·φ(x)·√(Δp·ρ_up)`, isenthalpic, no reverse flow.

use serde::{Deserialize, Serialize};

use crate::h2props::{self, FluidState, PropsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Characteristic {
    Linear,
    /// `R^(x−1)` shifted so that φ(0) = 0.
    EqualPercentage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValveModel {
    /// (kg/s)/√(Pa·kg/m³) at full opening
    pub flow_coefficient: f64,
    pub characteristic: Characteristic,
    pub rangeability: f64,
}

impl ValveModel {
    /// Linear valve passing `mdot` at `dp` with upstream density `rho` when fully open.
    pub fn sized_for(mdot: f64, dp: f64, rho: f64) -> Self {
        Self {
            flow_coefficient: mdot / (dp * rho).sqrt(),
            characteristic: Characteristic::Linear,
            rangeability: 50.0,
        }
    }

    /// Relative flow area φ(opening) ∈ [0, 1].
    #[inline]
    pub fn characteristic_value(&self, opening: f64) -> f64 {
        let x = opening.clamp(0.0, 1.0);
        match self.characteristic {
            Characteristic::Linear => x,
            Characteristic::EqualPercentage => {
                let r = self.rangeability;
                (r.powf(x - 1.0) - 1.0 / r) / (1.0 - 1.0 / r)
            }
        }
    }

    /// Effective conductance `Cv·φ` at `opening`.
    #[inline]
    pub fn conductance(&self, opening: f64) -> f64 {
        self.flow_coefficient * self.characteristic_value(opening)
    }

    /// Δp needed to pass `mdot` at `opening`; infinite when closed.
    #[inline]
    pub fn pressure_drop(&self, opening: f64, mdot: f64, rho: f64) -> f64 {
        if mdot <= 0.0 {
            return 0.0;
        }
        let k = self.conductance(opening);
        if k <= 0.0 {
            return f64::INFINITY;
        }
        let r = mdot / k;
        r * r / rho
    }
}

/// Mass flow through the valve, kg/s.
pub fn valve_flow(model: &ValveModel, opening: f64, upstream: &FluidState, p_down: f64) -> f64 {
    mass_flow(model, opening, upstream.density, upstream.pressure - p_down)
}

#[inline]
pub(crate) fn mass_flow(model: &ValveModel, opening: f64, rho: f64, dp: f64) -> f64 {
    if dp <= 0.0 {
        return 0.0;
    }
    model.conductance(opening) * (dp * rho).sqrt()
}

/// State downstream of the valve: same enthalpy at `p_down`.
pub fn valve_outlet(upstream: &FluidState, p_down: f64) -> Result<FluidState, PropsError> {
    let mut out = h2props::state_ph(p_down, upstream.enthalpy)?;
    // the two-phase lever rule can round the enthalpy by an ulp
    out.enthalpy = upstream.enthalpy;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn upstream() -> FluidState {
        h2props::liquid_state(1.3e5, h2props::sat_point(1.1e5).unwrap().liquid.enthalpy).unwrap()
    }

    #[test]
    fn closed_or_reversed_valve_passes_nothing() {
        let v = ValveModel::sized_for(70.0, 1e4, 70.5);
        let up = upstream();
        assert_eq!(valve_flow(&v, 0.0, &up, 1.1e5), 0.0);
        assert_eq!(valve_flow(&v, 1.0, &up, up.pressure), 0.0);
        assert_eq!(valve_flow(&v, 1.0, &up, up.pressure + 100.0), 0.0);
    }

    #[test]
    fn linear_half_opening_passes_half() {
        let v = ValveModel::sized_for(70.0, 1e4, 70.5);
        let up = upstream();
        let full = valve_flow(&v, 1.0, &up, 1.2e5);
        assert_relative_eq!(valve_flow(&v, 0.5, &up, 1.2e5), 0.5 * full, max_relative = 1e-15);
    }

    #[test]
    fn sizing_round_trip() {
        let v = ValveModel::sized_for(70.0, 1e4, 70.5);
        assert_relative_eq!(mass_flow(&v, 1.0, 70.5, 1e4), 70.0, max_relative = 1e-14);
        assert_relative_eq!(v.pressure_drop(1.0, 70.0, 70.5), 1e4, max_relative = 1e-12);
        assert!(v.pressure_drop(0.0, 1.0, 70.5).is_infinite());
    }

    #[test]
    fn equal_percentage_is_anchored() {
        let v = ValveModel {
            characteristic: Characteristic::EqualPercentage,
            ..ValveModel::sized_for(70.0, 1e4, 70.5)
        };
        assert_eq!(v.characteristic_value(0.0), 0.0);
        assert_relative_eq!(v.characteristic_value(1.0), 1.0);
        assert!(v.characteristic_value(0.5) < 0.5);
    }

    #[test]
    fn outlet_is_isenthalpic() {
        let up = upstream();
        let down = valve_outlet(&up, 1.15e5).unwrap();
        assert_eq!(down.enthalpy, up.enthalpy);
        assert!(down.entropy >= up.entropy);
    }
}
