//! Discretized transfer line: friction, advection and wall heat exchange.

use serde::{Deserialize, Serialize};

use crate::h2props::{self, FluidState, PropsError};

const RE_LAMINAR: f64 = 2300.0;
const RE_TURBULENT: f64 = 4000.0;

/// Swamee-Jain explicit Darcy friction factor.
#[inline]
fn swamee_jain(re: f64, rel_roughness: f64) -> f64 {
    let l = (rel_roughness / 3.7 + 5.74 / re.powf(0.9)).log10();
    0.25 / (l * l)
}

/// Darcy friction factor. Laminar `64/Re` below Re 2300, Swamee-Jain above
/// 4000, linear blend in between.
pub fn friction_factor(reynolds: f64, relative_roughness: f64) -> f64 {
    if reynolds <= 0.0 {
        return 0.0;
    }
    if reynolds <= RE_LAMINAR {
        return 64.0 / reynolds;
    }
    if reynolds >= RE_TURBULENT {
        return swamee_jain(reynolds, relative_roughness);
    }
    let w = (reynolds - RE_LAMINAR) / (RE_TURBULENT - RE_LAMINAR);
    (1.0 - w) * 64.0 / RE_LAMINAR + w * swamee_jain(RE_TURBULENT, relative_roughness)
}

/// Pipe geometry, thermal parameters and per-cell state. Holds one of
/// `parallel_count` identical pipes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipeLine {
    /// m
    pub length: f64,
    /// m
    pub internal_diameter: f64,
    /// m
    pub roughness: f64,
    /// W/m
    pub heat_ingress_per_m: f64,
    pub n_cells: usize,
    pub parallel_count: usize,
    /// J/(K·m)
    pub wall_heat_capacity_per_m: f64,
    /// W/(K·m)
    pub wall_conductance_per_m: f64,
    /// J/kg, inlet to outlet
    pub cell_enthalpy: Vec<f64>,
    /// K
    pub wall_temperature: Vec<f64>,
}

impl PipeLine {
    pub fn area(&self) -> f64 {
        0.25 * std::f64::consts::PI * self.internal_diameter * self.internal_diameter
    }

    pub fn cell_length(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    /// Wall heat capacity per metre of a steel tube of `thickness` around this bore.
    pub fn tube_heat_capacity(&self, thickness: f64, density: f64, specific_heat: f64) -> f64 {
        let d_in = self.internal_diameter;
        let d_out = d_in + 2.0 * thickness;
        0.25 * std::f64::consts::PI * (d_out * d_out - d_in * d_in) * density * specific_heat
    }
}

/// Frictional pressure drop of one pipe carrying `mdot_per_pipe`, with fluid
/// properties taken from `state`. Horizontal, no static head.
pub fn pipe_pressure_drop(pipe: &PipeLine, mdot_per_pipe: f64, state: &FluidState) -> f64 {
    pressure_drop(pipe, mdot_per_pipe, state.density, state.viscosity)
}

#[inline]
pub(crate) fn pressure_drop(pipe: &PipeLine, mdot: f64, density: f64, viscosity: f64) -> f64 {
    if mdot <= 0.0 {
        return 0.0;
    }
    let d = pipe.internal_diameter;
    let v = mdot / (density * pipe.area());
    let re = density * v * d / viscosity;
    let f = friction_factor(re, pipe.roughness / d);
    f * pipe.length / d * 0.5 * density * v * v
}

/// Per-cell time derivatives of fluid enthalpy and wall temperature.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipeDerivatives {
    /// J/(kg·s)
    pub enthalpy: Vec<f64>,
    /// K/s
    pub wall_temperature: Vec<f64>,
    /// Wall-to-fluid heat per cell, W.
    pub wall_to_fluid: Vec<f64>,
}

/// Upwind energy balance of every cell. `cell_mass` is the fluid holdup per
/// cell and `fluid_temperature` the cell temperatures.
///
/// Fluid: `M dh/dt = ṁ (h_{i-1} − h_i) + G Δx (T_w − T_f)`.
/// Wall:  `C Δx dT_w/dt = q' Δx − G Δx (T_w − T_f)`.
pub fn pipe_cell_derivatives_into(
    pipe: &PipeLine,
    cell_mass: f64,
    mdot: f64,
    inlet_enthalpy: f64,
    enthalpy: &[f64],
    wall_temperature: &[f64],
    fluid_temperature: &[f64],
    d_enthalpy: &mut [f64],
    d_wall: &mut [f64],
    wall_to_fluid: &mut [f64],
) {
    let dx = pipe.cell_length();
    let g = pipe.wall_conductance_per_m * dx;
    let c = pipe.wall_heat_capacity_per_m * dx;
    let q_in = pipe.heat_ingress_per_m * dx;
    let mut upstream = inlet_enthalpy;
    for i in 0..enthalpy.len() {
        let q = g * (wall_temperature[i] - fluid_temperature[i]);
        wall_to_fluid[i] = q;
        d_enthalpy[i] = (mdot * (upstream - enthalpy[i]) + q) / cell_mass;
        d_wall[i] = (q_in - q) / c;
        upstream = enthalpy[i];
    }
}

/// Allocating wrapper around [`pipe_cell_derivatives_into`] that looks up
/// cell temperatures at a uniform `pressure` and holdup from `density`.
pub fn pipe_cell_derivatives(
    pipe: &PipeLine,
    mdot: f64,
    inlet_enthalpy: f64,
    pressure: f64,
    density: f64,
) -> Result<PipeDerivatives, PropsError> {
    let n = pipe.n_cells;
    let tf = pipe
        .cell_enthalpy
        .iter()
        .map(|&h| h2props::liquid_temperature(pressure, h))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = PipeDerivatives {
        enthalpy: vec![0.0; n],
        wall_temperature: vec![0.0; n],
        wall_to_fluid: vec![0.0; n],
    };
    let cell_mass = density * pipe.area() * pipe.cell_length();
    pipe_cell_derivatives_into(
        pipe,
        cell_mass,
        mdot,
        inlet_enthalpy,
        &pipe.cell_enthalpy,
        &pipe.wall_temperature,
        &tf,
        &mut out.enthalpy,
        &mut out.wall_temperature,
        &mut out.wall_to_fluid,
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn colebrook(re: f64, rr: f64) -> f64 {
        let mut x: f64 = 0.02f64.powf(-0.5);
        for _ in 0..200 {
            x = -2.0 * (rr / 3.7 + 2.51 * x / re).log10();
        }
        1.0 / (x * x)
    }

    fn lh2_pipe(n: usize) -> PipeLine {
        PipeLine {
            length: 1100.0,
            internal_diameter: 0.406,
            roughness: 7e-5,
            heat_ingress_per_m: 8.5,
            n_cells: n,
            parallel_count: 2,
            wall_heat_capacity_per_m: 620.0,
            wall_conductance_per_m: 100.0,
            cell_enthalpy: vec![0.0; n],
            wall_temperature: vec![20.0; n],
        }
    }

    #[test]
    fn smooth_pipe_matches_blasius() {
        let f = friction_factor(1e5, 0.0);
        let blasius = 0.316 * 1e5f64.powf(-0.25);
        assert!((f - 0.0179).abs() < 0.0003, "{f}");
        assert!((f - blasius).abs() / blasius < 0.02);
    }

    #[test]
    fn swamee_jain_tracks_colebrook() {
        for i in 0..=28 {
            let re = 5e3 * 10f64.powf(i as f64 * (8.0 - 3.699) / 28.0);
            for j in 0..=8 {
                let rr = 1e-6 * 10f64.powf(j as f64 * 0.5);
                let (f, c) = (friction_factor(re, rr), colebrook(re, rr));
                assert!((f - c).abs() / c < 0.03, "Re {re} rr {rr}: {f} vs {c}");
            }
        }
    }

    #[test]
    fn friction_grows_with_roughness_and_blends_continuously() {
        let mut prev = 0.0;
        for j in 0..10 {
            let f = friction_factor(1e6, 1e-6 * 3f64.powi(j));
            assert!(f > prev);
            prev = f;
        }
        let below = friction_factor(RE_TURBULENT - 1e-6, 1e-4);
        let above = friction_factor(RE_TURBULENT + 1e-6, 1e-4);
        assert!((below - above).abs() < 1e-6);
        assert_relative_eq!(friction_factor(RE_LAMINAR, 1e-4), 64.0 / RE_LAMINAR);
    }

    #[test]
    fn nominal_pressure_drop() {
        let pipe = lh2_pipe(20);
        let st = h2props::sat_point(1.1e5).unwrap().liquid;
        let mdot = 1625.0 / 3600.0 * st.density;
        let dp = pipe_pressure_drop(&pipe, mdot, &st);
        // hand chain: v = 3.49 m/s, Re ≈ 7.6e6, f ≈ 0.0144
        assert!((dp - 0.157e5).abs() < 0.01e5, "{dp}");
        assert_eq!(pipe_pressure_drop(&pipe, 0.0, &st), 0.0);
        let dp2 = pipe_pressure_drop(&pipe, 2.0 * mdot, &st);
        assert!((dp2 / dp - 4.0).abs() < 0.1);
    }

    #[test]
    fn equilibrium_cells_are_at_rest() {
        let mut pipe = lh2_pipe(5);
        pipe.heat_ingress_per_m = 0.0;
        let sat = h2props::sat_point(1.1e5).unwrap();
        pipe.cell_enthalpy = vec![sat.liquid.enthalpy; 5];
        pipe.wall_temperature = vec![sat.temperature; 5];
        let d = pipe_cell_derivatives(&pipe, 30.0, sat.liquid.enthalpy, 1.1e5, sat.liquid.density).unwrap();
        assert!(d.enthalpy.iter().chain(&d.wall_temperature).all(|v| v.abs() < 1e-12));
    }
}
