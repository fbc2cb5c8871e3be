//! Fixed-volume storage tank holding parahydrogen in vapor-liquid equilibrium.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::h2props::{
    self, saturation_row, FluidState, Phase, PropsError, SaturationPoint, P_MAX, P_MIN,
};

const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TankGeometry {
    /// m³
    pub volume: f64,
    /// m²
    pub surface_area: f64,
    /// W/(m²·K)
    pub overall_u: f64,
    /// K
    pub ambient_t: f64,
    /// Pa
    pub max_working_pressure: f64,
}

impl TankGeometry {
    /// Spherical tank of the given volume.
    pub fn sphere(volume: f64, overall_u: f64, ambient_t: f64, max_working_pressure: f64) -> Self {
        Self {
            volume,
            surface_area: sphere_area(volume),
            overall_u,
            ambient_t,
            max_working_pressure,
        }
    }
}

/// Surface area of a sphere enclosing `volume`: (36π)^(1/3)·V^(2/3).
pub fn sphere_area(volume: f64) -> f64 {
    (36.0 * std::f64::consts::PI).cbrt() * volume.powf(2.0 / 3.0)
}

/// Conserved tank inventory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TankState {
    /// kg
    pub total_mass: f64,
    /// J
    pub total_internal_energy: f64,
}

impl TankState {
    /// Saturated tank at `pressure` with `liquid_volume` m³ of liquid.
    pub fn from_saturation(
        pressure: f64,
        liquid_volume: f64,
        geometry: &TankGeometry,
    ) -> Result<Self, PropsError> {
        let sat = h2props::sat_point(pressure)?;
        let m_l = sat.liquid.density * liquid_volume;
        let m_v = sat.vapor.density * (geometry.volume - liquid_volume);
        Ok(Self {
            total_mass: m_l + m_v,
            total_internal_energy: m_l * sat.liquid.internal_energy()
                + m_v * sat.vapor.internal_energy(),
        })
    }
}

/// Intensive view of a flashed tank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TankIntensive {
    pub pressure: f64,
    pub temperature: f64,
    /// Vapor mass fraction (0 or 1 in single-phase fallback).
    pub quality: f64,
    /// m³
    pub liquid_volume: f64,
    pub liquid_level_fraction: f64,
    /// Liquid drawn from the tank: saturated, or the bulk state when single-phase liquid.
    pub liquid: FluidState,
    /// Vapor drawn from the tank: saturated, or the bulk state when single-phase vapor.
    pub vapor: FluidState,
}

impl TankIntensive {
    /// Mass and internal energy implied by this state in a tank of `volume`.
    pub fn reconstruct(&self, volume: f64) -> TankState {
        let v_l = self.liquid_volume;
        let m_l = self.liquid.density * v_l;
        let m_v = self.vapor.density * (volume - v_l);
        TankState {
            total_mass: m_l + m_v,
            total_internal_energy: m_l * self.liquid.internal_energy()
                + m_v * self.vapor.internal_energy(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlashError {
    #[error("invalid tank inventory: mass {mass} kg, volume {volume} m³")]
    InvalidInventory { mass: f64, volume: f64 },
    #[error(
        "no equilibrium state for M={mass} kg, U={energy} J, V={volume} m³ \
         (energy residuals {residual_low} J/kg at P_min, {residual_high} J/kg at P_max)"
    )]
    NoSolution {
        mass: f64,
        energy: f64,
        volume: f64,
        residual_low: f64,
        residual_high: f64,
    },
    #[error(transparent)]
    Props(#[from] PropsError),
}

/// Two-phase energy residual `u_model(P) - u` and its ln(P) derivative,
/// together with the quality at that pressure.
#[inline]
fn two_phase_residual(lnp: f64, v: f64, u: f64) -> (f64, f64, f64) {
    let p = lnp.exp();
    let (s, d) = saturation_row(p);
    let (vl, vv) = (1.0 / s.rho_l, 1.0 / s.rho_v);
    let dvl = -d.rho_l * vl * vl;
    let dvv = -d.rho_v * vv * vv;
    let span = vv - vl;
    let x = (v - vl) / span;
    let dx = (-dvl * span - (v - vl) * (dvv - dvl)) / (span * span);
    let ul = s.h_l - p * vl;
    let uv = s.h_v - p * vv;
    let dul = d.h_l - p * vl - p * dvl;
    let duv = d.h_v - p * vv - p * dvv;
    let r = ul + x * (uv - ul) - u;
    let dr = dul + dx * (uv - ul) + x * (duv - dul);
    (r, dr, x)
}

/// Flash a tank inventory to its equilibrium state.
pub fn tank_flash(state: &TankState, geometry: &TankGeometry) -> Result<TankIntensive, FlashError> {
    tank_flash_from(state, geometry, None)
}

/// As [`tank_flash`], starting the pressure iteration at `pressure_hint`.
pub fn tank_flash_from(
    state: &TankState,
    geometry: &TankGeometry,
    pressure_hint: Option<f64>,
) -> Result<TankIntensive, FlashError> {
    let (m, vol) = (state.total_mass, geometry.volume);
    if !(m > 0.0 && vol > 0.0 && state.total_internal_energy.is_finite()) {
        return Err(FlashError::InvalidInventory {
            mass: m,
            volume: vol,
        });
    }
    let v = vol / m;
    let u = state.total_internal_energy / m;

    let (mut lo, mut hi) = (P_MIN.ln(), P_MAX.ln());
    if let Some(x) = pressure_hint
        .filter(|p| (P_MIN..=P_MAX).contains(p))
        .and_then(|p| newton_from_hint(p.ln(), v, u, lo, hi))
    {
        let sat = h2props::sat_point(x.0.exp())?;
        return Ok(two_phase(&sat, x.1, m, vol));
    }
    let (r_lo, _, _) = two_phase_residual(lo, v, u);
    let (r_hi, _, _) = two_phase_residual(hi, v, u);
    if r_lo > 0.0 || r_hi < 0.0 {
        return single_phase(state, geometry, r_lo, r_hi);
    }

    let mut x = pressure_hint
        .filter(|p| (P_MIN..=P_MAX).contains(p))
        .map_or(0.5 * (lo + hi), f64::ln);
    let mut quality = 0.0;
    for _ in 0..100 {
        let (r, dr, q) = two_phase_residual(x, v, u);
        quality = q;
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let step = r / dr;
        let next = x - step;
        let next = if dr > 0.0 && next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
        let done = (next - x).abs() < 1e-14 || r == 0.0 || hi - lo < 1e-15;
        x = next;
        if done {
            break;
        }
    }
    if !(0.0..=1.0).contains(&quality) {
        return single_phase(state, geometry, r_lo, r_hi);
    }
    let p = x.exp();
    let sat = h2props::sat_point(p)?;
    Ok(two_phase(&sat, quality, m, vol))
}

/// Unbracketed Newton from a nearby pressure; `None` hands over to the
/// bracketed solver. Returns `(ln P, quality)`.
fn newton_from_hint(mut x: f64, v: f64, u: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    for _ in 0..8 {
        let (r, dr, q) = two_phase_residual(x, v, u);
        if !(dr > 0.0) || !r.is_finite() {
            return None;
        }
        let next = x - r / dr;
        if !(next > lo && next < hi) {
            return None;
        }
        if (next - x).abs() < 1e-14 || r == 0.0 {
            return (0.0..=1.0).contains(&q).then_some((next, q));
        }
        x = next;
    }
    None
}

fn two_phase(sat: &SaturationPoint, quality: f64, m: f64, vol: f64) -> TankIntensive {
    let liquid_volume = m * (1.0 - quality) / sat.liquid.density;
    TankIntensive {
        pressure: sat.pressure,
        temperature: sat.temperature,
        quality,
        liquid_volume,
        liquid_level_fraction: liquid_volume / vol,
        liquid: sat.liquid,
        vapor: sat.vapor,
    }
}

/// Single-phase fallback: solve `(P, h)` so that density and internal energy
/// match the inventory. Newton on `(ln P, h)` with finite-difference Jacobian.
fn single_phase(
    state: &TankState,
    geometry: &TankGeometry,
    residual_low: f64,
    residual_high: f64,
) -> Result<TankIntensive, FlashError> {
    let (m, vol) = (state.total_mass, geometry.volume);
    let rho = m / vol;
    let u = state.total_internal_energy / m;
    let fail = || FlashError::NoSolution {
        mass: m,
        energy: state.total_internal_energy,
        volume: vol,
        residual_low,
        residual_high,
    };
    // liquid side when the inventory is denser than the critical-ish midpoint
    let liquid = residual_low > 0.0 || rho > 30.0;
    let eval = |lnp: f64, h: f64| -> Option<(f64, f64, FluidState)> {
        let p = lnp.exp();
        let st = h2props::state_ph(p, h).ok()?;
        let is_liquid = matches!(st.phase, Phase::Liquid);
        if is_liquid != liquid {
            return None;
        }
        Some(((st.density - rho) / rho, (st.internal_energy() - u) / 1e3, st))
    };
    let mut lnp = if liquid { (2e5f64).ln() } else { (1e5f64).ln() };
    let mut h = u + lnp.exp() / rho;
    for _ in 0..60 {
        let (f1, f2, st) = eval(lnp, h).ok_or_else(fail)?;
        if f1.abs() < 1e-12 && f2.abs() < 1e-12 {
            let sat = h2props::sat_point(st.pressure)?;
            let (liquid_state, vapor_state, q, vl) = if liquid {
                (st, sat.vapor, 0.0, vol)
            } else {
                (sat.liquid, st, 1.0, 0.0)
            };
            return Ok(TankIntensive {
                pressure: st.pressure,
                temperature: st.temperature,
                quality: q,
                liquid_volume: vl,
                liquid_level_fraction: vl / vol,
                liquid: liquid_state,
                vapor: vapor_state,
            });
        }
        let (ep, eh) = (1e-7, 1e-3 * (1.0 + h.abs() * 1e-3));
        let (a1, a2, _) = eval(lnp + ep, h).ok_or_else(fail)?;
        let (b1, b2, _) = eval(lnp, h + eh).ok_or_else(fail)?;
        let j = [[(a1 - f1) / ep, (b1 - f1) / eh], [(a2 - f2) / ep, (b2 - f2) / eh]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(fail());
        }
        let dlnp = (f1 * j[1][1] - f2 * j[0][1]) / det;
        let dh = (f2 * j[0][0] - f1 * j[1][0]) / det;
        lnp -= dlnp.clamp(-0.5, 0.5);
        h -= dh;
        lnp = lnp.clamp(P_MIN.ln(), P_MAX.ln());
    }
    Err(fail())
}

/// Liquid or vapor stream entering a tank.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stream {
    /// kg/s
    pub mass_flow: f64,
    /// J/kg
    pub enthalpy: f64,
}

/// All flows crossing a tank boundary. Outflows leave at the tank's
/// liquid/vapor enthalpy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TankFlows {
    pub liquid_in: Stream,
    /// kg/s
    pub liquid_out: f64,
    pub vapor_in: Stream,
    /// kg/s
    pub vapor_out: f64,
    /// W
    pub heat_ingress: f64,
}

/// `(dM/dt, dU/dt)` for a tank in state `intensive`.
pub fn tank_derivatives(intensive: &TankIntensive, flows: &TankFlows) -> (f64, f64) {
    let dm = flows.liquid_in.mass_flow + flows.vapor_in.mass_flow
        - flows.liquid_out
        - flows.vapor_out;
    let du = flows.liquid_in.mass_flow * flows.liquid_in.enthalpy
        + flows.vapor_in.mass_flow * flows.vapor_in.enthalpy
        - flows.liquid_out * intensive.liquid.enthalpy
        - flows.vapor_out * intensive.vapor.enthalpy
        + flows.heat_ingress;
    (dm, du)
}

/// Heat ingress through the tank wall, W.
pub fn tank_heat_ingress(geometry: &TankGeometry, fluid_t: f64) -> f64 {
    (geometry.ambient_t - fluid_t) * geometry.surface_area * geometry.overall_u
}

/// Boil-off rate of a tank filled to `1 - ullage` with saturated liquid,
/// in percent of the liquid mass per day.
pub fn boil_off_rate(geometry: &TankGeometry, heat: f64, sat: &SaturationPoint, ullage: f64) -> f64 {
    let liquid_mass = sat.liquid.density * geometry.volume * (1.0 - ullage);
    heat / (liquid_mass * sat.heat_of_vaporization()) * SECONDS_PER_DAY * 100.0
}

/// Overall heat-transfer coefficient that yields `bor` %/day (inverse of
/// [`tank_heat_ingress`] followed by [`boil_off_rate`]).
pub fn overall_u_for_bor(geometry: &TankGeometry, bor: f64, sat: &SaturationPoint, ullage: f64) -> f64 {
    let liquid_mass = sat.liquid.density * geometry.volume * (1.0 - ullage);
    let heat = bor / 100.0 / SECONDS_PER_DAY * liquid_mass * sat.heat_of_vaporization();
    heat / ((geometry.ambient_t - sat.temperature) * geometry.surface_area)
}
