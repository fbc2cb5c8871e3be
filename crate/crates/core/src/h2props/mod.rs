//! Parahydrogen properties from embedded tables.
//!
//! Covers saturation between 0.1 and 10 bara, subcooled/compressed liquid
//! down to 14.2 K and superheated vapor up to 45 K. Enthalpy and entropy are
//! zero for saturated liquid at the normal boiling point.
//!
//! All functions are pure; the tables are parsed once on first use and are
//! immutable afterwards.

mod interp;
mod tables;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub(crate) use tables::{SatRow, SatSlope};
use tables::{tables, T_VAPOR_MAX};

/// Lowest tabulated pressure, Pa.
pub const P_MIN: f64 = 1.0e4;
/// Highest tabulated pressure, Pa.
pub const P_MAX: f64 = 1.0e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropsError {
    #[error("pressure {pressure} Pa is below the table minimum {min} Pa")]
    PressureBelowRange { pressure: f64, min: f64 },
    #[error("pressure {pressure} Pa is above the table maximum {max} Pa")]
    PressureAboveRange { pressure: f64, max: f64 },
    #[error("pressure {0} is not a finite number")]
    PressureNotFinite(f64),
    #[error("temperature {temperature} K is outside the saturation range [{min}, {max}] K")]
    TemperatureOutOfRange { temperature: f64, min: f64, max: f64 },
    #[error("enthalpy {enthalpy} J/kg at {pressure} Pa is above saturated vapor ({h_vapor} J/kg)")]
    NotLiquid {
        pressure: f64,
        enthalpy: f64,
        h_vapor: f64,
    },
    #[error("enthalpy {enthalpy} J/kg at {pressure} Pa is colder than the liquid table ({h_min} J/kg)")]
    EnthalpyBelowRange {
        pressure: f64,
        enthalpy: f64,
        h_min: f64,
    },
    #[error("temperature {temperature} K is below saturation ({t_sat} K) at {pressure} Pa")]
    BelowSaturation {
        pressure: f64,
        temperature: f64,
        t_sat: f64,
    },
    #[error("temperature {temperature} K is above saturation ({t_sat} K) at {pressure} Pa")]
    AboveSaturation {
        pressure: f64,
        temperature: f64,
        t_sat: f64,
    },
    #[error("temperature {temperature} K is outside the single-phase table ({min}..{max} K) at {pressure} Pa")]
    TemperatureBeyondTable {
        pressure: f64,
        temperature: f64,
        min: f64,
        max: f64,
    },
}

pub type PropsResult<T> = Result<T, PropsError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Phase {
    Liquid,
    /// On or inside the dome; `quality` is the vapor mass fraction.
    Saturated { quality: f64 },
    Vapor,
}

/// Thermodynamic state of parahydrogen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidState {
    /// Pa
    pub pressure: f64,
    /// K
    pub temperature: f64,
    /// kg/m³
    pub density: f64,
    /// J/kg
    pub enthalpy: f64,
    /// J/(kg·K)
    pub entropy: f64,
    /// Pa·s
    pub viscosity: f64,
    pub phase: Phase,
}

impl FluidState {
    /// Vapor mass fraction, `None` for single-phase states.
    pub fn quality(&self) -> Option<f64> {
        match self.phase {
            Phase::Saturated { quality } => Some(quality),
            _ => None,
        }
    }

    /// Specific internal energy, J/kg.
    pub fn internal_energy(&self) -> f64 {
        self.enthalpy - self.pressure / self.density
    }
}

/// Saturated liquid and vapor at one pressure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationPoint {
    pub pressure: f64,
    pub temperature: f64,
    pub liquid: FluidState,
    pub vapor: FluidState,
}

impl SaturationPoint {
    /// Heat of vaporization, J/kg.
    pub fn heat_of_vaporization(&self) -> f64 {
        self.vapor.enthalpy - self.liquid.enthalpy
    }
}

fn check_pressure(p: f64) -> PropsResult<()> {
    if !p.is_finite() {
        return Err(PropsError::PressureNotFinite(p));
    }
    // a hair of slack so that round-tripped endpoint values stay valid
    if p < P_MIN * (1.0 - 1e-12) {
        return Err(PropsError::PressureBelowRange {
            pressure: p,
            min: P_MIN,
        });
    }
    if p > P_MAX * (1.0 + 1e-12) {
        return Err(PropsError::PressureAboveRange {
            pressure: p,
            max: P_MAX,
        });
    }
    Ok(())
}

/// Saturated row plus ln(P) slopes, unchecked. Used by the tank flash.
pub(crate) fn saturation_row(p: f64) -> (SatSlope, SatSlope) {
    tables().sat.eval_with_slope(p)
}

pub(crate) fn saturation_row_checked(p: f64) -> PropsResult<SatRow> {
    check_pressure(p)?;
    Ok(tables().sat.eval(p))
}

/// Saturation temperature at `pressure`, K.
pub fn sat_temperature(pressure: f64) -> PropsResult<f64> {
    check_pressure(pressure)?;
    Ok(tables().sat.temperature(pressure).0)
}

/// Saturation pressure at `temperature`, Pa (inverse of [`sat_temperature`]).
pub fn sat_pressure(temperature: f64) -> PropsResult<f64> {
    let sat = &tables().sat;
    let (t_min, t_max) = sat.t_range();
    if !(t_min..=t_max).contains(&temperature) {
        return Err(PropsError::TemperatureOutOfRange {
            temperature,
            min: t_min,
            max: t_max,
        });
    }
    let (mut lo, mut hi) = (sat.p_min().ln(), sat.p_max().ln());
    // Newton in ln(P), falling back to bisection when a step leaves the bracket.
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (t, dt) = sat.temperature(x.exp());
        let r = t - temperature;
        if r.abs() < 1e-13 * temperature {
            break;
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let step = x - r / dt;
        x = if dt > 0.0 && step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(x.exp().clamp(sat.p_min(), sat.p_max()))
}

fn saturated_liquid(p: f64, s: &SatRow) -> FluidState {
    FluidState {
        pressure: p,
        temperature: s.t,
        density: s.rho_l,
        enthalpy: s.h_l,
        entropy: s.s_l,
        viscosity: s.mu_l,
        phase: Phase::Saturated { quality: 0.0 },
    }
}

fn saturated_vapor(p: f64, s: &SatRow) -> FluidState {
    FluidState {
        pressure: p,
        temperature: s.t,
        density: s.rho_v,
        enthalpy: s.h_v,
        entropy: s.s_v,
        viscosity: s.mu_v,
        phase: Phase::Saturated { quality: 1.0 },
    }
}

/// Two-phase mixture at quality `x`.
fn mixture(p: f64, s: &SatRow, x: f64) -> FluidState {
    let v = (1.0 - x) / s.rho_l + x / s.rho_v;
    FluidState {
        pressure: p,
        temperature: s.t,
        density: 1.0 / v,
        enthalpy: s.h_l + x * (s.h_v - s.h_l),
        entropy: s.s_l + x * (s.s_v - s.s_l),
        // McAdams mixing rule
        viscosity: 1.0 / (x / s.mu_v + (1.0 - x) / s.mu_l),
        phase: Phase::Saturated { quality: x },
    }
}

/// Consistent saturated liquid and vapor states at `pressure`.
pub fn sat_point(pressure: f64) -> PropsResult<SaturationPoint> {
    let s = saturation_row_checked(pressure)?;
    Ok(SaturationPoint {
        pressure,
        temperature: s.t,
        liquid: saturated_liquid(pressure, &s),
        vapor: saturated_vapor(pressure, &s),
    })
}

/// Two-phase state at `(pressure, quality)`.
pub fn saturated_state(pressure: f64, quality: f64) -> PropsResult<FluidState> {
    let s = saturation_row_checked(pressure)?;
    Ok(mixture(pressure, &s, quality.clamp(0.0, 1.0)))
}

fn subcooled(p: f64, s: &SatRow, xi: f64, h: f64) -> FluidState {
    let [dt, drho, ds, dmu] = tables().liquid.eval(p, xi);
    FluidState {
        pressure: p,
        temperature: s.t + dt,
        density: s.rho_l + drho,
        enthalpy: h,
        entropy: s.s_l + ds,
        viscosity: s.mu_l + dmu,
        phase: Phase::Liquid,
    }
}

/// Liquid (or two-phase, above saturated-liquid enthalpy) state at `(P, h)`.
pub fn liquid_state(pressure: f64, enthalpy: f64) -> PropsResult<FluidState> {
    let s = saturation_row_checked(pressure)?;
    if enthalpy > s.h_v {
        return Err(PropsError::NotLiquid {
            pressure,
            enthalpy,
            h_vapor: s.h_v,
        });
    }
    if enthalpy >= s.h_l {
        let x = (enthalpy - s.h_l) / (s.h_v - s.h_l);
        return Ok(mixture(pressure, &s, x));
    }
    let h_lo = tables().liquid.scalar(pressure);
    let xi = (enthalpy - h_lo) / (s.h_l - h_lo);
    if xi < 0.0 {
        return Err(PropsError::EnthalpyBelowRange {
            pressure,
            enthalpy,
            h_min: h_lo,
        });
    }
    Ok(subcooled(pressure, &s, xi, enthalpy))
}

/// Temperature of liquid or two-phase fluid at `(P, h)`; cheaper than
/// [`liquid_state`] when only `T` is needed.
pub fn liquid_temperature(pressure: f64, enthalpy: f64) -> PropsResult<f64> {
    check_pressure(pressure)?;
    let v = pressure.ln();
    let (t_sat, h_l, h_v) = tables().sat.thermal_ln(v);
    if enthalpy > h_v {
        return Err(PropsError::NotLiquid {
            pressure,
            enthalpy,
            h_vapor: h_v,
        });
    }
    if enthalpy >= h_l {
        return Ok(t_sat);
    }
    let liquid = &tables().liquid;
    let h_lo = liquid.scalar_ln(v);
    let xi = (enthalpy - h_lo) / (h_l - h_lo);
    if xi < 0.0 {
        return Err(PropsError::EnthalpyBelowRange {
            pressure,
            enthalpy,
            h_min: h_lo,
        });
    }
    Ok(t_sat + liquid.eval_col_ln(v, xi, 0))
}

/// Liquid state at `(P, T)` with `T` at or below saturation.
pub fn liquid_state_pt(pressure: f64, temperature: f64) -> PropsResult<FluidState> {
    let s = saturation_row_checked(pressure)?;
    if temperature > s.t * (1.0 + 1e-12) {
        return Err(PropsError::AboveSaturation {
            pressure,
            temperature,
            t_sat: s.t,
        });
    }
    if temperature >= s.t {
        return Ok(saturated_liquid(pressure, &s));
    }
    let liquid = &tables().liquid;
    let t_at = |xi: f64| s.t + liquid.eval(pressure, xi)[0];
    let t_lo = t_at(0.0);
    if temperature < t_lo {
        return Err(PropsError::TemperatureBeyondTable {
            pressure,
            temperature,
            min: t_lo,
            max: s.t,
        });
    }
    let xi = solve_monotone(|xi| t_at(xi) - temperature, 0.0, 1.0, 1e-12 * temperature);
    let h_lo = liquid.scalar(pressure);
    let h = h_lo + xi * (s.h_l - h_lo);
    Ok(subcooled(pressure, &s, xi, h))
}

fn superheated(p: f64, s: &SatRow, theta: f64) -> FluidState {
    let [rho, dh, ds, mu] = tables().vapor.eval(p, theta);
    FluidState {
        pressure: p,
        temperature: s.t + theta * (T_VAPOR_MAX - s.t),
        density: rho,
        enthalpy: s.h_v + dh,
        entropy: s.s_v + ds,
        viscosity: mu,
        phase: Phase::Vapor,
    }
}

/// Superheated (or saturated) vapor at `(P, T)`.
pub fn vapor_state(pressure: f64, temperature: f64) -> PropsResult<FluidState> {
    let s = saturation_row_checked(pressure)?;
    if temperature < s.t * (1.0 - 1e-12) {
        return Err(PropsError::BelowSaturation {
            pressure,
            temperature,
            t_sat: s.t,
        });
    }
    if temperature > T_VAPOR_MAX {
        return Err(PropsError::TemperatureBeyondTable {
            pressure,
            temperature,
            min: s.t,
            max: T_VAPOR_MAX,
        });
    }
    if temperature <= s.t {
        return Ok(saturated_vapor(pressure, &s));
    }
    let theta = (temperature - s.t) / (T_VAPOR_MAX - s.t);
    Ok(superheated(pressure, &s, theta))
}

/// State at `(P, h)` in any phase covered by the tables.
pub fn state_ph(pressure: f64, enthalpy: f64) -> PropsResult<FluidState> {
    let s = saturation_row_checked(pressure)?;
    if enthalpy <= s.h_v {
        return liquid_state(pressure, enthalpy);
    }
    let vapor = &tables().vapor;
    let dh_at = |theta: f64| vapor.eval(pressure, theta)[1];
    let dh_max = dh_at(1.0);
    let target = enthalpy - s.h_v;
    if target > dh_max {
        return Err(PropsError::TemperatureBeyondTable {
            pressure,
            temperature: f64::NAN,
            min: s.t,
            max: T_VAPOR_MAX,
        });
    }
    let theta = solve_monotone(|th| dh_at(th) - target, 0.0, 1.0, 1e-9);
    let mut st = superheated(pressure, &s, theta);
    st.enthalpy = enthalpy;
    Ok(st)
}

/// Root of an increasing function on `[lo, hi]` (Illinois false position).
pub(crate) fn solve_monotone(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo >= 0.0 {
        return lo;
    }
    if f_hi <= 0.0 {
        return hi;
    }
    let mut side = 0i8;
    let mut x = lo;
    for _ in 0..200 {
        x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx.abs() <= tol || hi - lo <= 1e-15 * (1.0 + x.abs()) {
            return x;
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    x
}

/// Dump the saturation table nodes as CSV for auditing.
///
/// Columns: `P,T_sat,rho_l,rho_v,h_l,h_v,s_l,s_v` in SI units.
pub fn write_saturation_csv<W: Write>(mut w: W) -> io::Result<()> {
    writeln!(w, "P,T_sat,rho_l,rho_v,h_l,h_v,s_l,s_v")?;
    let sat = &tables().sat;
    for &p in sat.pressures() {
        let s = sat.eval(p);
        writeln!(
            w,
            "{p},{},{},{},{},{},{},{}",
            s.t, s.rho_l, s.rho_v, s.h_l, s.h_v, s.s_l, s.s_v
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn anchors_at_1p1_bara() {
        let sat = sat_point(1.10e5).unwrap();
        assert_relative_eq!(sat.temperature, 20.55, max_relative = 2e-3);
        assert_relative_eq!(sat.liquid.density, 70.505, max_relative = 2e-3);
        assert_relative_eq!(sat.heat_of_vaporization(), 444.7e3, max_relative = 2e-3);
    }

    #[test]
    fn normal_boiling_point() {
        let t = sat_temperature(1.013e5).unwrap();
        assert!((t - 20.3).abs() < 0.05, "{t}");
        let sat = sat_point(1.013e5).unwrap();
        assert!((sat.vapor.density - 1.3).abs() < 0.1);
        // datum
        let nbp = sat_point(101_325.0).unwrap();
        assert!(nbp.liquid.enthalpy.abs() < 1e-3);
        assert!(nbp.liquid.entropy.abs() < 1e-6);
    }

    #[test]
    fn out_of_range_pressures_are_rejected() {
        assert!(matches!(
            sat_temperature(5e3),
            Err(PropsError::PressureBelowRange { .. })
        ));
        assert!(matches!(
            sat_temperature(2e6),
            Err(PropsError::PressureAboveRange { .. })
        ));
        assert!(matches!(
            sat_point(f64::NAN),
            Err(PropsError::PressureNotFinite(_))
        ));
    }

    #[test]
    fn sat_pressure_inverts_sat_temperature() {
        for &p in &[1.0e4, 3.3e4, 1.1e5, 4.7e5, 1.0e6] {
            let t = sat_temperature(p).unwrap();
            let back = sat_pressure(t).unwrap();
            assert_relative_eq!(back, p, max_relative = 1e-10);
        }
    }

    #[test]
    fn liquid_state_boundaries() {
        let sat = sat_point(1.1e5).unwrap();
        let st = liquid_state(1.1e5, sat.liquid.enthalpy).unwrap();
        assert_eq!(st.quality(), Some(0.0));
        assert_relative_eq!(st.temperature, sat.temperature);

        let half = liquid_state(1.1e5, sat.liquid.enthalpy + 0.5 * sat.heat_of_vaporization()).unwrap();
        assert_relative_eq!(half.quality().unwrap(), 0.5, max_relative = 1e-12);

        let compressed = liquid_state(3.1e5, sat.liquid.enthalpy).unwrap();
        assert_eq!(compressed.phase, Phase::Liquid);
        // isenthalpic compression cools the liquid: dT = -v(1 - beta T) dP / cp
        let drop = sat.temperature - compressed.temperature;
        assert!((0.1..0.3).contains(&drop), "isenthalpic temperature change {drop}");

        assert!(matches!(
            liquid_state(1.1e5, sat.vapor.enthalpy + 1.0),
            Err(PropsError::NotLiquid { .. })
        ));
        assert!(matches!(
            liquid_state(1.1e5, -1e6),
            Err(PropsError::EnthalpyBelowRange { .. })
        ));
    }

    #[test]
    fn fast_temperature_matches_full_state() {
        for &(p, dh) in &[(1.1e5, -3000.0), (3.0e5, -500.0), (2.0e5, 100.0)] {
            let h = sat_point(1.1e5).unwrap().liquid.enthalpy + dh;
            let full = liquid_state(p, h).unwrap().temperature;
            assert_eq!(liquid_temperature(p, h).unwrap(), full);
        }
    }

    #[test]
    fn vapor_state_boundaries() {
        let sat = sat_point(1.1e5).unwrap();
        let v = vapor_state(1.1e5, sat.temperature).unwrap();
        assert_relative_eq!(v.density, sat.vapor.density);
        assert_relative_eq!(v.enthalpy, sat.vapor.enthalpy);
        assert!(vapor_state(1.1e5, sat.temperature - 0.1).is_err());
        assert!(vapor_state(1.1e5, 50.0).is_err());
        let nbp = vapor_state(1.013e5, 20.3).unwrap();
        assert!((nbp.density - 1.3).abs() < 0.1);
    }

    #[test]
    fn state_ph_covers_superheat() {
        let v = vapor_state(1.2e5, 30.0).unwrap();
        let back = state_ph(1.2e5, v.enthalpy).unwrap();
        assert_relative_eq!(back.temperature, 30.0, max_relative = 1e-8);
    }

    #[test]
    fn audit_dump_has_header_and_rows() {
        let mut buf = Vec::new();
        write_saturation_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "P,T_sat,rho_l,rho_v,h_l,h_v,s_l,s_v");
        assert_eq!(lines.count(), 401);
    }
}
