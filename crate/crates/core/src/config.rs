//! Scenario configuration: TOML schema, defaults for the nominal case,
//! validation and `section.key=value` overrides.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::control::PlantModel;
use crate::equipment::{Characteristic, PumpModel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub onshore_tank: OnshoreTankConfig,
    pub seaborne_tank: SeaborneTankConfig,
    pub pump: PumpModel,
    pub lh2_pipe: PipeConfig,
    pub vapor_pipe: PipeConfig,
    pub valves: ValveConfig,
    pub control: ControlConfig,
    pub exergy: ExergyConfig,
    pub kpi: KpiConfig,
    pub run: RunConfig,
    pub ugsa: UgsaConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            onshore_tank: OnshoreTankConfig::default(),
            seaborne_tank: SeaborneTankConfig::default(),
            pump: PumpModel::default(),
            lh2_pipe: PipeConfig::lh2(),
            vapor_pipe: PipeConfig::vapor(),
            valves: ValveConfig::default(),
            control: ControlConfig::default(),
            exergy: ExergyConfig::default(),
            kpi: KpiConfig::default(),
            run: RunConfig::default(),
            ugsa: UgsaConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OnshoreTankConfig {
    /// m³
    pub volume: f64,
    /// Liquid volume fraction at t = 0.
    pub initial_fill: f64,
    /// bara; PC1 set-point and initial pressure
    pub pressure_setpoint: f64,
    /// W/(m²·K)
    pub overall_u: f64,
    /// K
    pub ambient_t: f64,
}

impl Default for OnshoreTankConfig {
    fn default() -> Self {
        Self {
            volume: 50_000.0,
            initial_fill: 0.90,
            pressure_setpoint: 1.10,
            overall_u: 0.0044,
            ambient_t: 298.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeaborneTankConfig {
    /// m³
    pub volume: f64,
    pub initial_fill: f64,
    /// Liquid volume fraction at which loading stops.
    pub stop_fill: f64,
    /// bara; PC2 set-point and initial pressure
    pub max_pressure: f64,
    /// W/(m²·K)
    pub overall_u: f64,
    /// K
    pub ambient_t: f64,
}

impl Default for SeaborneTankConfig {
    fn default() -> Self {
        Self {
            volume: 45_000.0,
            initial_fill: 0.011,
            stop_fill: 0.90,
            max_pressure: 1.15,
            overall_u: 0.0044,
            ambient_t: 298.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipeConfig {
    /// m
    pub length: f64,
    /// m
    pub internal_diameter: f64,
    /// m
    pub roughness: f64,
    /// W/m per pipe
    pub heat_ingress: f64,
    pub n_cells: usize,
    pub parallel_count: usize,
    /// m, stainless inner tube
    pub wall_thickness: f64,
    /// kg/m³
    pub wall_density: f64,
    /// J/(kg·K) at LH₂ temperature
    pub wall_specific_heat: f64,
    /// W/(K·m)
    pub wall_conductance: f64,
    /// K
    pub initial_wall_temperature: f64,
}

impl PipeConfig {
    pub fn lh2() -> Self {
        Self {
            length: 1100.0,
            internal_diameter: 0.406,
            roughness: 0.07e-3,
            heat_ingress: 8.5,
            n_cells: 20,
            parallel_count: 2,
            wall_thickness: 0.006,
            wall_density: 7900.0,
            wall_specific_heat: 10.0,
            wall_conductance: 100.0,
            initial_wall_temperature: 20.0,
        }
    }

    pub fn vapor() -> Self {
        Self {
            internal_diameter: 18.0 * 0.0254,
            heat_ingress: 1.0,
            n_cells: 1,
            ..Self::lh2()
        }
    }
}

impl Default for PipeConfig {
    fn default() -> Self {
        Self::lh2()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValveConfig {
    /// Throttling valve: full-open Δp (bar) at `throttle_ref_flow`.
    pub throttle_full_open_dp: f64,
    /// m³/h of saturated liquid at the onshore set-point
    pub throttle_ref_flow: f64,
    pub throttle_characteristic: Characteristic,
    pub rangeability: f64,
    /// Vapor-return valve: kg/s passed fully open at `vapor_return_ref_dp`.
    pub vapor_return_ref_flow: f64,
    /// bar, with vapor at the seaborne max pressure
    pub vapor_return_ref_dp: f64,
    /// BOG valve: kg/s passed fully open at `bog_ref_dp`.
    pub bog_ref_flow: f64,
    /// bar, with vapor at the onshore set-point
    pub bog_ref_dp: f64,
    /// bara
    pub liquefier_pressure: f64,
}

impl Default for ValveConfig {
    fn default() -> Self {
        Self {
            throttle_full_open_dp: 0.015,
            throttle_ref_flow: 3585.0,
            throttle_characteristic: Characteristic::Linear,
            rangeability: 50.0,
            vapor_return_ref_flow: 3.0,
            vapor_return_ref_dp: 0.025,
            bog_ref_flow: 2.0,
            bog_ref_dp: 0.07,
            liquefier_pressure: 1.03,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PumpMode {
    SplitRange,
    FixedSpeed,
}

impl fmt::Display for PumpMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PumpMode::SplitRange => "split-range",
            PumpMode::FixedSpeed => "fixed-speed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlConfig {
    pub mode: PumpMode,
    /// m³/h
    pub flow_setpoint: f64,
    pub split_point: f64,
    /// Controller sample time, s.
    pub sample_time: f64,
    /// Closed-loop time constants, s; 0 selects τc = θ.
    pub fc_tau_c: f64,
    pub pc1_tau_c: f64,
    pub pc2_tau_c: f64,
    /// Identified plants (see `tune`). FC in m³/h per unit controller output,
    /// pressure loops in bar per unit valve opening.
    pub fc_split_range_plant: PlantModel,
    pub fc_fixed_speed_plant: PlantModel,
    pub pc1_plant: PlantModel,
    pub pc2_plant: PlantModel,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            mode: PumpMode::SplitRange,
            flow_setpoint: 3250.0,
            split_point: 0.5,
            sample_time: 1.0,
            fc_tau_c: 0.0,
            pc1_tau_c: 0.0,
            pc2_tau_c: 0.0,
            fc_split_range_plant: PlantModel {
                gain: 7593.0,
                time_constant: 0.1,
                dead_time: 0.0,
            },
            fc_fixed_speed_plant: PlantModel {
                gain: 47088.0,
                time_constant: 0.1,
                dead_time: 0.0,
            },
            pc1_plant: PlantModel {
                gain: -0.1571,
                time_constant: 16934.0,
                dead_time: 0.0,
            },
            pc2_plant: PlantModel {
                gain: -0.1418,
                time_constant: 1690.0,
                dead_time: 0.075,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExergyConfig {
    /// Reference temperature, K.
    pub t0: f64,
}

impl Default for ExergyConfig {
    fn default() -> Self {
        Self { t0: 298.15 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KpiConfig {
    /// Tonnes transferred per tank (relative-BOG denominator).
    pub transferred_mass: f64,
    /// m³ transferred per tank (relative-power denominator).
    pub transferred_volume: f64,
}

impl Default for KpiConfig {
    fn default() -> Self {
        Self {
            transferred_mass: 2812.0,
            transferred_volume: 40_000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub rtol: f64,
    /// s
    pub max_step: f64,
    /// Recording interval, s; must divide the controller sample time.
    pub comm_interval: f64,
    /// h
    pub time_limit: f64,
    /// Compute state points and entropy rates at every record.
    pub record_entropy: bool,
    pub method: Method,
}

/// Embedded explicit Runge–Kutta pair used between controller samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Bogacki–Shampine 3(2), four stages.
    Bs3,
    /// Dormand–Prince 5(4), seven stages.
    Dopri5,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            max_step: 5.0,
            comm_interval: 1.0,
            time_limit: 30.0,
            record_entropy: true,
            method: Method::Bs3,
        }
    }
}

/// One uncertain input, uniform on `[low, high]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterRange {
    pub name: String,
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UgsaConfig {
    pub samples: usize,
    pub seed: u64,
    pub resamples: usize,
    pub histogram_bins: usize,
    pub parameters: Vec<ParameterRange>,
}

impl Default for UgsaConfig {
    fn default() -> Self {
        let p = |name: &str, low, high| ParameterRange {
            name: name.to_string(),
            low,
            high,
        };
        Self {
            samples: 1000,
            seed: 20_240_601,
            resamples: 100,
            histogram_bins: 50,
            parameters: vec![
                p("pump_efficiency", 0.50, 0.70),
                p("pipe_heat_ingress", 5.5, 12.0),
                p("pipe_roughness", 0.04e-3, 0.15e-3),
                p("flow_setpoint", 2560.0, 3585.0),
                p("onshore_bor", 0.045, 0.123),
                p("seaborne_bor", 0.046, 0.127),
            ],
        }
    }
}

/// A field-level validation failure.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("bad override `{0}`: expected section.key=value")]
    Override(String),
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<FieldError>),
}

impl ScenarioConfig {
    /// Parse TOML text, apply overrides, validate.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let user: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        // partial nested tables (from the file or `--set`) fill in over the defaults
        let mut table = toml::Table::try_from(Self::default()).expect("defaults serialize");
        merge(&mut table, user);
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: ScenarioConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Self::from_toml_with_overrides(text, &[])
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Stable hash of the resolved configuration (hex, 16 chars).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, field: &str, message: &str| {
            if !ok {
                errs.push(FieldError {
                    field: field.to_string(),
                    message: message.to_string(),
                });
            }
        };
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let frac = |v: f64| v.is_finite() && v > 0.0 && v < 1.0;
        let p_ok = |bara: f64| bara.is_finite() && (0.1..=10.0).contains(&bara);

        let ot = &self.onshore_tank;
        check(pos(ot.volume), "onshore_tank.volume", "must be > 0");
        check(frac(ot.initial_fill), "onshore_tank.initial_fill", "must be in (0, 1)");
        check(p_ok(ot.pressure_setpoint), "onshore_tank.pressure_setpoint", "must be within 0.1..10 bara");
        check(ot.overall_u >= 0.0, "onshore_tank.overall_u", "must be ≥ 0");
        check(ot.ambient_t > 45.0, "onshore_tank.ambient_t", "must exceed the fluid temperature");

        let st = &self.seaborne_tank;
        check(pos(st.volume), "seaborne_tank.volume", "must be > 0");
        check(frac(st.initial_fill), "seaborne_tank.initial_fill", "must be in (0, 1)");
        check(
            frac(st.stop_fill) && st.stop_fill > st.initial_fill,
            "seaborne_tank.stop_fill",
            "must be in (initial_fill, 1)",
        );
        check(p_ok(st.max_pressure), "seaborne_tank.max_pressure", "must be within 0.1..10 bara");
        check(st.overall_u >= 0.0, "seaborne_tank.overall_u", "must be ≥ 0");
        check(st.ambient_t > 45.0, "seaborne_tank.ambient_t", "must exceed the fluid temperature");
        check(
            ot.volume * ot.initial_fill >= st.volume * (st.stop_fill - st.initial_fill),
            "onshore_tank.initial_fill",
            "onshore inventory cannot fill the seaborne tank",
        );

        let p = &self.pump;
        check(pos(p.ref_speed), "pump.ref_speed", "must be > 0");
        check(
            pos(p.min_speed) && p.min_speed <= p.max_speed,
            "pump.min_speed",
            "must satisfy 0 < min_speed ≤ max_speed",
        );
        check(pos(p.best_point_flow), "pump.best_point_flow", "must be > 0");
        check(pos(p.best_point_dp), "pump.best_point_dp", "must be > 0");
        check(p.shutoff_head_ratio > 1.0, "pump.shutoff_head_ratio", "must be > 1");
        check(
            p.peak_efficiency > 0.0 && p.peak_efficiency <= 1.0,
            "pump.peak_efficiency",
            "must be in (0, 1]",
        );
        check(p.efficiency_curvature >= 0.0, "pump.efficiency_curvature", "must be ≥ 0");
        check(
            p.min_efficiency > 0.0 && p.min_efficiency <= p.peak_efficiency,
            "pump.min_efficiency",
            "must be in (0, peak_efficiency]",
        );

        for (name, pc) in [("lh2_pipe", &self.lh2_pipe), ("vapor_pipe", &self.vapor_pipe)] {
            check(pos(pc.length), &format!("{name}.length"), "must be > 0");
            check(pos(pc.internal_diameter), &format!("{name}.internal_diameter"), "must be > 0");
            check(pc.roughness >= 0.0, &format!("{name}.roughness"), "must be ≥ 0");
            check(pc.heat_ingress >= 0.0, &format!("{name}.heat_ingress"), "must be ≥ 0");
            check(pc.n_cells >= 1, &format!("{name}.n_cells"), "must be ≥ 1");
            check(pc.parallel_count >= 1, &format!("{name}.parallel_count"), "must be ≥ 1");
            check(pos(pc.wall_thickness), &format!("{name}.wall_thickness"), "must be > 0");
            check(pos(pc.wall_density), &format!("{name}.wall_density"), "must be > 0");
            check(pos(pc.wall_specific_heat), &format!("{name}.wall_specific_heat"), "must be > 0");
            check(pos(pc.wall_conductance), &format!("{name}.wall_conductance"), "must be > 0");
            check(
                (14.0..=45.0).contains(&pc.initial_wall_temperature),
                &format!("{name}.initial_wall_temperature"),
                "must be within 14..45 K",
            );
        }

        let v = &self.valves;
        check(pos(v.throttle_full_open_dp), "valves.throttle_full_open_dp", "must be > 0");
        check(pos(v.throttle_ref_flow), "valves.throttle_ref_flow", "must be > 0");
        check(v.rangeability > 1.0, "valves.rangeability", "must be > 1");
        check(pos(v.vapor_return_ref_flow), "valves.vapor_return_ref_flow", "must be > 0");
        check(pos(v.vapor_return_ref_dp), "valves.vapor_return_ref_dp", "must be > 0");
        check(pos(v.bog_ref_flow), "valves.bog_ref_flow", "must be > 0");
        check(pos(v.bog_ref_dp), "valves.bog_ref_dp", "must be > 0");
        check(
            p_ok(v.liquefier_pressure) && v.liquefier_pressure < ot.pressure_setpoint,
            "valves.liquefier_pressure",
            "must be below the onshore set-point",
        );

        let c = &self.control;
        check(pos(c.flow_setpoint), "control.flow_setpoint", "must be > 0");
        check(frac(c.split_point), "control.split_point", "must be in (0, 1)");
        check(pos(c.sample_time), "control.sample_time", "must be > 0");
        for (name, tc) in [("fc_tau_c", c.fc_tau_c), ("pc1_tau_c", c.pc1_tau_c), ("pc2_tau_c", c.pc2_tau_c)] {
            check(tc >= 0.0 && tc.is_finite(), &format!("control.{name}"), "must be ≥ 0 (0 selects θ)");
        }
        for (name, pl) in [
            ("fc_split_range_plant", &c.fc_split_range_plant),
            ("fc_fixed_speed_plant", &c.fc_fixed_speed_plant),
            ("pc1_plant", &c.pc1_plant),
            ("pc2_plant", &c.pc2_plant),
        ] {
            check(
                pl.gain != 0.0 && pl.gain.is_finite(),
                &format!("control.{name}.gain"),
                "must be non-zero",
            );
            check(pos(pl.time_constant), &format!("control.{name}.time_constant"), "must be > 0");
            check(pl.dead_time >= 0.0, &format!("control.{name}.dead_time"), "must be ≥ 0");
        }

        check(pos(self.exergy.t0), "exergy.t0", "must be > 0");
        check(pos(self.kpi.transferred_mass), "kpi.transferred_mass", "must be > 0");
        check(pos(self.kpi.transferred_volume), "kpi.transferred_volume", "must be > 0");

        let r = &self.run;
        check(r.rtol > 0.0 && r.rtol < 1e-2, "run.rtol", "must be in (0, 0.01)");
        check(pos(r.max_step), "run.max_step", "must be > 0");
        let ratio = c.sample_time / r.comm_interval;
        check(
            pos(r.comm_interval) && (ratio - ratio.round()).abs() < 1e-9 && ratio >= 1.0,
            "run.comm_interval",
            "must divide control.sample_time",
        );
        check(pos(r.time_limit), "run.time_limit", "must be > 0");

        let u = &self.ugsa;
        check(u.samples >= 2, "ugsa.samples", "must be ≥ 2");
        check(u.resamples >= 1, "ugsa.resamples", "must be ≥ 1");
        check(u.histogram_bins >= 1, "ugsa.histogram_bins", "must be ≥ 1");
        for (i, pr) in u.parameters.iter().enumerate() {
            check(
                crate::ugsa::KNOWN_PARAMETERS.contains(&pr.name.as_str()),
                &format!("ugsa.parameters[{i}].name"),
                "unknown parameter",
            );
            check(
                pr.low.is_finite() && pr.high.is_finite() && pr.low < pr.high,
                &format!("ugsa.parameters[{i}]"),
                "low must be < high",
            );
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }
}

/// Apply one `a.b.c=value` override to a TOML table. The value is parsed as
/// a TOML value and falls back to a bare string.
/// Recursive table merge; non-table values in `over` replace those in `base`.
fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

pub fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), ConfigError> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(item.to_string()))?;
    let keys: Vec<&str> = path.trim().split('.').map(str::trim).collect();
    if keys.len() < 2 || keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError::Override(item.to_string()));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut cur = table;
    for k in &keys[..keys.len() - 1] {
        cur = cur
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| ConfigError::Override(item.to_string()))?;
    }
    cur.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}
