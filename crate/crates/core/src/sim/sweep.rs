//! Independent runs over one scenario parameter.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_flowsheet, integrate, kpi_record, KpiRecord, StopCondition};
use crate::config::{PumpMode, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    /// Seaborne maximum working pressure, bara.
    SeabornePressure,
    /// Flow controller set-point, m³/h.
    FlowSetpoint,
    /// 0 selects split-range, 1 fixed-speed.
    PumpMode,
}

impl SweepParameter {
    pub fn apply(&self, config: &mut ScenarioConfig, value: f64) {
        match self {
            SweepParameter::SeabornePressure => config.seaborne_tank.max_pressure = value,
            SweepParameter::FlowSetpoint => config.control.flow_setpoint = value,
            SweepParameter::PumpMode => {
                config.control.mode = if value == 0.0 {
                    PumpMode::SplitRange
                } else {
                    PumpMode::FixedSpeed
                }
            }
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParameter::SeabornePressure => "seaborne-pressure",
            SweepParameter::FlowSetpoint => "flow-setpoint",
            SweepParameter::PumpMode => "pump-mode",
        })
    }
}

impl FromStr for SweepParameter {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "seaborne-pressure" | "seaborne_tank.max_pressure" => Ok(Self::SeabornePressure),
            "flow-setpoint" | "control.flow_setpoint" => Ok(Self::FlowSetpoint),
            "pump-mode" | "control.mode" => Ok(Self::PumpMode),
            other => Err(format!(
                "unknown sweep parameter `{other}` (seaborne-pressure, flow-setpoint, pump-mode)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mode: PumpMode,
    pub value: f64,
    pub kpi: Option<KpiRecord>,
    pub error: Option<String>,
}

/// One run per value, each from a copy of `base`. Failures are kept in the
/// row and do not stop the sweep. Rows follow the order of `values`.
pub fn sweep(base: &ScenarioConfig, parameter: SweepParameter, values: &[f64]) -> Vec<SweepRow> {
    values
        .par_iter()
        .map(|&value| {
            let mut cfg = base.clone();
            parameter.apply(&mut cfg, value);
            let result = build_flowsheet(&cfg).and_then(|fs| {
                let stop = StopCondition::for_flowsheet(&fs);
                integrate(&fs, &stop)
            });
            match result {
                Ok(traj) => SweepRow {
                    mode: cfg.control.mode,
                    value,
                    kpi: Some(kpi_record(&traj)),
                    error: None,
                },
                Err(e) => SweepRow {
                    mode: cfg.control.mode,
                    value,
                    kpi: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
