//! CSV and JSON writers for run artifacts. Every file carries the schema
//! version, configuration hash and seed.

use std::io::{self, Write};

use serde::Serialize;

use super::{ElementEntropy, EntropyReport, KpiRecord, Trajectory, TsDiagram};
use crate::config::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputHeader {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
}

impl OutputHeader {
    pub fn new(config_hash: impl Into<String>, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config_hash: config_hash.into(),
            seed,
        }
    }

    pub fn write_comment<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(
            w,
            "# schema_version={} config_hash={} seed={}",
            self.schema_version, self.config_hash, self.seed
        )
    }
}

pub const TRAJECTORY_COLUMNS: &[&str] = &[
    "time_s",
    "onshore_pressure_pa",
    "seaborne_pressure_pa",
    "onshore_liquid_volume_m3",
    "seaborne_liquid_volume_m3",
    "train_flow_m3h",
    "train_flow_kgs",
    "bog_flow_kgs",
    "vapor_return_flow_kgs",
    "pump_speed_hz",
    "throttle_opening",
    "vapor_return_opening",
    "bog_opening",
    "shaft_power_w",
    "pump_efficiency",
    "cumulative_bog_kg",
    "cumulative_shaft_energy_j",
    "s_pump_wk",
    "s_pipe_wk",
    "s_valve_wk",
];

pub fn write_trajectory_csv<W: Write>(mut w: W, header: &OutputHeader, traj: &Trajectory) -> io::Result<()> {
    header.write_comment(&mut w)?;
    writeln!(w, "{}", TRAJECTORY_COLUMNS.join(","))?;
    for i in 0..traj.len() {
        let s = traj.entropy.get(i).copied().unwrap_or_default();
        let row = [
            traj.time[i],
            traj.onshore_pressure[i],
            traj.seaborne_pressure[i],
            traj.onshore_liquid_volume[i],
            traj.seaborne_liquid_volume[i],
            traj.train_volume_flow[i],
            traj.train_mass_flow[i],
            traj.bog_flow[i],
            traj.vapor_return_flow[i],
            traj.pump_speed[i],
            traj.throttle_opening[i],
            traj.vapor_return_opening[i],
            traj.bog_opening[i],
            traj.shaft_power[i],
            traj.pump_efficiency[i],
            traj.cumulative_bog[i],
            traj.cumulative_shaft_energy[i],
            s.pump,
            s.pipe,
            s.valve,
        ];
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct KpiFile<'a> {
    #[serde(flatten)]
    header: &'a OutputHeader,
    #[serde(flatten)]
    kpi: &'a KpiRecord,
}

pub fn write_kpi_json<W: Write>(mut w: W, header: &OutputHeader, kpi: &KpiRecord) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, &KpiFile { header, kpi })?;
    writeln!(w)
}

pub fn write_entropy_csv<W: Write>(mut w: W, header: &OutputHeader, report: &EntropyReport) -> io::Result<()> {
    header.write_comment(&mut w)?;
    writeln!(
        w,
        "# snapshot_time_s={} steady={} t0_k={} state_point_rise_wk={}",
        report.snapshot_time, report.steady, report.t0, report.state_point_rise
    )?;
    writeln!(w, "element,rate_wk,exergy_destruction_w,integrated_jk,exergy_destroyed_j")?;
    let rows: [(&str, fn(&ElementEntropy) -> f64); 4] = [
        ("pump", |e| e.pump),
        ("pipe", |e| e.pipe),
        ("valve", |e| e.valve),
        ("total", |e| e.total()),
    ];
    for (name, f) in rows {
        writeln!(
            w,
            "{name},{},{},{},{}",
            f(&report.rate),
            f(&report.exergy_destruction_rate),
            f(&report.integrated),
            f(&report.exergy_destroyed)
        )?;
    }
    Ok(())
}

pub fn write_ts_csv<W: Write>(mut w: W, header: &OutputHeader, ts: &TsDiagram) -> io::Result<()> {
    header.write_comment(&mut w)?;
    writeln!(w, "# snapshot_time_s={} steady={}", ts.time, ts.steady)?;
    writeln!(w, "point,entropy_jkgk,temperature_k,pressure_pa,enthalpy_jkg")?;
    for p in &ts.points {
        writeln!(w, "{},{},{},{},{}", p.label, p.entropy, p.temperature, p.pressure, p.enthalpy)?;
    }
    Ok(())
}
