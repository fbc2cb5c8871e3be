//! Open-loop step tests on the flowsheet and SIMC settings from the fits.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{build_flowsheet, Actuators, SimError, Simulator};
use crate::config::{PumpMode, ScenarioConfig};
use crate::control::{self, fit_fopdt, PidParams, PlantModel, StepResponse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopId {
    /// Train flow (m³/h) from the split-range controller output.
    FcSplitRange,
    /// Train flow (m³/h) from the fixed-speed controller output.
    FcFixedSpeed,
    /// Onshore pressure (bar) from the BOG valve opening.
    Pc1,
    /// Seaborne pressure (bar) from the vapor-return valve opening.
    Pc2,
}

impl fmt::Display for LoopId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LoopId::FcSplitRange => "fc-split-range",
            LoopId::FcFixedSpeed => "fc-fixed-speed",
            LoopId::Pc1 => "pc1",
            LoopId::Pc2 => "pc2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningRow {
    pub loop_id: LoopId,
    pub step: f64,
    pub plant: Option<PlantModel>,
    /// s
    pub tau_c: f64,
    pub params: Option<PidParams>,
    /// Set when the loop could not be identified.
    pub error: Option<String>,
}

struct Test {
    id: LoopId,
    mode: PumpMode,
    horizon: f64,
    step: f64,
}

/// Step size, measurement and actuation for one loop.
fn apply(id: LoopId, base: &Actuators, u: f64, fs: &super::Flowsheet) -> Actuators {
    match id {
        LoopId::FcSplitRange | LoopId::FcFixedSpeed => {
            let (x, n) = fs.controls.actuation.map(u);
            Actuators {
                throttle_opening: x,
                pump_speed: n,
                ..*base
            }
        }
        LoopId::Pc1 => Actuators {
            bog_opening: u,
            ..*base
        },
        LoopId::Pc2 => Actuators {
            vapor_return_opening: u,
            ..*base
        },
    }
}

fn run(
    fs: &super::Flowsheet,
    id: LoopId,
    act: Actuators,
    horizon: f64,
) -> Result<Vec<f64>, SimError> {
    let dt = fs.controls.sample_time;
    let mut sim = Simulator::new(fs)?;
    sim.set_actuators(act)?;
    let pv = |s: &Simulator<'_>| {
        let e = s.evaluation();
        match id {
            LoopId::FcSplitRange | LoopId::FcFixedSpeed => e.flows.train_volume_flow,
            LoopId::Pc1 => e.onshore.pressure / 1e5,
            LoopId::Pc2 => e.seaborne.pressure / 1e5,
        }
    };
    let n = (horizon / dt).round() as usize;
    let mut out = Vec::with_capacity(n + 1);
    // the step acts from t = 0; the sample at t = 0 precedes it
    out.push(f64::NAN);
    for _ in 0..n {
        sim.advance(dt)?;
        out.push(pv(&sim));
    }
    Ok(out)
}

fn identify(config: &ScenarioConfig, t: &Test) -> TuningRow {
    let mut cfg = config.clone();
    cfg.control.mode = t.mode;
    let tau_c_cfg = match t.id {
        LoopId::FcSplitRange | LoopId::FcFixedSpeed => cfg.control.fc_tau_c,
        LoopId::Pc1 => cfg.control.pc1_tau_c,
        LoopId::Pc2 => cfg.control.pc2_tau_c,
    };
    let dt = cfg.control.sample_time;
    let fail = |e: String| TuningRow {
        loop_id: t.id,
        step: t.step,
        plant: None,
        tau_c: tau_c_cfg,
        params: None,
        error: Some(e),
    };
    let fs = match build_flowsheet(&cfg) {
        Ok(fs) => fs,
        Err(e) => return fail(e.to_string()),
    };
    let c = &fs.controls;
    let (u0, hi) = match t.id {
        LoopId::FcSplitRange | LoopId::FcFixedSpeed => (c.fc_state.last_output, c.fc.output_high),
        LoopId::Pc1 => (c.pc1_state.last_output, 1.0),
        LoopId::Pc2 => (c.pc2_state.last_output, 1.0),
    };
    let step = if u0 + t.step <= hi { t.step } else { -t.step };
    let base = c.current();
    let responses = run(&fs, t.id, apply(t.id, &base, u0, &fs), t.horizon)
        .and_then(|b| Ok((b, run(&fs, t.id, apply(t.id, &base, u0 + step, &fs), t.horizon)?)));
    let (b, s) = match responses {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let mut response: Vec<f64> = s.iter().zip(&b).map(|(s, b)| s - b).collect();
    response[0] = 0.0;
    let resp = StepResponse { dt, step, response };
    match fit_fopdt(&resp) {
        Ok(plant) => {
            let tau_c = if tau_c_cfg > 0.0 { tau_c_cfg } else { plant.dead_time + 0.5 * dt };
            let params = control::simc_tune_sampled(&plant, tau_c, dt).ok();
            TuningRow {
                loop_id: t.id,
                step,
                plant: Some(plant),
                tau_c,
                params,
                error: None,
            }
        }
        Err(e) => TuningRow {
            step,
            ..fail(e.to_string())
        },
    }
}

/// Scripted open-loop step tests at the initial operating point of `config`:
/// each test is differenced against an unstepped run from the same state.
pub fn identify_loops(config: &ScenarioConfig) -> Vec<TuningRow> {
    let tests = [
        Test { id: LoopId::FcSplitRange, mode: PumpMode::SplitRange, horizon: 60.0, step: 0.02 },
        Test { id: LoopId::FcFixedSpeed, mode: PumpMode::FixedSpeed, horizon: 60.0, step: 0.02 },
        Test { id: LoopId::Pc1, mode: config.control.mode, horizon: 600.0, step: 0.05 },
        Test { id: LoopId::Pc2, mode: config.control.mode, horizon: 600.0, step: 0.05 },
    ];
    tests.iter().map(|t| identify(config, t)).collect()
}
