//! One loading train: onshore tank, submerged pump, transfer line, throttling
//! valve, seaborne tank, vapor-return line and BOG valve to the liquefier.
//!
//! Momentum is quasi-steady: flows come from an algebraic network solve at
//! every derivative evaluation. Tank inventories, pipe cell enthalpies, wall
//! temperatures and a handful of accumulators form the ODE state.

mod integrate;
mod output;
mod report;
mod sweep;
mod tune;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::config::Method;
use crate::config::{PumpMode, ScenarioConfig};
use crate::control::{self, Direction, PidParams, PidState, SplitRangeConfig};
use crate::equipment::{
    self, pipe, tank_derivatives, tank_flash_from, tank_heat_ingress, valve, FlashError,
    PipeLine, PumpModel, Stream, TankFlows, TankGeometry, TankIntensive, TankState, ValveModel,
};
use crate::h2props::{self, PropsError};

pub use integrate::{integrate, Simulator, StopCondition, Trajectory};
pub use output::{
    write_entropy_csv, write_kpi_json, write_trajectory_csv, write_ts_csv, OutputHeader,
    TRAJECTORY_COLUMNS,
};
pub use report::{
    conservation, entropy_report, kpi_record, kpi_relative_bog, kpi_relative_power, ts_diagram,
    ConservationCheck, ElementEntropy, EntropyReport, KpiRecord, TsDiagram, TsPoint,
};
pub use sweep::{sweep, SweepParameter, SweepRow};
pub use tune::{identify_loops, LoopId, TuningRow};

const BAR: f64 = 1e5;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("initialization failed: {0}")]
    Init(String),
    #[error("simulation aborted at t = {time:.1} s: {reason}")]
    Abort {
        time: f64,
        reason: String,
        /// ODE state at the last accepted point.
        state: Vec<f64>,
    },
}

#[derive(Debug, Error)]
pub(crate) enum EvalError {
    #[error("{0}")]
    Flash(#[from] FlashError),
    #[error("{0}")]
    Props(#[from] PropsError),
    #[error("non-finite state derivative")]
    NonFinite,
}

/// Manipulated variables, held constant between controller samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Actuators {
    /// Hz
    pub pump_speed: f64,
    pub throttle_opening: f64,
    pub vapor_return_opening: f64,
    pub bog_opening: f64,
}

/// How the flow controller output reaches the train.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FlowActuation {
    /// Valve below the split point, speed above it.
    SplitRange(SplitRangeConfig),
    /// Output is the valve opening directly; pump at fixed `speed`.
    ValveOnly { speed: f64 },
}

impl FlowActuation {
    pub fn map(&self, u: f64) -> (f64, f64) {
        match *self {
            FlowActuation::SplitRange(cfg) => control::split_range_map(u, &cfg),
            FlowActuation::ValveOnly { speed } => (u.clamp(0.0, 1.0), speed),
        }
    }
}

/// The three PI loops and their sampled states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSystem {
    /// m³/h
    pub flow_setpoint: f64,
    /// Pa
    pub onshore_setpoint: f64,
    /// Pa
    pub seaborne_setpoint: f64,
    pub sample_time: f64,
    pub fc: PidParams,
    pub pc1: PidParams,
    pub pc2: PidParams,
    pub actuation: FlowActuation,
    pub fc_state: PidState,
    pub pc1_state: PidState,
    pub pc2_state: PidState,
}

impl ControlSystem {
    /// Take one sample of all loops. Flow in m³/h, pressures in Pa.
    pub fn step(&mut self, flow: f64, p_onshore: f64, p_seaborne: f64) -> Actuators {
        let dt = self.sample_time;
        let u = control::pid_step(&mut self.fc_state, &self.fc, self.flow_setpoint, flow, dt);
        let bog = control::pid_step(
            &mut self.pc1_state,
            &self.pc1,
            self.onshore_setpoint / BAR,
            p_onshore / BAR,
            dt,
        );
        let vr = control::pid_step(
            &mut self.pc2_state,
            &self.pc2,
            self.seaborne_setpoint / BAR,
            p_seaborne / BAR,
            dt,
        );
        self.actuators(u, vr, bog)
    }

    fn actuators(&self, u: f64, vapor_return: f64, bog: f64) -> Actuators {
        let (throttle, speed) = self.actuation.map(u);
        Actuators {
            pump_speed: speed,
            throttle_opening: throttle,
            vapor_return_opening: vapor_return,
            bog_opening: bog,
        }
    }

    pub fn current(&self) -> Actuators {
        self.actuators(
            self.fc_state.last_output,
            self.pc2_state.last_output,
            self.pc1_state.last_output,
        )
    }
}

/// Assembled train with its initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flowsheet {
    pub onshore: TankGeometry,
    pub seaborne: TankGeometry,
    pub pump: PumpModel,
    pub lh2_pipe: PipeLine,
    pub vapor_pipe: PipeLine,
    pub throttle: ValveModel,
    pub vapor_return_valve: ValveModel,
    pub bog_valve: ValveModel,
    /// Pa
    pub liquefier_pressure: f64,
    pub controls: ControlSystem,
    /// K
    pub t0: f64,
    pub onshore_initial: TankState,
    pub seaborne_initial: TankState,
    /// Liquid holdup density of the transfer line, kg/m³.
    pub pipe_density: f64,
    pub stop_liquid_volume: f64,
    pub transferred_mass: f64,
    pub transferred_volume: f64,
    pub rtol: f64,
    pub max_step: f64,
    pub comm_interval: f64,
    /// s
    pub time_limit: f64,
    pub record_entropy: bool,
    pub method: Method,
}

/// Layout of the ODE state vector.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub n: usize,
}

impl Layout {
    pub const M_OT: usize = 0;
    pub const U_OT: usize = 1;
    pub const M_ST: usize = 2;
    pub const U_ST: usize = 3;
    pub fn h(&self) -> usize {
        4
    }
    pub fn tw(&self) -> usize {
        4 + self.n
    }
    /// Cumulative BOG mass, BOG enthalpy, shaft energy, external heat.
    pub fn acc(&self) -> usize {
        4 + 2 * self.n
    }
    pub fn len(&self) -> usize {
        self.acc() + 4
    }
}

/// Solved flows for given tank states and actuators.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkFlows {
    /// kg/s per train
    pub train_mass_flow: f64,
    /// m³/h at onshore saturated-liquid density
    pub train_volume_flow: f64,
    /// kg/s
    pub vapor_return: f64,
    /// kg/s
    pub bog: f64,
    /// Pa
    pub pump_dp: f64,
    /// Pa
    pub pipe_dp: f64,
    /// Pa
    pub valve_dp: f64,
    /// Pump cannot overcome the tank pressure difference.
    pub starved: bool,
}

/// Everything derived from the state at one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub onshore: TankIntensive,
    pub seaborne: TankIntensive,
    pub flows: NetworkFlows,
    /// J/kg
    pub pump_work: f64,
    pub pump_efficiency: f64,
    pub efficiency_floored: bool,
    /// W
    pub shaft_power: f64,
    /// W
    pub onshore_heat: f64,
    /// W
    pub seaborne_heat: f64,
    /// W, vapor-return line ingress delivered to the onshore tank
    pub vapor_line_heat: f64,
}

impl Evaluation {
    /// Pump outlet pressure, Pa.
    pub fn p2(&self) -> f64 {
        self.onshore.pressure + self.flows.pump_dp
    }

    /// Transfer-line outlet pressure, Pa.
    pub fn p3(&self) -> f64 {
        self.p2() - self.flows.pipe_dp
    }
}

/// Build a train from a validated configuration.
pub fn build_flowsheet(config: &ScenarioConfig) -> Result<Flowsheet, SimError> {
    config.validate().map_err(|e| SimError::Init(e.to_string()))?;
    let init = |e: PropsError| SimError::Init(e.to_string());
    let ot_cfg = &config.onshore_tank;
    let st_cfg = &config.seaborne_tank;
    let p_ot = ot_cfg.pressure_setpoint * BAR;
    let p_st = st_cfg.max_pressure * BAR;

    let onshore = TankGeometry::sphere(ot_cfg.volume, ot_cfg.overall_u, ot_cfg.ambient_t, p_ot);
    let seaborne = TankGeometry::sphere(st_cfg.volume, st_cfg.overall_u, st_cfg.ambient_t, p_st);
    let onshore_initial =
        TankState::from_saturation(p_ot, ot_cfg.volume * ot_cfg.initial_fill, &onshore).map_err(init)?;
    let seaborne_initial =
        TankState::from_saturation(p_st, st_cfg.volume * st_cfg.initial_fill, &seaborne).map_err(init)?;

    let sat_ot = h2props::sat_point(p_ot).map_err(init)?;
    let sat_st = h2props::sat_point(p_st).map_err(init)?;
    let rho_l = sat_ot.liquid.density;

    let make_pipe = |c: &crate::config::PipeConfig, cells: usize| {
        let mut p = PipeLine {
            length: c.length,
            internal_diameter: c.internal_diameter,
            roughness: c.roughness,
            heat_ingress_per_m: c.heat_ingress,
            n_cells: cells,
            parallel_count: c.parallel_count,
            wall_heat_capacity_per_m: 0.0,
            wall_conductance_per_m: c.wall_conductance,
            cell_enthalpy: vec![sat_ot.liquid.enthalpy; cells],
            wall_temperature: vec![c.initial_wall_temperature; cells],
        };
        p.wall_heat_capacity_per_m =
            p.tube_heat_capacity(c.wall_thickness, c.wall_density, c.wall_specific_heat);
        p
    };
    let lh2_pipe = make_pipe(&config.lh2_pipe, config.lh2_pipe.n_cells);
    let vapor_pipe = make_pipe(&config.vapor_pipe, 0);

    let v = &config.valves;
    let throttle = ValveModel {
        characteristic: v.throttle_characteristic,
        rangeability: v.rangeability,
        ..ValveModel::sized_for(v.throttle_ref_flow / 3600.0 * rho_l, v.throttle_full_open_dp * BAR, rho_l)
    };
    let vapor_return_valve = ValveModel {
        rangeability: v.rangeability,
        ..ValveModel::sized_for(v.vapor_return_ref_flow, v.vapor_return_ref_dp * BAR, sat_st.vapor.density)
    };
    let bog_valve = ValveModel {
        rangeability: v.rangeability,
        ..ValveModel::sized_for(v.bog_ref_flow, v.bog_ref_dp * BAR, sat_ot.vapor.density)
    };

    let c = &config.control;
    let dt = c.sample_time;
    let tune = |plant: &control::PlantModel, tau_c: f64| -> Result<PidParams, SimError> {
        let tau_c = if tau_c > 0.0 { tau_c } else { plant.dead_time + 0.5 * dt };
        control::simc_tune_sampled(plant, tau_c, dt).map_err(|e| SimError::Init(e.to_string()))
    };
    let pump = config.pump;
    let (fc, actuation) = match c.mode {
        PumpMode::SplitRange => (
            tune(&c.fc_split_range_plant, c.fc_tau_c)?,
            FlowActuation::SplitRange(SplitRangeConfig {
                split_point: c.split_point,
                min_speed: pump.min_speed,
                max_speed: pump.max_speed,
            }),
        ),
        PumpMode::FixedSpeed => (
            PidParams {
                output_high: c.split_point,
                ..tune(&c.fc_fixed_speed_plant, c.fc_tau_c)?
            },
            FlowActuation::SplitRange(SplitRangeConfig {
                split_point: c.split_point,
                min_speed: pump.max_speed,
                max_speed: pump.max_speed,
            }),
        ),
    };
    let pc1 = tune(&c.pc1_plant, c.pc1_tau_c)?;
    let pc2 = tune(&c.pc2_plant, c.pc2_tau_c)?;
    for (name, p, want) in [("FC", &fc, Direction::Reverse), ("PC1", &pc1, Direction::Direct), ("PC2", &pc2, Direction::Direct)] {
        if p.direction != want {
            return Err(SimError::Init(format!("{name} plant gain has the wrong sign")));
        }
    }
    let controls = ControlSystem {
        flow_setpoint: c.flow_setpoint,
        onshore_setpoint: p_ot,
        seaborne_setpoint: p_st,
        sample_time: dt,
        fc_state: PidState::at_output(0.0, &fc),
        pc1_state: PidState::at_output(0.0, &pc1),
        pc2_state: PidState::at_output(0.0, &pc2),
        fc,
        pc1,
        pc2,
        actuation,
    };

    let mut fs = Flowsheet {
        onshore,
        seaborne,
        pump,
        lh2_pipe,
        vapor_pipe,
        throttle,
        vapor_return_valve,
        bog_valve,
        liquefier_pressure: v.liquefier_pressure * BAR,
        controls,
        t0: config.exergy.t0,
        onshore_initial,
        seaborne_initial,
        pipe_density: rho_l,
        stop_liquid_volume: st_cfg.volume * st_cfg.stop_fill,
        transferred_mass: config.kpi.transferred_mass * 1e3,
        transferred_volume: config.kpi.transferred_volume,
        rtol: config.run.rtol,
        max_step: config.run.max_step,
        comm_interval: config.run.comm_interval,
        time_limit: config.run.time_limit * 3600.0,
        record_entropy: config.run.record_entropy,
        method: config.run.method,
    };
    fs.initialize_controls()?;
    fs.lh2_pipe.cell_enthalpy = init_pipe_enthalpy(&fs)?;
    Ok(fs)
}

/// Largest `x ∈ [lo, hi]` with `f(x) ≤ target` for nondecreasing `f`.
fn bisect_increasing(f: impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    if f(b) <= target {
        return b;
    }
    if f(a) >= target {
        return a;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) < target {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

impl Flowsheet {
    pub(crate) fn layout(&self) -> Layout {
        Layout {
            n: self.lh2_pipe.n_cells,
        }
    }

    /// Initial ODE state vector.
    pub fn initial_state(&self) -> Vec<f64> {
        let l = self.layout();
        let mut y = vec![0.0; l.len()];
        y[Layout::M_OT] = self.onshore_initial.total_mass;
        y[Layout::U_OT] = self.onshore_initial.total_internal_energy;
        y[Layout::M_ST] = self.seaborne_initial.total_mass;
        y[Layout::U_ST] = self.seaborne_initial.total_internal_energy;
        y[l.h()..l.tw()].copy_from_slice(&self.lh2_pipe.cell_enthalpy);
        y[l.tw()..l.acc()].copy_from_slice(&self.lh2_pipe.wall_temperature);
        y
    }

    /// Fluid holdup of one pipe cell, kg.
    pub fn cell_mass(&self) -> f64 {
        self.pipe_density * self.lh2_pipe.area() * self.lh2_pipe.cell_length()
    }

    fn initial_intensive(&self) -> Result<(TankIntensive, TankIntensive), SimError> {
        let ot = equipment::tank_flash(&self.onshore_initial, &self.onshore)
            .map_err(|e| SimError::Init(e.to_string()))?;
        let st = equipment::tank_flash(&self.seaborne_initial, &self.seaborne)
            .map_err(|e| SimError::Init(e.to_string()))?;
        Ok((ot, st))
    }

    /// Bumpless controller start at steady estimates: the flow controller at
    /// the output that delivers its set-point, the vapor-return valve passing
    /// the displaced vapor, the BOG valve at the expected onshore surplus.
    fn initialize_controls(&mut self) -> Result<(), SimError> {
        let (ot, st) = self.initial_intensive()?;
        let c = &self.controls;
        let hi = c.fc.output_high;
        let act = |u: f64| {
            let (x, n) = c.actuation.map(u);
            Actuators {
                pump_speed: n,
                throttle_opening: x,
                vapor_return_opening: 0.0,
                bog_opening: 0.0,
            }
        };
        let flow_at = |u: f64| solve_flow_network(self, &act(u), &ot, &st).train_volume_flow;
        let u_fc = bisect_increasing(flow_at, c.flow_setpoint, c.fc.output_low, hi);
        let train = solve_flow_network(self, &act(u_fc), &ot, &st);

        let displaced = train.train_mass_flow * st.vapor.density / st.liquid.density;
        let vr_at = |x: f64| {
            let a = Actuators {
                vapor_return_opening: x,
                ..act(u_fc)
            };
            solve_flow_network(self, &a, &ot, &st).vapor_return
        };
        let u_vr = bisect_increasing(vr_at, displaced, 0.0, 1.0);

        let q_ot = tank_heat_ingress(&self.onshore, ot.temperature) + self.vapor_line_heat();
        let surplus = displaced + q_ot / (ot.vapor.enthalpy - ot.liquid.enthalpy)
            - train.train_mass_flow * ot.vapor.density / ot.liquid.density;
        let bog_at = |x: f64| {
            let a = Actuators {
                bog_opening: x,
                ..act(u_fc)
            };
            solve_flow_network(self, &a, &ot, &st).bog
        };
        let u_bog = bisect_increasing(bog_at, surplus.max(0.0), 0.0, 1.0);

        let c = &mut self.controls;
        c.fc_state = PidState::at_output(u_fc, &c.fc);
        c.pc2_state = PidState::at_output(u_vr, &c.pc2);
        c.pc1_state = PidState::at_output(u_bog, &c.pc1);
        Ok(())
    }

    /// W, all parallel vapor lines.
    pub fn vapor_line_heat(&self) -> f64 {
        let v = &self.vapor_pipe;
        v.heat_ingress_per_m * v.length * v.parallel_count as f64
    }

    /// W, all parallel LH₂ lines.
    pub fn lh2_line_heat(&self) -> f64 {
        let p = &self.lh2_pipe;
        p.heat_ingress_per_m * p.length * p.parallel_count as f64
    }

    /// Total H₂ mass in tanks and lines for state `y`.
    pub fn total_mass(&self, y: &[f64]) -> f64 {
        let l = self.layout();
        y[Layout::M_OT] + y[Layout::M_ST]
            + self.lh2_pipe.parallel_count as f64 * l.n as f64 * self.cell_mass()
    }

    /// Total stored energy (fluid internal energy, line enthalpy holdup and
    /// wall heat relative to 0 K) for state `y`.
    pub fn total_energy(&self, y: &[f64]) -> f64 {
        let l = self.layout();
        let par = self.lh2_pipe.parallel_count as f64;
        let m = self.cell_mass();
        let c = self.lh2_pipe.wall_heat_capacity_per_m * self.lh2_pipe.cell_length();
        let fluid: f64 = y[l.h()..l.tw()].iter().map(|h| m * h).sum();
        let wall: f64 = y[l.tw()..l.acc()].iter().map(|t| c * t).sum();
        y[Layout::U_OT] + y[Layout::U_ST] + par * (fluid + wall)
    }

    /// Cell outlet pressures of the transfer line, Pa.
    pub(crate) fn cell_pressure(&self, eval: &Evaluation, i: usize) -> f64 {
        let n = self.lh2_pipe.n_cells as f64;
        eval.p2() - eval.flows.pipe_dp * (i + 1) as f64 / n
    }

    /// Derivatives of the full state under fixed actuators.
    pub(crate) fn derivatives(
        &self,
        y: &[f64],
        act: &Actuators,
        ws: &mut Workspace,
        dy: &mut [f64],
    ) -> Result<Evaluation, EvalError> {
        let l = self.layout();
        let ot_state = TankState {
            total_mass: y[Layout::M_OT],
            total_internal_energy: y[Layout::U_OT],
        };
        let st_state = TankState {
            total_mass: y[Layout::M_ST],
            total_internal_energy: y[Layout::U_ST],
        };
        let ot = tank_flash_from(&ot_state, &self.onshore, Some(ws.p_hint.0))?;
        let st = tank_flash_from(&st_state, &self.seaborne, Some(ws.p_hint.1))?;
        ws.p_hint = (ot.pressure, st.pressure);

        let flows = solve_flow_network(self, act, &ot, &st);
        let mdot = flows.train_mass_flow;
        let (pump_work, eta, floored) = if flows.pump_dp > 0.0 {
            let (eta, fl) = self
                .pump
                .efficiency_unchecked(flows.train_volume_flow, act.pump_speed);
            (flows.pump_dp / (ot.liquid.density * eta), eta, fl)
        } else {
            (0.0, self.pump.efficiency_unchecked(0.0, act.pump_speed).0, false)
        };
        let shaft_power = mdot * pump_work;
        let onshore_heat = tank_heat_ingress(&self.onshore, ot.temperature);
        let seaborne_heat = tank_heat_ingress(&self.seaborne, st.temperature);
        let eval = Evaluation {
            onshore: ot,
            seaborne: st,
            flows,
            pump_work,
            pump_efficiency: eta,
            efficiency_floored: floored,
            shaft_power,
            onshore_heat,
            seaborne_heat,
            vapor_line_heat: self.vapor_line_heat(),
        };

        let h = &y[l.h()..l.tw()];
        let tw = &y[l.tw()..l.acc()];
        ws.tf.resize(l.n, 0.0);
        ws.q_wf.resize(l.n, 0.0);
        for i in 0..l.n {
            ws.tf[i] = h2props::liquid_temperature(self.cell_pressure(&eval, i), h[i])?;
        }
        let par = self.lh2_pipe.parallel_count as f64;
        let (dh, rest) = dy[l.h()..].split_at_mut(l.n);
        let (dtw, _) = rest.split_at_mut(l.n);
        pipe::pipe_cell_derivatives_into(
            &self.lh2_pipe,
            self.cell_mass(),
            mdot / par,
            ot.liquid.enthalpy + pump_work,
            h,
            tw,
            &ws.tf,
            dh,
            dtw,
            &mut ws.q_wf,
        );

        let h_out = h[l.n - 1];
        let (dm_ot, du_ot) = tank_derivatives(
            &ot,
            &TankFlows {
                liquid_in: Stream::default(),
                liquid_out: mdot,
                vapor_in: Stream {
                    mass_flow: flows.vapor_return,
                    enthalpy: st.vapor.enthalpy,
                },
                vapor_out: flows.bog,
                heat_ingress: onshore_heat + eval.vapor_line_heat,
            },
        );
        // the pump raises the enthalpy of the liquid it draws
        let (dm_st, du_st) = tank_derivatives(
            &st,
            &TankFlows {
                liquid_in: Stream {
                    mass_flow: mdot,
                    enthalpy: h_out,
                },
                liquid_out: 0.0,
                vapor_in: Stream::default(),
                vapor_out: flows.vapor_return,
                heat_ingress: seaborne_heat,
            },
        );
        dy[Layout::M_OT] = dm_ot;
        dy[Layout::U_OT] = du_ot;
        dy[Layout::M_ST] = dm_st;
        dy[Layout::U_ST] = du_st;
        let a = l.acc();
        dy[a] = flows.bog;
        dy[a + 1] = flows.bog * ot.vapor.enthalpy;
        dy[a + 2] = shaft_power;
        dy[a + 3] = onshore_heat + seaborne_heat + eval.vapor_line_heat + self.lh2_line_heat();
        Ok(eval)
    }
}

/// Scratch buffers and flash starting points reused across evaluations.
#[derive(Debug, Clone, Default)]
pub(crate) struct Workspace {
    pub p_hint: (f64, f64),
    pub tf: Vec<f64>,
    pub q_wf: Vec<f64>,
}

/// Solve the quasi-steady momentum balance of the train and both vapor
/// paths for fixed actuators and tank states.
pub fn solve_flow_network(
    fs: &Flowsheet,
    act: &Actuators,
    onshore: &TankIntensive,
    seaborne: &TankIntensive,
) -> NetworkFlows {
    let rho = onshore.liquid.density;
    let mu = onshore.liquid.viscosity;
    let par = fs.lh2_pipe.parallel_count as f64;
    let dp_tanks = seaborne.pressure - onshore.pressure;
    let to_m3h = 3600.0 / rho;
    let pump_dp = |m: f64| fs.pump.curve(m * to_m3h, act.pump_speed).max(0.0);
    let pipe_dp = |m: f64| pipe::pressure_drop(&fs.lh2_pipe, m / par, rho, mu);
    let valve_dp = |m: f64| fs.throttle.pressure_drop(act.throttle_opening, m, rho);
    // decreasing in m
    let residual = |m: f64| pump_dp(m) - pipe_dp(m) - valve_dp(m) - dp_tanks;

    let mut out = NetworkFlows::default();
    if act.throttle_opening <= 0.0 || residual(0.0) <= 0.0 {
        out.starved = act.throttle_opening > 0.0;
        out.pump_dp = pump_dp(0.0);
    } else {
        let mut hi = fs.pump.runout_flow(act.pump_speed) / to_m3h;
        while residual(hi) > 0.0 {
            hi *= 2.0;
        }
        let m = h2props::solve_monotone(|m| -residual(m), 0.0, hi, 1e-7);
        out.train_mass_flow = m;
        out.train_volume_flow = m * to_m3h;
        out.pump_dp = pump_dp(m);
        out.pipe_dp = pipe_dp(m);
        out.valve_dp = out.pump_dp - out.pipe_dp - dp_tanks;
    }

    let vrho = seaborne.vapor.density;
    let vmu = seaborne.vapor.viscosity;
    let vpar = fs.vapor_pipe.parallel_count as f64;
    if act.vapor_return_opening > 0.0 && dp_tanks > 0.0 {
        let upper = valve::mass_flow(&fs.vapor_return_valve, act.vapor_return_opening, vrho, dp_tanks);
        let r = |m: f64| {
            pipe::pressure_drop(&fs.vapor_pipe, m / vpar, vrho, vmu)
                + fs.vapor_return_valve.pressure_drop(act.vapor_return_opening, m, vrho)
                - dp_tanks
        };
        out.vapor_return = h2props::solve_monotone(r, 0.0, upper, 1e-9);
    }
    out.bog = valve::mass_flow(
        &fs.bog_valve,
        act.bog_opening,
        onshore.vapor.density,
        onshore.pressure - fs.liquefier_pressure,
    );
    out
}

/// Steady cell enthalpies of the transfer line at the initial operating
/// point, by successive substitution of the cell energy balances. Walls are
/// left at their configured initial temperature.
pub fn init_pipe_enthalpy(fs: &Flowsheet) -> Result<Vec<f64>, SimError> {
    let (ot, st) = fs.initial_intensive()?;
    let act = fs.controls.current();
    let flows = solve_flow_network(fs, &act, &ot, &st);
    let par = fs.lh2_pipe.parallel_count as f64;
    let mdot = flows.train_mass_flow / par;
    let n = fs.lh2_pipe.n_cells;
    let inlet = if flows.pump_dp > 0.0 && mdot > 0.0 {
        let (eta, _) = fs.pump.efficiency_unchecked(flows.train_volume_flow, act.pump_speed);
        ot.liquid.enthalpy + flows.pump_dp / (ot.liquid.density * eta)
    } else {
        ot.liquid.enthalpy
    };
    if mdot <= 0.0 {
        return Ok(vec![inlet; n]);
    }
    let q_cell = fs.lh2_pipe.heat_ingress_per_m * fs.lh2_pipe.cell_length();
    let mut h = vec![inlet; n];
    for _ in 0..100 {
        let mut change = 0.0f64;
        let mut upstream = inlet;
        for hi in h.iter_mut() {
            let next = upstream + q_cell / mdot;
            change = change.max(((next - *hi) / next.abs().max(1.0)).abs());
            *hi = next;
            upstream = next;
        }
        if change < 1e-6 {
            return Ok(h);
        }
    }
    Err(SimError::Init("transfer-line enthalpy profile did not converge".into()))
}
