//! Explicit embedded Runge–Kutta integration between controller samples and
//! the sampled closed-loop driver that produces a [`Trajectory`]. The
//! right-hand side is autonomous, so stage times are not tracked.

use serde::{Deserialize, Serialize};

use super::report::ElementEntropy;
use super::{Actuators, EvalError, Evaluation, Flowsheet, Layout, Method, SimError, Workspace};
use crate::h2props::{self, FluidState};

/// Explicit embedded Runge–Kutta pair with the FSAL property: the last row
/// of `a` holds the propagating weights, so the last stage is the derivative
/// at the accepted point.
struct Tableau {
    a: &'static [&'static [f64]],
    /// Propagating minus embedded weights, one per stage.
    e: &'static [f64],
    /// Step-size exponent, 1/(embedded order + 1).
    exponent: f64,
}

const DOPRI5: Tableau = Tableau {
    a: &[
        &[],
        &[0.2],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
        &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
        &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ],
    e: &[
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ],
    exponent: 0.2,
};

const BS3: Tableau = Tableau {
    a: &[&[], &[0.5], &[0.0, 0.75], &[2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0]],
    e: &[-5.0 / 72.0, 1.0 / 12.0, 1.0 / 9.0, -1.0 / 8.0],
    exponent: 1.0 / 3.0,
};

impl Method {
    fn tableau(self) -> &'static Tableau {
        match self {
            Method::Dopri5 => &DOPRI5,
            Method::Bs3 => &BS3,
        }
    }
}

/// Stepper for one flowsheet with externally held actuators.
pub struct Simulator<'a> {
    fs: &'a Flowsheet,
    tableau: &'static Tableau,
    time: f64,
    y: Vec<f64>,
    act: Actuators,
    ws: Workspace,
    k: Vec<Vec<f64>>,
    stage: Vec<f64>,
    trial: Vec<f64>,
    atol: Vec<f64>,
    eval: Evaluation,
    step: f64,
}

impl<'a> Simulator<'a> {
    /// Start from the flowsheet's initial state and controller outputs.
    pub fn new(fs: &'a Flowsheet) -> Result<Self, SimError> {
        let y = fs.initial_state();
        let l = fs.layout();
        let mut atol = vec![0.0; y.len()];
        atol[Layout::M_OT] = 1e-3;
        atol[Layout::M_ST] = 1e-3;
        atol[Layout::U_OT] = 1e2;
        atol[Layout::U_ST] = 1e2;
        atol[l.h()..l.tw()].fill(1e-4);
        atol[l.tw()..l.acc()].fill(1e-7);
        atol[l.acc()..].copy_from_slice(&[1e-3, 1e2, 1e2, 1e2]);
        let n = y.len();
        let mut ws = Workspace {
            p_hint: (fs.onshore.max_working_pressure, fs.seaborne.max_working_pressure),
            ..Workspace::default()
        };
        let act = fs.controls.current();
        let tableau = fs.method.tableau();
        let mut k = vec![vec![0.0; n]; tableau.a.len()];
        let eval = fs.derivatives(&y, &act, &mut ws, &mut k[0]).map_err(|e| SimError::Abort {
            time: 0.0,
            reason: e.to_string(),
            state: y.clone(),
        })?;
        Ok(Self {
            fs,
            time: 0.0,
            act,
            ws,
            tableau,
            k,
            stage: vec![0.0; n],
            trial: vec![0.0; n],
            atol,
            eval,
            step: fs.max_step.min(fs.comm_interval),
            y,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn state(&self) -> &[f64] {
        &self.y
    }

    pub fn actuators(&self) -> Actuators {
        self.act
    }

    /// Evaluation at the current state and actuators.
    pub fn evaluation(&self) -> &Evaluation {
        &self.eval
    }

    /// State derivative at the current state and actuators.
    pub fn derivative(&self) -> &[f64] {
        &self.k[0]
    }

    fn abort(&self, e: impl ToString) -> SimError {
        SimError::Abort {
            time: self.time,
            reason: e.to_string(),
            state: self.y.clone(),
        }
    }

    pub fn set_actuators(&mut self, act: Actuators) -> Result<(), SimError> {
        if act == self.act {
            return Ok(());
        }
        self.act = act;
        self.eval = self
            .fs
            .derivatives(&self.y, &self.act, &mut self.ws, &mut self.k[0])
            .map_err(|e| self.abort(e))?;
        Ok(())
    }

    /// Advance by exactly `duration` seconds with the actuators held.
    pub fn advance(&mut self, duration: f64) -> Result<(), SimError> {
        let t_end = self.time + duration;
        let rtol = self.fs.rtol;
        while self.time < t_end {
            let remaining = t_end - self.time;
            let mut h = self.step.min(self.fs.max_step);
            let last = h >= remaining * (1.0 - 1e-9);
            if last {
                h = remaining;
            }
            match self.try_step(h) {
                Ok((err, eval)) if err <= 1.0 => {
                    std::mem::swap(&mut self.y, &mut self.trial);
                    let last_stage = self.k.len() - 1;
                    self.k.swap(0, last_stage);
                    self.eval = eval;
                    self.time = if last { t_end } else { self.time + h };
                    let grow = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-self.tableau.exponent)).clamp(0.2, 5.0)
                    };
                    // keep the unclipped step so short remainders do not shrink it
                    self.step = (if last { self.step.max(h) } else { h }) * grow;
                }
                Ok((err, _)) => {
                    self.step = h * (0.9 * err.powf(-self.tableau.exponent)).clamp(0.1, 0.9);
                }
                Err(_) if h > 1e-6 => {
                    self.step = 0.25 * h;
                }
                Err(e) => return Err(self.abort(e)),
            }
            if !(self.step > 1e-9) {
                return Err(self.abort(format!("step size underflow ({rtol} tolerance)")));
            }
        }
        Ok(())
    }

    /// One trial step of size `h`; `trial` and the last stage hold the candidate.
    fn try_step(&mut self, h: f64) -> Result<(f64, Evaluation), EvalError> {
        let n = self.y.len();
        let tab = self.tableau;
        let last = tab.a.len() - 1;
        let mut eval = None;
        for (s, row) in tab.a.iter().enumerate().skip(1) {
            let out = if s == last { &mut self.trial } else { &mut self.stage };
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in row.iter().enumerate() {
                    acc += a * self.k[j][i];
                }
                out[i] = self.y[i] + h * acc;
            }
            let (_, tail) = self.k.split_at_mut(s);
            let x = if s == last { &self.trial } else { &self.stage };
            let e = self.fs.derivatives(x, &self.act, &mut self.ws, &mut tail[0])?;
            if s == last {
                eval = Some(e);
            }
        }
        let mut sum = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (j, w) in tab.e.iter().enumerate() {
                e += w * self.k[j][i];
            }
            let sc = self.atol[i] + rtol_scale(self.fs.rtol, self.y[i], self.trial[i]);
            let r = h * e / sc;
            sum += r * r;
        }
        let err = (sum / n as f64).sqrt();
        if !err.is_finite() {
            return Err(EvalError::NonFinite);
        }
        Ok((err, eval.expect("tableau has at least two stages")))
    }
}

#[inline]
fn rtol_scale(rtol: f64, a: f64, b: f64) -> f64 {
    rtol * a.abs().max(b.abs())
}

/// When a run ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopCondition {
    /// Seaborne liquid volume that ends loading, m³.
    pub liquid_volume: f64,
    /// s
    pub time_limit: f64,
}

impl StopCondition {
    pub fn for_flowsheet(fs: &Flowsheet) -> Self {
        Self {
            liquid_volume: fs.stop_liquid_volume,
            time_limit: fs.time_limit,
        }
    }
}

/// Recorded channels, one entry per communication point.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// s
    pub time: Vec<f64>,
    /// Pa
    pub onshore_pressure: Vec<f64>,
    /// Pa
    pub seaborne_pressure: Vec<f64>,
    /// m³
    pub onshore_liquid_volume: Vec<f64>,
    /// m³
    pub seaborne_liquid_volume: Vec<f64>,
    /// m³/h
    pub train_volume_flow: Vec<f64>,
    /// kg/s
    pub train_mass_flow: Vec<f64>,
    /// kg/s
    pub bog_flow: Vec<f64>,
    /// kg/s
    pub vapor_return_flow: Vec<f64>,
    /// Hz
    pub pump_speed: Vec<f64>,
    pub throttle_opening: Vec<f64>,
    pub vapor_return_opening: Vec<f64>,
    pub bog_opening: Vec<f64>,
    /// W
    pub shaft_power: Vec<f64>,
    pub pump_efficiency: Vec<f64>,
    /// kg
    pub cumulative_bog: Vec<f64>,
    /// J
    pub cumulative_bog_enthalpy: Vec<f64>,
    /// J
    pub cumulative_shaft_energy: Vec<f64>,
    /// J, all ingress into tanks and lines
    pub cumulative_heat: Vec<f64>,
    /// kg in tanks and lines
    pub total_mass: Vec<f64>,
    /// J stored in tanks, line fluid and line walls
    pub total_energy: Vec<f64>,
    /// Points 1–4 (pump inlet, pump outlet, valve inlet, valve outlet).
    pub state_points: Vec<[FluidState; 4]>,
    /// W/K
    pub entropy: Vec<ElementEntropy>,
    /// The seaborne tank reached its stop level (otherwise the time limit hit).
    pub completed: bool,
    /// Records at which the pump could not overcome the tank pressure gap.
    pub starved_records: usize,
    /// The pump efficiency floor was reached at some record.
    pub efficiency_floored: bool,
    /// Denominators and reference temperature carried for the KPIs.
    pub transferred_mass: f64,
    pub transferred_volume: f64,
    pub t0: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    fn push(&mut self, sim: &Simulator<'_>, fs: &Flowsheet) -> Result<(), EvalError> {
        let e = sim.evaluation();
        let y = sim.state();
        let act = sim.actuators();
        let a = fs.layout().acc();
        self.time.push(sim.time());
        self.onshore_pressure.push(e.onshore.pressure);
        self.seaborne_pressure.push(e.seaborne.pressure);
        self.onshore_liquid_volume.push(e.onshore.liquid_volume);
        self.seaborne_liquid_volume.push(e.seaborne.liquid_volume);
        self.train_volume_flow.push(e.flows.train_volume_flow);
        self.train_mass_flow.push(e.flows.train_mass_flow);
        self.bog_flow.push(e.flows.bog);
        self.vapor_return_flow.push(e.flows.vapor_return);
        self.pump_speed.push(act.pump_speed);
        self.throttle_opening.push(act.throttle_opening);
        self.vapor_return_opening.push(act.vapor_return_opening);
        self.bog_opening.push(act.bog_opening);
        self.shaft_power.push(e.shaft_power);
        self.pump_efficiency.push(e.pump_efficiency);
        self.cumulative_bog.push(y[a]);
        self.cumulative_bog_enthalpy.push(y[a + 1]);
        self.cumulative_shaft_energy.push(y[a + 2]);
        self.cumulative_heat.push(y[a + 3]);
        self.total_mass.push(fs.total_mass(y));
        self.total_energy.push(fs.total_energy(y));
        self.starved_records += e.flows.starved as usize;
        self.efficiency_floored |= e.efficiency_floored && e.flows.train_mass_flow > 0.0;
        if fs.record_entropy {
            let (points, rates) = state_points(fs, e, y, sim.derivative())?;
            self.state_points.push(points);
            self.entropy.push(rates);
        }
        Ok(())
    }
}

/// Points 1–4 and per-element entropy production at one evaluation.
///
/// The line term is summed per cell with the holdup storage removed, so it
/// stays a production rate during transients:
/// `Σ ṁ(s_i − s_{i−1}) + M (dh_i/dt)/T_i − Q_i/T_w,i`.
pub(crate) fn state_points(
    fs: &Flowsheet,
    e: &Evaluation,
    y: &[f64],
    dy: &[f64],
) -> Result<([FluidState; 4], ElementEntropy), EvalError> {
    let l = fs.layout();
    let mdot = e.flows.train_mass_flow;
    let par = fs.lh2_pipe.parallel_count as f64;
    let p1 = e.onshore.liquid;
    let p2 = h2props::liquid_state(e.p2(), p1.enthalpy + e.pump_work)?;
    let m_cell = fs.cell_mass();
    let g = fs.lh2_pipe.wall_conductance_per_m * fs.lh2_pipe.cell_length();
    let mut upstream = p2.entropy;
    let mut pipe = 0.0;
    let mut last = p2;
    for i in 0..l.n {
        let st = h2props::liquid_state(fs.cell_pressure(e, i), y[l.h() + i])?;
        let tw = y[l.tw() + i];
        let q = g * (tw - st.temperature);
        pipe += mdot / par * (st.entropy - upstream) + m_cell * dy[l.h() + i] / st.temperature - q / tw;
        upstream = st.entropy;
        last = st;
    }
    let p3 = last;
    let p4 = h2props::state_ph(e.seaborne.pressure, p3.enthalpy)?;
    let rates = ElementEntropy {
        pump: mdot * (p2.entropy - p1.entropy),
        pipe: par * pipe,
        valve: if mdot > 0.0 { mdot * (p4.entropy - p3.entropy) } else { 0.0 },
    };
    Ok(([p1, p2, p3, p4], rates))
}

/// Closed-loop run from the flowsheet's initial state until `stop`.
pub fn integrate(fs: &Flowsheet, stop: &StopCondition) -> Result<Trajectory, SimError> {
    let mut sim = Simulator::new(fs)?;
    let mut controls = fs.controls.clone();
    let per_sample = (controls.sample_time / fs.comm_interval).round().max(1.0) as u64;
    let mut traj = Trajectory {
        transferred_mass: fs.transferred_mass,
        transferred_volume: fs.transferred_volume,
        t0: fs.t0,
        ..Trajectory::default()
    };
    let mut k: u64 = 0;
    loop {
        traj.push(&sim, fs).map_err(|e| sim.abort(e))?;
        let e = *sim.evaluation();
        if e.seaborne.liquid_volume >= stop.liquid_volume {
            traj.completed = true;
            break;
        }
        if sim.time() >= stop.time_limit {
            break;
        }
        if k.is_multiple_of(per_sample) {
            let act = controls.step(
                e.flows.train_volume_flow,
                e.onshore.pressure,
                e.seaborne.pressure,
            );
            sim.set_actuators(act)?;
        }
        // communication points on an integer grid, free of drift
        k += 1;
        let target = k as f64 * fs.comm_interval;
        sim.advance(target - sim.time())?;
    }
    Ok(traj)
}
