//! Loading KPIs, entropy and exergy accounting, TS state points and balance
//! checks computed from a finished trajectory.

use serde::{Deserialize, Serialize};

use super::Trajectory;

/// Per-element entropy production (W/K as a rate, J/K when integrated).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ElementEntropy {
    pub pump: f64,
    pub pipe: f64,
    pub valve: f64,
}

impl ElementEntropy {
    pub fn total(&self) -> f64 {
        self.pump + self.pipe + self.valve
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            pump: k * self.pump,
            pipe: k * self.pipe,
            valve: k * self.valve,
        }
    }

    pub fn min(&self) -> f64 {
        self.pump.min(self.pipe).min(self.valve)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KpiRecord {
    /// wt% of the transferred mass
    pub relative_bog: f64,
    /// kJ/m³ of transferred volume
    pub relative_power: f64,
    /// kg/s, time average over the run
    pub mean_bog_flow: f64,
    /// kg/s
    pub max_bog_flow: f64,
    /// h
    pub filling_time: f64,
    /// t
    pub total_bog: f64,
    /// MWh
    pub total_shaft_energy: f64,
    /// Loading reached the stop level before the time limit.
    pub completed: bool,
}

/// Relative BOG, wt%: liquefier-bound vapor over the transferred mass.
pub fn kpi_relative_bog(traj: &Trajectory) -> f64 {
    100.0 * traj.cumulative_bog.last().copied().unwrap_or(0.0) / traj.transferred_mass
}

/// Relative power, kJ/m³: shaft energy over the transferred volume.
pub fn kpi_relative_power(traj: &Trajectory) -> f64 {
    traj.cumulative_shaft_energy.last().copied().unwrap_or(0.0) / 1e3 / traj.transferred_volume
}

pub fn kpi_record(traj: &Trajectory) -> KpiRecord {
    let t_end = traj.time.last().copied().unwrap_or(0.0);
    let bog = traj.cumulative_bog.last().copied().unwrap_or(0.0);
    KpiRecord {
        relative_bog: kpi_relative_bog(traj),
        relative_power: kpi_relative_power(traj),
        mean_bog_flow: if t_end > 0.0 { bog / t_end } else { 0.0 },
        max_bog_flow: traj.bog_flow.iter().fold(0.0, |m: f64, &x| m.max(x)),
        filling_time: t_end / 3600.0,
        total_bog: bog / 1e3,
        total_shaft_energy: traj.cumulative_shaft_energy.last().copied().unwrap_or(0.0) / 3.6e9,
        completed: traj.completed,
    }
}

/// Trapezoidal integral of `y` over `t`.
pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

/// Record used as the steady loading snapshot: the one nearest mid-run.
/// `steady` is set when the train flow stays within 0.5% of its value over
/// the surrounding two minutes.
fn snapshot(traj: &Trajectory) -> (usize, bool) {
    let n = traj.len();
    if n == 0 {
        return (0, false);
    }
    let t_mid = 0.5 * traj.time[n - 1];
    let i = traj.time.partition_point(|&t| t < t_mid).min(n - 1);
    let q = traj.train_volume_flow[i];
    let window = traj
        .time
        .iter()
        .zip(&traj.train_volume_flow)
        .filter(|(t, _)| (**t - traj.time[i]).abs() <= 60.0);
    let mut count = 0;
    let mut steady = q > 0.0;
    for (_, &qq) in window {
        count += 1;
        steady &= (qq - q).abs() <= 5e-3 * q;
    }
    (i, steady && count > 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    /// s
    pub snapshot_time: f64,
    pub steady: bool,
    /// W/K at the snapshot
    pub rate: ElementEntropy,
    /// W at the snapshot
    pub exergy_destruction_rate: ElementEntropy,
    /// J/K over the run
    pub integrated: ElementEntropy,
    /// J over the run
    pub exergy_destroyed: ElementEntropy,
    /// W/K, ṁ(s₄ − s₁) at the snapshot; includes the entropy carried in by
    /// line heat ingress, unlike `rate`.
    pub state_point_rise: f64,
    /// K
    pub t0: f64,
}

impl EntropyReport {
    pub fn total_rate(&self) -> f64 {
        self.rate.total()
    }
}

/// `None` when the trajectory was recorded without entropy channels.
pub fn entropy_report(traj: &Trajectory) -> Option<EntropyReport> {
    if traj.entropy.len() != traj.len() || traj.is_empty() {
        return None;
    }
    let (i, steady) = snapshot(traj);
    let rate = traj.entropy[i];
    let col = |f: fn(&ElementEntropy) -> f64| -> Vec<f64> { traj.entropy.iter().map(f).collect() };
    let integrated = ElementEntropy {
        pump: trapezoid(&traj.time, &col(|e| e.pump)),
        pipe: trapezoid(&traj.time, &col(|e| e.pipe)),
        valve: trapezoid(&traj.time, &col(|e| e.valve)),
    };
    let pts = &traj.state_points[i];
    Some(EntropyReport {
        snapshot_time: traj.time[i],
        steady,
        rate,
        exergy_destruction_rate: rate.scaled(traj.t0),
        integrated,
        exergy_destroyed: integrated.scaled(traj.t0),
        state_point_rise: traj.train_mass_flow[i] * (pts[3].entropy - pts[0].entropy),
        t0: traj.t0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsPoint {
    /// 1 pump inlet, 2 pump outlet, 3 valve inlet, 4 valve outlet
    pub label: u8,
    /// J/(kg·K)
    pub entropy: f64,
    /// K
    pub temperature: f64,
    /// Pa
    pub pressure: f64,
    /// J/kg
    pub enthalpy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsDiagram {
    pub time: f64,
    /// False when the snapshot is still transient.
    pub steady: bool,
    pub points: [TsPoint; 4],
}

pub fn ts_diagram(traj: &Trajectory) -> Option<TsDiagram> {
    if traj.state_points.len() != traj.len() || traj.is_empty() {
        return None;
    }
    let (i, steady) = snapshot(traj);
    let pts = &traj.state_points[i];
    let mut points = [TsPoint {
        label: 0,
        entropy: 0.0,
        temperature: 0.0,
        pressure: 0.0,
        enthalpy: 0.0,
    }; 4];
    for (k, p) in pts.iter().enumerate() {
        points[k] = TsPoint {
            label: k as u8 + 1,
            entropy: p.entropy,
            temperature: p.temperature,
            pressure: p.pressure,
            enthalpy: p.enthalpy,
        };
    }
    Some(TsDiagram {
        time: traj.time[i],
        steady,
        points,
    })
}

/// Worst-case balance residuals over a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationCheck {
    /// max |ΔM + ∫ṁ_BOG| / M₀
    pub mass: f64,
    /// max |ΔE − (∫Q + ∫W − ∫ṁh_BOG)| / gross turnover
    pub energy: f64,
    /// W/K, smallest element entropy production over all records
    pub min_entropy_rate: f64,
}

pub fn conservation(traj: &Trajectory) -> ConservationCheck {
    let n = traj.len();
    if n == 0 {
        return ConservationCheck {
            mass: 0.0,
            energy: 0.0,
            min_entropy_rate: 0.0,
        };
    }
    let m0 = traj.total_mass[0];
    let e0 = traj.total_energy[0];
    let last = n - 1;
    let gross = traj.cumulative_heat[last] + traj.cumulative_shaft_energy[last]
        + traj.cumulative_bog_enthalpy[last].abs();
    let mut mass = 0.0f64;
    let mut energy = 0.0f64;
    for k in 0..n {
        mass = mass.max((traj.total_mass[k] + traj.cumulative_bog[k] - m0).abs() / m0);
        let net = traj.cumulative_heat[k] + traj.cumulative_shaft_energy[k]
            - traj.cumulative_bog_enthalpy[k];
        if gross > 0.0 {
            energy = energy.max((traj.total_energy[k] - e0 - net).abs() / gross);
        }
    }
    let min_entropy_rate = traj.entropy.iter().map(ElementEntropy::min).fold(f64::INFINITY, f64::min);
    ConservationCheck {
        mass,
        energy,
        min_entropy_rate: if min_entropy_rate.is_finite() { min_entropy_rate } else { 0.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(bog: f64, power: f64) -> Trajectory {
        let time: Vec<f64> = (0..=10).map(|i| i as f64 * 3600.0).collect();
        Trajectory {
            cumulative_bog: time.iter().map(|t| bog * t).collect(),
            cumulative_shaft_energy: time.iter().map(|t| power * t).collect(),
            bog_flow: vec![bog; time.len()],
            time,
            transferred_mass: 2812e3,
            transferred_volume: 40_000.0,
            t0: 298.15,
            ..Trajectory::default()
        }
    }

    #[test]
    fn relative_bog_reference_values() {
        assert_eq!(kpi_relative_bog(&flat(0.0, 0.0)), 0.0);
        // 2.812 t → 0.1 wt%
        let t = flat(2812.0 / 36000.0, 0.0);
        assert!((kpi_relative_bog(&t) - 0.1).abs() < 1e-12);
        let t = flat(23.34e3 / 36000.0, 0.0);
        assert!((kpi_relative_bog(&t) - 0.83).abs() < 1e-3);
    }

    #[test]
    fn relative_power_reference_values() {
        assert_eq!(kpi_relative_power(&flat(0.0, 0.0)), 0.0);
        // 12.9 MWh over four trains of 40000 m³
        let e = 12.9e6 * 3600.0 / 4.0;
        let t = flat(0.0, e / 36000.0);
        assert!((kpi_relative_power(&t) - 290.25).abs() < 1e-9);
        let e = 3.6e6 * 3600.0 / 4.0;
        assert!((kpi_relative_power(&flat(0.0, e / 36000.0)) - 81.0).abs() < 1e-9);
    }

    #[test]
    fn trapezoid_is_exact_for_linear_data() {
        let t = [0.0, 1.0, 3.0];
        assert_eq!(trapezoid(&t, &[1.0, 2.0, 4.0]), 1.5 + 6.0);
    }
}
