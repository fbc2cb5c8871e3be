//! Uncertainty and global sensitivity analysis: Latin hypercube sampling,
//! batch simulation, given-data sensitivity indices and output statistics.

mod delta;
mod stats;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, ParameterRange, ScenarioConfig};
use crate::equipment::{overall_u_for_bor, TankGeometry};
use crate::h2props::{self, PropsError};
use crate::sim::{build_flowsheet, integrate, kpi_record, KpiRecord, StopCondition};

pub use delta::{
    class_count, delta_indices, sensitivity, s1_indices, GsaOptions, IndexEstimate, Sensitivity,
};
pub use stats::{histogram, kpi_statistics, Histogram, KpiStatistics};

/// Parameter names accepted in the sampled space.
pub const KNOWN_PARAMETERS: &[&str] = &[
    "pump_efficiency",
    "pipe_heat_ingress",
    "pipe_roughness",
    "flow_setpoint",
    "onshore_bor",
    "seaborne_bor",
];

/// Boil-off rates are quoted for a full tank (10% ullage) of saturated
/// liquid at this pressure, Pa.
pub const BOR_REFERENCE_PRESSURE: f64 = 1.1e5;
pub const BOR_ULLAGE: f64 = 0.1;

#[derive(Debug, Error)]
pub enum UgsaError {
    #[error("parameter `{name}`: need finite low < high, got [{low}, {high}]")]
    BadRange { name: String, low: f64, high: f64 },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("duplicate parameter `{0}`")]
    DuplicateParameter(String),
    #[error("need at least {min} samples, got {n}")]
    TooFewSamples { n: usize, min: usize },
    #[error("sample row {row} has {got} values for {expected} parameters")]
    RowWidth { row: usize, got: usize, expected: usize },
    #[error("{x} sample rows but {y} outputs")]
    LengthMismatch { x: usize, y: usize },
    #[error("non-finite value in sample row {0}")]
    NonFinite(usize),
    #[error("{name} index {value} outside its admissible range")]
    IndexOutOfRange { name: &'static str, value: f64 },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Props(#[from] PropsError),
}

/// Independent uniform inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpace {
    params: Vec<ParameterRange>,
}

impl ParameterSpace {
    pub fn new(params: Vec<ParameterRange>) -> Result<Self, UgsaError> {
        for (k, p) in params.iter().enumerate() {
            if !(p.low.is_finite() && p.high.is_finite() && p.low < p.high) {
                return Err(UgsaError::BadRange {
                    name: p.name.clone(),
                    low: p.low,
                    high: p.high,
                });
            }
            if params[..k].iter().any(|q| q.name == p.name) {
                return Err(UgsaError::DuplicateParameter(p.name.clone()));
            }
        }
        Ok(Self { params })
    }

    /// Space whose names must all map onto the flowsheet.
    pub fn for_simulation(params: Vec<ParameterRange>) -> Result<Self, UgsaError> {
        if let Some(p) = params.iter().find(|p| !KNOWN_PARAMETERS.contains(&p.name.as_str())) {
            return Err(UgsaError::UnknownParameter(p.name.clone()));
        }
        Self::new(params)
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[ParameterRange] {
        &self.params
    }

    pub fn names(&self) -> Vec<&str> {
        self.params.iter().map(|p| p.name.as_str()).collect()
    }

    pub fn contains(&self, row: &[f64]) -> bool {
        row.len() == self.dim()
            && row.iter().zip(&self.params).all(|(v, p)| (p.low..=p.high).contains(v))
    }
}

/// `n × d` design in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMatrix {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub seed: u64,
    pub scheme: String,
}

impl SampleMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

/// Latin hypercube: per dimension, one point uniformly placed in each of
/// `n` equal-probability strata, strata order independently shuffled.
pub fn lhs_sample(space: &ParameterSpace, n: usize, seed: u64) -> Result<SampleMatrix, UgsaError> {
    if n < 2 {
        return Err(UgsaError::TooFewSamples { n, min: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![vec![0.0; space.dim()]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for (j, p) in space.params.iter().enumerate() {
        strata.shuffle(&mut rng);
        for (row, &s) in rows.iter_mut().zip(&strata) {
            let u = (s as f64 + rng.gen::<f64>()) / n as f64;
            // u < 1 strictly, but rounding in the affine map can touch `high`
            row[j] = (p.low + u * (p.high - p.low)).min(p.high);
        }
    }
    Ok(SampleMatrix {
        names: space.names().iter().map(|s| s.to_string()).collect(),
        rows,
        seed,
        scheme: "latin-hypercube".into(),
    })
}

/// Overall U (W/m²K) of a sphere of `volume` m³ with boil-off rate `bor` %/day.
pub fn overall_u_from_bor(volume: f64, ambient_t: f64, bor: f64) -> Result<f64, UgsaError> {
    let sat = h2props::sat_point(BOR_REFERENCE_PRESSURE)?;
    let geometry = TankGeometry::sphere(volume, 0.0, ambient_t, BOR_REFERENCE_PRESSURE);
    Ok(overall_u_for_bor(&geometry, bor, &sat, BOR_ULLAGE))
}

/// Set one named parameter on `cfg`.
pub fn apply_parameter(cfg: &mut ScenarioConfig, name: &str, value: f64) -> Result<(), UgsaError> {
    match name {
        "pump_efficiency" => cfg.pump.peak_efficiency = value,
        "pipe_heat_ingress" => cfg.lh2_pipe.heat_ingress = value,
        "pipe_roughness" => cfg.lh2_pipe.roughness = value,
        "flow_setpoint" => cfg.control.flow_setpoint = value,
        "onshore_bor" => {
            let t = &cfg.onshore_tank;
            cfg.onshore_tank.overall_u = overall_u_from_bor(t.volume, t.ambient_t, value)?;
        }
        "seaborne_bor" => {
            let t = &cfg.seaborne_tank;
            cfg.seaborne_tank.overall_u = overall_u_from_bor(t.volume, t.ambient_t, value)?;
        }
        other => return Err(UgsaError::UnknownParameter(other.to_string())),
    }
    Ok(())
}

/// Configuration for one sample row.
pub fn sample_config(base: &ScenarioConfig, names: &[String], row: &[f64]) -> Result<ScenarioConfig, UgsaError> {
    let mut cfg = base.clone();
    for (name, &v) in names.iter().zip(row) {
        apply_parameter(&mut cfg, name, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Outcome of one sample; failures carry the reason instead of a record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub index: usize,
    pub kpi: Option<KpiRecord>,
    pub error: Option<String>,
}

impl SampleOutcome {
    pub fn failed(&self) -> bool {
        self.kpi.is_none()
    }
}

/// Simulate one sample row. Entropy channels are not recorded.
pub fn run_sample(base: &ScenarioConfig, names: &[String], index: usize, row: &[f64]) -> SampleOutcome {
    let result = sample_config(base, names, row)
        .map_err(|e| e.to_string())
        .and_then(|mut cfg| {
            cfg.run.record_entropy = false;
            let fs = build_flowsheet(&cfg).map_err(|e| e.to_string())?;
            let traj = integrate(&fs, &StopCondition::for_flowsheet(&fs)).map_err(|e| e.to_string())?;
            let kpi = kpi_record(&traj);
            if kpi.completed {
                Ok(kpi)
            } else {
                Err(format!("loading incomplete at the {} h time limit", cfg.run.time_limit))
            }
        });
    match result {
        Ok(kpi) => SampleOutcome {
            index,
            kpi: Some(kpi),
            error: None,
        },
        Err(e) => SampleOutcome {
            index,
            kpi: None,
            error: Some(e),
        },
    }
}

/// Run `indices` of `samples` in parallel on the current rayon pool.
/// Results come back sorted by sample index.
pub fn run_batch(base: &ScenarioConfig, samples: &SampleMatrix, indices: &[usize]) -> Vec<SampleOutcome> {
    let mut out: Vec<SampleOutcome> = indices
        .par_iter()
        .map(|&i| run_sample(base, &samples.names, i, &samples.rows[i]))
        .collect();
    out.sort_by_key(|o| o.index);
    out
}
