//! Python bindings: scenario configuration, single runs, sweeps and the
//! sampling and sensitivity pieces of the uncertainty campaign.
//!
//! Long computations release the GIL. Units follow the core crate: pressures
//! in Pa on trajectories and in bara in the configuration.

use lh2_core::config::ScenarioConfig;
use lh2_core::h2props;
use lh2_core::sim::{
    build_flowsheet, conservation, entropy_report, integrate, kpi_record, write_trajectory_csv,
    ElementEntropy, KpiRecord, OutputHeader, StopCondition, SweepParameter, Trajectory,
};
use lh2_core::ugsa::{self, GsaOptions, IndexEstimate, ParameterSpace, SampleMatrix};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl ToString) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Resolved scenario configuration. Missing sections take the nominal defaults.
#[pyclass(name = "Config", frozen, from_py_object)]
#[derive(Clone)]
struct Config {
    inner: ScenarioConfig,
}

#[pymethods]
impl Config {
    /// `toml` is a scenario file's text; `overrides` are `section.key=value` strings.
    #[new]
    #[pyo3(signature = (toml = "", overrides = Vec::new()))]
    fn new(toml: &str, overrides: Vec<String>) -> PyResult<Self> {
        ScenarioConfig::from_toml_with_overrides(toml, &overrides)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    /// A copy with further `section.key=value` overrides applied.
    fn with_overrides(&self, overrides: Vec<String>) -> PyResult<Self> {
        Self::new(&self.inner.to_toml(), overrides)
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }

    #[getter]
    fn hash(&self) -> String {
        self.inner.hash()
    }

    #[getter]
    fn mode(&self) -> String {
        self.inner.control.mode.to_string()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.ugsa.seed
    }

    /// Names of the uncertain parameters sampled by the campaign.
    #[getter]
    fn parameters(&self) -> Vec<(String, f64, f64)> {
        self.inner
            .ugsa
            .parameters
            .iter()
            .map(|p| (p.name.clone(), p.low, p.high))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Config(hash={}, mode={})", self.inner.hash(), self.inner.control.mode)
    }
}

fn kpi_dict<'py>(py: Python<'py>, k: &KpiRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("relative_bog", k.relative_bog)?;
    d.set_item("relative_power", k.relative_power)?;
    d.set_item("mean_bog_flow", k.mean_bog_flow)?;
    d.set_item("max_bog_flow", k.max_bog_flow)?;
    d.set_item("filling_time", k.filling_time)?;
    d.set_item("total_bog", k.total_bog)?;
    d.set_item("total_shaft_energy", k.total_shaft_energy)?;
    d.set_item("completed", k.completed)?;
    Ok(d)
}

fn optional_kpi<'py>(py: Python<'py>, k: Option<&KpiRecord>) -> PyResult<Option<Bound<'py, PyDict>>> {
    k.map(|k| kpi_dict(py, k)).transpose()
}

/// Result of one loading simulation.
#[pyclass(name = "Run", frozen)]
struct Run {
    config: ScenarioConfig,
    traj: Trajectory,
}

#[pymethods]
impl Run {
    #[getter]
    fn completed(&self) -> bool {
        self.traj.completed
    }

    /// KPI record: wt%, kJ/m³, kg/s, h, t, MWh.
    fn kpi<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        kpi_dict(py, &kpi_record(&self.traj))
    }

    /// Relative residuals of the mass and energy balances and the smallest
    /// element entropy production (W/K).
    fn conservation<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = conservation(&self.traj);
        let d = PyDict::new(py);
        d.set_item("mass", c.mass)?;
        d.set_item("energy", c.energy)?;
        d.set_item("min_entropy_rate", c.min_entropy_rate)?;
        Ok(d)
    }

    /// Entropy and exergy accounting per element (pump, pipe, valve), if the
    /// run recorded entropy channels. Rates are taken at the snapshot time.
    fn entropy<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyDict>>> {
        let Some(r) = entropy_report(&self.traj) else {
            return Ok(None);
        };
        let split = |e: ElementEntropy| -> PyResult<Bound<'py, PyDict>> {
            let d = PyDict::new(py);
            d.set_item("pump", e.pump)?;
            d.set_item("pipe", e.pipe)?;
            d.set_item("valve", e.valve)?;
            Ok(d)
        };
        let d = PyDict::new(py);
        d.set_item("snapshot_time", r.snapshot_time)?;
        d.set_item("steady", r.steady)?;
        d.set_item("rate", split(r.rate)?)?;
        d.set_item("exergy_destruction_rate", split(r.exergy_destruction_rate)?)?;
        d.set_item("integrated", split(r.integrated)?)?;
        d.set_item("exergy_destroyed", split(r.exergy_destroyed)?)?;
        Ok(Some(d))
    }

    /// Recorded channels as columns of equal length.
    fn channels<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let t = &self.traj;
        let d = PyDict::new(py);
        let cols: [(&str, &Vec<f64>); 16] = [
            ("time", &t.time),
            ("onshore_pressure", &t.onshore_pressure),
            ("seaborne_pressure", &t.seaborne_pressure),
            ("onshore_liquid_volume", &t.onshore_liquid_volume),
            ("seaborne_liquid_volume", &t.seaborne_liquid_volume),
            ("train_volume_flow", &t.train_volume_flow),
            ("train_mass_flow", &t.train_mass_flow),
            ("bog_flow", &t.bog_flow),
            ("vapor_return_flow", &t.vapor_return_flow),
            ("pump_speed", &t.pump_speed),
            ("throttle_opening", &t.throttle_opening),
            ("vapor_return_opening", &t.vapor_return_opening),
            ("bog_opening", &t.bog_opening),
            ("shaft_power", &t.shaft_power),
            ("pump_efficiency", &t.pump_efficiency),
            ("cumulative_bog", &t.cumulative_bog),
        ];
        for (name, col) in cols {
            d.set_item(name, col.clone())?;
        }
        Ok(d)
    }

    /// The trajectory in the same CSV layout the command-line tool writes.
    fn trajectory_csv(&self) -> PyResult<String> {
        let header = OutputHeader::new(self.config.hash(), self.config.ugsa.seed);
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &header, &self.traj).map_err(runtime_err)?;
        String::from_utf8(buf).map_err(runtime_err)
    }

    fn __len__(&self) -> usize {
        self.traj.len()
    }
}

/// Simulate one loading until the stop level or the time limit.
#[pyfunction]
fn simulate(py: Python<'_>, config: Config) -> PyResult<Run> {
    let cfg = config.inner;
    py.detach(move || -> Result<Run, String> {
        let fs = build_flowsheet(&cfg).map_err(|e| e.to_string())?;
        let traj = integrate(&fs, &StopCondition::for_flowsheet(&fs)).map_err(|e| e.to_string())?;
        Ok(Run { config: cfg, traj })
    })
    .map_err(runtime_err)
}

/// One run per value. `parameter` is `seaborne-pressure` (bara),
/// `flow-setpoint` (m³/h) or `pump-mode` (0 split-range, 1 fixed-speed).
/// Failed points carry an `error` entry and `kpi = None`.
#[pyfunction]
fn sweep<'py>(py: Python<'py>, config: Config, parameter: &str, values: Vec<f64>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let parameter: SweepParameter = parameter.parse().map_err(PyValueError::new_err)?;
    let rows = py.detach(|| lh2_core::sim::sweep(&config.inner, parameter, &values));
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("value", r.value)?;
            d.set_item("mode", r.mode.to_string())?;
            d.set_item("kpi", optional_kpi(py, r.kpi.as_ref())?)?;
            d.set_item("error", r.error.clone())?;
            Ok(d)
        })
        .collect()
}

/// Latin hypercube design over the configured parameter ranges.
/// Returns `(names, rows)` in physical units.
#[pyfunction]
#[pyo3(signature = (config, n = None, seed = None))]
fn lhs_sample(config: &Config, n: Option<usize>, seed: Option<u64>) -> PyResult<(Vec<String>, Vec<Vec<f64>>)> {
    let u = &config.inner.ugsa;
    let space = ParameterSpace::for_simulation(u.parameters.clone()).map_err(value_err)?;
    let m = ugsa::lhs_sample(&space, n.unwrap_or(u.samples), seed.unwrap_or(u.seed)).map_err(value_err)?;
    Ok((m.names, m.rows))
}

/// Simulate each row; returns one KPI dict per row, or `None` where the run
/// failed or did not finish.
#[pyfunction]
fn run_samples<'py>(
    py: Python<'py>,
    config: Config,
    names: Vec<String>,
    rows: Vec<Vec<f64>>,
) -> PyResult<Vec<Option<Bound<'py, PyDict>>>> {
    if let Some(r) = rows.iter().find(|r| r.len() != names.len()) {
        return Err(value_err(format!("row has {} values for {} names", r.len(), names.len())));
    }
    let samples = SampleMatrix {
        names,
        rows,
        seed: config.inner.ugsa.seed,
        scheme: "given".into(),
    };
    let indices: Vec<usize> = (0..samples.len()).collect();
    let out = py.detach(|| ugsa::run_batch(&config.inner, &samples, &indices));
    out.iter().map(|o| optional_kpi(py, o.kpi.as_ref())).collect()
}

fn estimates(v: &[IndexEstimate]) -> Vec<(f64, f64, f64)> {
    v.iter().map(|e| (e.value, e.ci_low, e.ci_high)).collect()
}

/// Moment-independent δ and first-order S1 indices from given data, with
/// bootstrap intervals. Each index is `(value, ci_low, ci_high)`.
#[pyfunction]
#[pyo3(signature = (x, y, resamples = 100, seed = 0, confidence = 0.95))]
fn sensitivity<'py>(
    py: Python<'py>,
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    resamples: usize,
    seed: u64,
    confidence: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = GsaOptions {
        resamples,
        seed,
        confidence,
        ..GsaOptions::default()
    };
    let s = py.detach(|| ugsa::sensitivity(&x, &y, &opts)).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("delta", estimates(&s.delta))?;
    d.set_item("s1", estimates(&s.s1))?;
    d.set_item("classes", s.classes)?;
    d.set_item("degenerate", s.degenerate)?;
    Ok(d)
}

/// Saturated parahydrogen at `pressure` (Pa): temperature (K), liquid and
/// vapor density (kg/m³) and enthalpy (J/kg).
#[pyfunction]
fn saturation<'py>(py: Python<'py>, pressure: f64) -> PyResult<Bound<'py, PyDict>> {
    let s = h2props::sat_point(pressure).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("temperature", s.temperature)?;
    d.set_item("liquid_density", s.liquid.density)?;
    d.set_item("vapor_density", s.vapor.density)?;
    d.set_item("liquid_enthalpy", s.liquid.enthalpy)?;
    d.set_item("vapor_enthalpy", s.vapor.enthalpy)?;
    d.set_item("heat_of_vaporization", s.heat_of_vaporization())?;
    Ok(d)
}

#[pymodule]
fn lh2py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Config>()?;
    m.add_class::<Run>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(lhs_sample, m)?)?;
    m.add_function(wrap_pyfunction!(run_samples, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity, m)?)?;
    m.add_function(wrap_pyfunction!(saturation, m)?)?;
    Ok(())
}
