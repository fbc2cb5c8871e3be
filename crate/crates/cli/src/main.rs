//! `lh2sim`: run LH2 ship-loading scenarios from a TOML configuration.
//!
//! Exit codes: 0 success, 1 invalid configuration or arguments, 2 simulation
//! abort or output failure, 3 more than 5% of UGSA samples failed.

mod campaign;
mod files;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use lh2_core::config::{PumpMode, ScenarioConfig};
use lh2_core::sim::{
    build_flowsheet, entropy_report, identify_loops, integrate, kpi_record, sweep, ts_diagram,
    write_entropy_csv, write_kpi_json, write_trajectory_csv, write_ts_csv, OutputHeader,
    StopCondition, SweepParameter,
};

#[derive(Parser)]
#[command(name = "lh2sim", version, about = "LH2 ship-loading simulator")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Scenario file (TOML). Missing sections take the nominal defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one value, e.g. `--set control.mode=fixed-speed`. Repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Sampling seed; replaces `ugsa.seed` and is recorded in every output.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps and campaigns (default: one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, default_value = "runs", value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one loading and write trajectory, KPI and entropy files.
    Simulate,
    /// Run one scenario per value of a parameter, for each pump mode.
    Sweep {
        /// seaborne-pressure (bara), flow-setpoint (m³/h) or pump-mode.
        #[arg(long)]
        parameter: SweepParameter,
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        values: Vec<f64>,
        /// Pump modes to run (default: both). Ignored for pump-mode sweeps.
        #[arg(long, value_delimiter = ',', value_parser = parse_mode)]
        modes: Vec<PumpMode>,
    },
    /// Uncertainty and sensitivity campaign; resumes from existing records.
    Ugsa {
        /// Samples per parallel batch; records are persisted after each one.
        #[arg(long, default_value_t = 32)]
        chunk: usize,
    },
    /// Open-loop step tests per control loop and SIMC settings.
    Tune,
}

fn parse_mode(s: &str) -> Result<PumpMode, String> {
    match s {
        "split-range" => Ok(PumpMode::SplitRange),
        "fixed-speed" => Ok(PumpMode::FixedSpeed),
        other => Err(format!("unknown pump mode `{other}` (split-range, fixed-speed)")),
    }
}

/// A failure tagged with its exit code.
pub(crate) struct Failure {
    code: u8,
    error: anyhow::Error,
}

pub(crate) fn invalid(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

pub(crate) fn aborted(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    let cfg = load_config(g)?;
    if let Some(n) = g.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(invalid)?;
    }
    match cli.command {
        Command::Simulate => simulate(&cfg, &g.out_dir),
        Command::Sweep {
            parameter,
            values,
            modes,
        } => run_sweep(&cfg, &g.out_dir, parameter, &values, &modes),
        Command::Ugsa { chunk } => campaign::run(&cfg, &g.out_dir, chunk.max(1)),
        Command::Tune => tune(&cfg, &g.out_dir),
    }
}

fn load_config(g: &Global) -> Result<ScenarioConfig, Failure> {
    let text = match &g.config {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))
            .map_err(invalid)?,
        None => String::new(),
    };
    let mut overrides = g.overrides.clone();
    if let Some(seed) = g.seed {
        overrides.push(format!("ugsa.seed={seed}"));
    }
    ScenarioConfig::from_toml_with_overrides(&text, &overrides).map_err(invalid)
}

fn header(cfg: &ScenarioConfig) -> OutputHeader {
    OutputHeader::new(cfg.hash(), cfg.ugsa.seed)
}

fn simulate(cfg: &ScenarioConfig, out_dir: &Path) -> Result<(), Failure> {
    let fs = build_flowsheet(cfg).map_err(aborted)?;
    let traj = integrate(&fs, &StopCondition::for_flowsheet(&fs)).map_err(aborted)?;
    let kpi = kpi_record(&traj);
    let h = header(cfg);

    let dir = files::run_dir(out_dir, &cfg.hash()).map_err(aborted)?;
    files::write_text(&dir.join("config.resolved"), &cfg.to_toml()).map_err(aborted)?;
    files::write_with(&dir.join("trajectory.csv"), |w| write_trajectory_csv(w, &h, &traj)).map_err(aborted)?;
    files::write_with(&dir.join("kpi.json"), |w| write_kpi_json(w, &h, &kpi)).map_err(aborted)?;
    if let Some(report) = entropy_report(&traj) {
        files::write_with(&dir.join("entropy.csv"), |w| write_entropy_csv(w, &h, &report)).map_err(aborted)?;
    }
    if let Some(ts) = ts_diagram(&traj) {
        files::write_with(&dir.join("tsdiagram.csv"), |w| write_ts_csv(w, &h, &ts)).map_err(aborted)?;
    }

    println!("{}", dir.display());
    println!(
        "mode={} relative_bog={:.4} wt% relative_power={:.2} kJ/m3 filling_time={:.2} h",
        cfg.control.mode, kpi.relative_bog, kpi.relative_power, kpi.filling_time
    );
    if !kpi.completed {
        eprintln!("warning: loading did not finish within {} h", cfg.run.time_limit);
    }
    Ok(())
}

fn run_sweep(
    cfg: &ScenarioConfig,
    out_dir: &Path,
    parameter: SweepParameter,
    values: &[f64],
    modes: &[PumpMode],
) -> Result<(), Failure> {
    let modes = match (parameter, modes.is_empty()) {
        (SweepParameter::PumpMode, _) => vec![cfg.control.mode],
        (_, true) => vec![PumpMode::SplitRange, PumpMode::FixedSpeed],
        (_, false) => modes.to_vec(),
    };
    let mut rows = Vec::new();
    for mode in modes {
        let mut base = cfg.clone();
        base.control.mode = mode;
        rows.extend(sweep(&base, parameter, values));
    }

    let dir = files::run_dir(out_dir, &cfg.hash()).map_err(aborted)?;
    files::write_text(&dir.join("config.resolved"), &cfg.to_toml()).map_err(aborted)?;
    files::write_csv(&dir.join("sweep.csv"), &header(cfg), |w| {
        w.write_record(
            ["parameter", "value", "mode"]
                .into_iter()
                .chain(files::KPI_COLUMNS.iter().copied())
                .chain(["error"]),
        )?;
        for r in &rows {
            let mut rec = vec![parameter.to_string(), r.value.to_string(), r.mode.to_string()];
            rec.extend(files::kpi_fields(r.kpi.as_ref()));
            rec.push(r.error.clone().unwrap_or_default());
            w.write_record(&rec)?;
        }
        Ok(())
    })
    .map_err(aborted)?;

    println!("{}", dir.display());
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} sweep points failed", rows.len());
    }
    Ok(())
}

fn tune(cfg: &ScenarioConfig, out_dir: &Path) -> Result<(), Failure> {
    let rows = identify_loops(cfg);
    let dir = files::run_dir(out_dir, &cfg.hash()).map_err(aborted)?;
    files::write_text(&dir.join("config.resolved"), &cfg.to_toml()).map_err(aborted)?;
    files::write_csv(&dir.join("tuning.csv"), &header(cfg), |w| {
        w.write_record([
            "loop",
            "step",
            "gain",
            "time_constant_s",
            "dead_time_s",
            "tau_c_s",
            "kc",
            "integral_time_s",
            "derivative_time_s",
            "error",
        ])?;
        for r in &rows {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            w.write_record([
                r.loop_id.to_string(),
                r.step.to_string(),
                opt(r.plant.map(|p| p.gain)),
                opt(r.plant.map(|p| p.time_constant)),
                opt(r.plant.map(|p| p.dead_time)),
                r.tau_c.to_string(),
                opt(r.params.map(|p| p.gain)),
                opt(r.params.map(|p| p.integral_time)),
                opt(r.params.map(|p| p.derivative_time)),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        Ok(())
    })
    .map_err(aborted)?;

    println!("{}", dir.display());
    for r in &rows {
        match (&r.plant, &r.error) {
            (Some(p), _) => println!(
                "{:<16} k={:.4e} tau1={:.1} s theta={:.1} s",
                r.loop_id.to_string(),
                p.gain,
                p.time_constant,
                p.dead_time
            ),
            (None, Some(e)) => println!("{:<16} unidentified: {e}", r.loop_id.to_string()),
            (None, None) => return Err(aborted(anyhow!("loop {} returned no result", r.loop_id))),
        }
    }
    Ok(())
}
