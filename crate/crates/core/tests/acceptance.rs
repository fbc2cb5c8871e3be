//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line with the
//! measured values and the band it was held to.
//!
//! The criteria share one lock so that the timing checks are not disturbed by
//! other simulations running in the same process.

mod common;

use std::io::Write;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

use lh2_core::config::{PumpMode, ScenarioConfig};
use lh2_core::equipment::{
    boil_off_rate, friction_factor, tank_flash, tank_heat_ingress, TankGeometry, TankState,
};
use lh2_core::h2props::{sat_point, sat_pressure, sat_temperature};
use lh2_core::sim::{
    build_flowsheet, conservation, entropy_report, integrate, kpi_record, sweep, ts_diagram,
    write_entropy_csv, write_kpi_json, write_trajectory_csv, write_ts_csv, KpiRecord,
    OutputHeader, StopCondition, SweepParameter, Trajectory,
};
use lh2_core::ugsa::{
    lhs_sample, run_batch, sensitivity, GsaOptions, ParameterSpace, Sensitivity,
};

fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

/// Writes straight to stderr so the line shows up without `--nocapture`.
fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    let line = format!("{} [{id}] {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn config(overrides: &[String]) -> ScenarioConfig {
    ScenarioConfig::from_toml_with_overrides("", overrides).unwrap()
}

fn simulate(cfg: &ScenarioConfig) -> Trajectory {
    let fs = build_flowsheet(cfg).unwrap();
    integrate(&fs, &StopCondition::for_flowsheet(&fs)).unwrap()
}

/// Nominal runs at FC 3250 m³/h and ST 1.15 bara, with wall times.
struct Nominal {
    split: Trajectory,
    fixed: Trajectory,
    seconds: f64,
}

fn nominal() -> &'static Nominal {
    static RUNS: OnceLock<Nominal> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let base = ["control.flow_setpoint=3250".to_string(), "seaborne_tank.max_pressure=1.15".to_string()];
        let with = |mode: &str| {
            let mut o = base.to_vec();
            o.push(format!("control.mode={mode}"));
            simulate(&config(&o))
        };
        let split = with("split-range");
        let fixed = with("fixed-speed");
        Nominal {
            split,
            fixed,
            seconds: start.elapsed().as_secs_f64(),
        }
    })
}

#[test]
fn c01_conservation() {
    let _g = serial();
    let n = nominal();
    let extra = [
        simulate(&config(&["control.mode=fixed-speed".into(), "seaborne_tank.max_pressure=1.35".into()])),
        simulate(&config(&["control.mode=split-range".into(), "control.flow_setpoint=3585".into()])),
    ];
    let (mut mass, mut energy, mut entropy) = (0.0f64, 0.0f64, f64::INFINITY);
    for t in [&n.split, &n.fixed].into_iter().chain(extra.iter()) {
        let c = conservation(t);
        mass = mass.max(c.mass);
        energy = energy.max(c.energy);
        entropy = entropy.min(c.min_entropy_rate);
    }
    let pass = mass <= 1e-6 && energy <= 1e-3 && entropy >= -1e-9;
    verdict(
        1,
        "conservation",
        pass,
        &format!("4 runs, mass {mass:.2e} (<= 1e-6), energy {energy:.2e} (<= 1e-3), min entropy rate {entropy:.3e} W/K (>= -1e-9)"),
    );
}

/// Colebrook by fixed-point iteration on 1/√f.
fn colebrook(re: f64, rr: f64) -> f64 {
    let mut x = 8.0f64;
    for _ in 0..200 {
        x = -2.0 * (rr / 3.7 + 2.51 * x / re).log10();
    }
    1.0 / (x * x)
}

#[test]
fn c02_property_oracles() {
    let _g = serial();
    let mut notes = Vec::new();

    let s = sat_point(1.1e5).unwrap();
    let anchors = [
        ("T_sat", s.temperature, 20.55),
        ("rho_l", s.liquid.density, 70.505),
        ("h_fg", s.heat_of_vaporization() / 1e3, 444.7),
    ];
    let anchor_err = anchors.iter().map(|(_, got, want)| (got / want - 1.0).abs()).fold(0.0, f64::max);
    notes.push(format!("anchors max rel err {:.3}% (<= 0.2%)", 100.0 * anchor_err));

    // finite-difference dT/dP across the table range
    let mut cc_err = 0.0f64;
    for k in 0..=40 {
        let p = 0.15e5 * (9.5e5f64 / 0.15e5).powf(k as f64 / 40.0);
        let dp = 1e-4 * p;
        let dtdp = (sat_temperature(p + dp).unwrap() - sat_temperature(p - dp).unwrap()) / (2.0 * dp);
        let sp = sat_point(p).unwrap();
        let dv = 1.0 / sp.vapor.density - 1.0 / sp.liquid.density;
        let h = sp.temperature * dv / dtdp;
        cc_err = cc_err.max((h / sp.heat_of_vaporization() - 1.0).abs());
    }
    notes.push(format!("Clausius-Clapeyron max rel err {:.2}% (<= 3%)", 100.0 * cc_err));

    let mut sj_err = 0.0f64;
    for i in 0..=40 {
        let re = 5e3 * (1e8f64 / 5e3).powf(i as f64 / 40.0);
        for j in 0..=20 {
            let rr = 1e-6 * (1e4f64).powf(j as f64 / 20.0);
            sj_err = sj_err.max((friction_factor(re, rr) / colebrook(re, rr) - 1.0).abs());
        }
    }
    notes.push(format!("Swamee-Jain vs Colebrook max rel err {:.2}% (<= 3%)", 100.0 * sj_err));

    // brute-force flash: scan T on a 1 mK grid for the two-phase state whose
    // specific internal energy matches the inventory at the given volume
    let mut flash_err = 0.0f64;
    for (case, &(p_bar, fill, vol)) in [
        (1.05, 0.011, 45_000.0),
        (1.15, 0.5, 45_000.0),
        (1.3, 0.9, 50_000.0),
        (1.8, 0.3, 5_000.0),
        (2.5, 0.7, 800.0),
        (0.8, 0.2, 20_000.0),
    ]
    .iter()
    .enumerate()
    {
        let geo = TankGeometry::sphere(vol, 0.02, 298.15, 4e5);
        let inv = TankState::from_saturation(p_bar * 1e5, fill * vol, &geo).unwrap();
        let flashed = tank_flash(&inv, &geo).unwrap();
        let (v, u) = (vol / inv.total_mass, inv.total_internal_energy / inv.total_mass);
        let (mut best_t, mut best_r) = (f64::NAN, f64::INFINITY);
        let mut t = 15.0;
        while t < 30.0 {
            let sp = sat_point(sat_pressure(t).unwrap()).unwrap();
            let (vl, vv) = (1.0 / sp.liquid.density, 1.0 / sp.vapor.density);
            let x = (v - vl) / (vv - vl);
            let r = (sp.liquid.internal_energy() + x * (sp.vapor.internal_energy() - sp.liquid.internal_energy()) - u).abs();
            if r < best_r {
                best_r = r;
                best_t = t;
            }
            t += 1e-3;
        }
        let err = (best_t - flashed.temperature).abs();
        assert!(err.is_finite(), "case {case}");
        flash_err = flash_err.max(err);
    }
    notes.push(format!("flash vs scan max {:.2} mK (<= 2 mK)", 1e3 * flash_err));

    let pass = anchor_err <= 2e-3 && cc_err <= 0.03 && sj_err <= 0.03 && flash_err <= 2e-3;
    verdict(2, "property oracles", pass, &notes.join(", "));
}

#[test]
fn c03_boil_off_rate() {
    let _g = serial();
    let cfg = ScenarioConfig::default();
    let sat = sat_point(1.1e5).unwrap();
    let tanks = [
        ("onshore", cfg.onshore_tank.volume, cfg.onshore_tank.overall_u, cfg.onshore_tank.ambient_t),
        ("seaborne", cfg.seaborne_tank.volume, cfg.seaborne_tank.overall_u, cfg.seaborne_tank.ambient_t),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, vol, u, amb) in tanks {
        let geo = TankGeometry::sphere(vol, u, amb, 1.2e5);
        let q = tank_heat_ingress(&geo, sat.temperature);
        let bor = boil_off_rate(&geo, q, &sat, 0.1);
        // hand arithmetic with the published saturation values as a second route
        let hand = q / (70.505 * vol * 0.9 * 444.7e3) * 86_400.0 * 100.0;
        pass &= (0.045..=0.055).contains(&bor) && (bor / hand - 1.0).abs() < 5e-3;
        notes.push(format!("{name} {:.2} kW -> {bor:.4} %/day (hand {hand:.4})", q / 1e3));
    }
    verdict(3, "boil-off rate", pass, &format!("{} (band [0.045, 0.055])", notes.join(", ")));
}

#[test]
fn c04_entropy_comparison() {
    let _g = serial();
    let n = nominal();
    let split = entropy_report(&n.split).expect("entropy recorded");
    let fixed = entropy_report(&n.fixed).expect("entropy recorded");
    let ratio = split.rate.total() / fixed.rate.total();
    let fixed_pv = (fixed.rate.pump + fixed.rate.valve) / fixed.rate.total();
    let split_valve = split.rate.valve / split.rate.total();
    let pass = (0.15..=0.35).contains(&ratio) && fixed_pv > 0.5 && split_valve < 0.05;
    verdict(
        4,
        "entropy comparison",
        pass,
        &format!(
            "ratio {ratio:.3} (band [0.15, 0.35]); fixed-speed pump+valve share {:.1}% (> 50%); split-range valve share {:.2}% (< 5%); totals {:.1} / {:.1} W/K",
            100.0 * fixed_pv,
            100.0 * split_valve,
            split.rate.total(),
            fixed.rate.total()
        ),
    );
}

#[test]
fn c05_loss_magnitudes() {
    let _g = serial();
    let n = nominal();
    let (s, f) = (kpi_record(&n.split), kpi_record(&n.fixed));
    let pass = (0.5..=1.2).contains(&f.relative_bog)
        && (0.0..=0.35).contains(&s.relative_bog)
        && n.seconds < 60.0
        && s.completed
        && f.completed;
    verdict(
        5,
        "loss magnitudes",
        pass,
        &format!(
            "fixed-speed {:.3} wt% (band [0.5, 1.2]), split-range {:.3} wt% (band [0, 0.35]), both runs {:.1} s (< 60 s)",
            f.relative_bog, s.relative_bog, n.seconds
        ),
    );
}

/// Relative BOG below which a run counts as loss-free, wt%.
const ZERO_BOG: f64 = 0.01;

/// Monotonicity slack, wt%. Runs past the crossover still vent a fraction of
/// a kilogram while the pressure loops settle in the first seconds; that
/// start-up residue (about 3e-5 wt%) drifts with the set-point.
const MONOTONE_SLACK: f64 = 1e-4;

/// Pressure at which `bog` first falls below [`ZERO_BOG`], interpolated
/// linearly between sweep points.
fn crossover(p: &[f64], bog: &[f64]) -> Option<f64> {
    if bog[0] < ZERO_BOG {
        return Some(p[0]);
    }
    (1..p.len()).find(|&k| bog[k] < ZERO_BOG).map(|k| {
        let w = (bog[k - 1] - ZERO_BOG) / (bog[k - 1] - bog[k]);
        p[k - 1] + w * (p[k] - p[k - 1])
    })
}

#[test]
fn c06_pressure_sweep() {
    let _g = serial();
    let pressures: Vec<f64> = (0..=15).map(|k| 1.15 + 0.02 * k as f64).collect();
    let mut pass = true;
    let mut notes = Vec::new();
    for (mode, band) in [("fixed-speed", (1.25, 1.40)), ("split-range", (1.15, 1.25))] {
        let mut cfg = config(&[format!("control.mode={mode}"), "run.record_entropy=false".into()]);
        cfg.control.flow_setpoint = 3250.0;
        let rows = sweep(&cfg, SweepParameter::SeabornePressure, &pressures);
        let bog: Vec<f64> = rows.iter().map(|r| r.kpi.expect("sweep point ran").relative_bog).collect();
        let monotone = bog.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK);
        let x = crossover(&pressures, &bog);
        let in_band = x.is_some_and(|x| x >= band.0 && x <= band.1);
        pass &= monotone && in_band;
        let listed: Vec<String> = bog.iter().map(|b| format!("{b:.3}")).collect();
        notes.push(format!(
            "{mode}: monotone within {MONOTONE_SLACK} wt% {monotone}, crossover {} bara (band [{}, {}]), BOG [{}]",
            x.map_or("none".to_string(), |x| format!("{x:.3}")),
            band.0,
            band.1,
            listed.join(" ")
        ));
    }
    verdict(6, "pressure sweep", pass, &notes.join("; "));
}

#[test]
fn c07_filling_rate_trends() {
    let _g = serial();
    let flows = [2560.0, 3250.0, 3585.0];
    let run = |mode: PumpMode| -> Vec<KpiRecord> {
        let mut cfg = config(&["seaborne_tank.max_pressure=1.15".into(), "run.record_entropy=false".into()]);
        cfg.control.mode = mode;
        sweep(&cfg, SweepParameter::FlowSetpoint, &flows)
            .into_iter()
            .map(|r| r.kpi.expect("sweep point ran"))
            .collect()
    };
    let fixed = run(PumpMode::FixedSpeed);
    let split = run(PumpMode::SplitRange);
    let fixed_bog: Vec<f64> = fixed.iter().map(|k| k.relative_bog).collect();
    let split_power: Vec<f64> = split.iter().map(|k| k.relative_power).collect();
    let pass = fixed_bog.windows(2).all(|w| w[1] < w[0]) && split_power.windows(2).all(|w| w[1] > w[0]);
    verdict(
        7,
        "filling-rate trends",
        pass,
        &format!(
            "fixed-speed BOG {fixed_bog:.4?} wt% strictly decreasing, split-range power {split_power:.2?} kJ/m3 strictly increasing over {flows:?} m3/h"
        ),
    );
}

/// Converged δ of the Ishigami function from the exact-CDF quadrature,
/// frozen at 4 decimals.
const ISHIGAMI_DELTA: [f64; 3] = [0.2628, 0.4249, 0.2102];

#[test]
fn c08_gsa_estimator_oracles() {
    let _g = serial();
    let start = Instant::now();
    let seed = ScenarioConfig::default().ugsa.seed;
    let n = 8192;
    let opts = GsaOptions {
        seed,
        ..GsaOptions::default()
    };
    let (x, y) = common::ishigami_sample(n, seed);
    // a fourth column independent of y
    let (z, _) = common::ishigami_sample(n, seed + 1000);
    let xa: Vec<Vec<f64>> = x
        .iter()
        .zip(&z)
        .map(|(r, q)| {
            let mut r = r.clone();
            r.push(q[0]);
            r
        })
        .collect();
    let s: Sensitivity = sensitivity(&xa, &y, &opts).unwrap();

    let s1_want = common::ishigami_s1();
    let s1_err = (0..3).map(|i| (s.s1[i].value - s1_want[i]).abs()).fold(0.0, f64::max);

    let oracle: Vec<f64> = (0..3).map(|i| common::ishigami_delta_quadrature(i, 400, 400, 0.02)).collect();
    let oracle_frozen = (0..3).all(|i| (oracle[i] - ISHIGAMI_DELTA[i]).abs() < 5e-3);
    let delta_err = (0..3).map(|i| (s.delta[i].value - oracle[i]).abs()).fold(0.0, f64::max);

    let indep = s.delta[3].value;

    let identity = (0..3)
        .map(|i| {
            let yi: Vec<f64> = x.iter().map(|r| r[i]).collect();
            sensitivity(&x, &yi, &opts).unwrap().delta[i].value
        })
        .fold(f64::INFINITY, f64::min);
    let seconds = start.elapsed().as_secs_f64();

    let checks = [
        ("S1", s1_err <= 0.03),
        ("delta", oracle_frozen && delta_err <= 0.03),
        ("independent", indep <= 0.05),
        ("identity", identity >= 0.8),
        ("runtime", seconds < 120.0),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let d: Vec<f64> = s.delta.iter().take(3).map(|e| e.value).collect();
    let s1: Vec<f64> = s.s1.iter().take(3).map(|e| e.value).collect();
    verdict(
        8,
        "GSA estimator oracles",
        failed.is_empty(),
        &format!(
            "N={n}; S1 {s1:.4?} max err {s1_err:.4} (<= 0.03); delta {d:.4?} vs quadrature {oracle:.4?} max err {delta_err:.4} (<= 0.03); \
             independent column delta {indep:.4} (<= 0.05); y = X_i delta min {identity:.3} (>= 0.8); {seconds:.1} s (< 120 s){}",
            if failed.is_empty() { String::new() } else { format!("; failing: {}", failed.join(", ")) }
        ),
    );
}

#[test]
fn c09_ugsa_rank_reproduction() {
    let _g = serial();
    let start = Instant::now();
    let cfg = config(&[
        "control.mode=split-range".into(),
        "seaborne_tank.max_pressure=1.15".into(),
        "ugsa.samples=1000".into(),
    ]);
    let space = ParameterSpace::for_simulation(cfg.ugsa.parameters.clone()).unwrap();
    let samples = lhs_sample(&space, cfg.ugsa.samples, cfg.ugsa.seed).unwrap();
    let all: Vec<usize> = (0..samples.len()).collect();
    let out = run_batch(&cfg, &samples, &all);
    let ok: Vec<_> = out.iter().filter(|o| !o.failed()).collect();
    let failed = out.len() - ok.len();
    let x: Vec<Vec<f64>> = ok.iter().map(|o| samples.rows[o.index].clone()).collect();
    let kpis: Vec<KpiRecord> = ok.iter().map(|o| o.kpi.unwrap()).collect();
    let opts = GsaOptions {
        resamples: cfg.ugsa.resamples,
        seed: cfg.ugsa.seed,
        ..GsaOptions::default()
    };
    let eff = samples.names.iter().position(|n| n == "pump_efficiency").unwrap();
    let mut ranks = Vec::new();
    for (name, y) in [
        ("relative BOG", kpis.iter().map(|k| k.relative_bog).collect::<Vec<_>>()),
        ("relative power", kpis.iter().map(|k| k.relative_power).collect()),
    ] {
        let s = sensitivity(&x, &y, &opts).unwrap();
        let top = (0..s.delta.len()).max_by(|&a, &b| s.delta[a].value.total_cmp(&s.delta[b].value)).unwrap();
        let d: Vec<String> = samples.names.iter().zip(&s.delta).map(|(n, e)| format!("{n}={:.3}", e.value)).collect();
        ranks.push((name, top == eff, d.join(" ")));
    }
    let bog: Vec<f64> = kpis.iter().map(|k| k.relative_bog).collect();
    let m = bog.len() as f64;
    let mean = bog.iter().sum::<f64>() / m;
    let var = bog.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / m;
    let skew = bog.iter().map(|b| (b - mean).powi(3)).sum::<f64>() / m / var.powf(1.5);
    let near_zero = bog.iter().filter(|&&b| b < 0.01).count() as f64 / m;
    let low_flow = kpis.iter().filter(|k| k.mean_bog_flow <= 0.25).count() as f64 / m;
    let max_flow = kpis.iter().map(|k| k.mean_bog_flow).fold(0.0, f64::max);
    let seconds = start.elapsed().as_secs_f64();

    let pass = ranks.iter().all(|r| r.1)
        && skew > 0.0
        && near_zero >= 0.05
        && low_flow >= 0.95
        && (failed as f64) <= 0.05 * out.len() as f64;
    let rank_notes: Vec<String> = ranks
        .iter()
        .map(|(n, first, d)| format!("{n}: pump efficiency first {first} ({d})"))
        .collect();
    verdict(
        9,
        "UGSA rank reproduction",
        pass,
        &format!(
            "N={} failed {failed}; {}; BOG skewness {skew:.2} (> 0), {:.1}% below 0.01 wt% (>= 5%); mean BOG flow <= 0.25 kg/s in {:.1}% (>= 95%), max {max_flow:.3} kg/s; {:.0} s (target <= 1800 s)",
            out.len(),
            rank_notes.join("; "),
            100.0 * near_zero,
            100.0 * low_flow,
            seconds
        ),
    );
}

fn artifacts(cfg: &ScenarioConfig) -> Vec<u8> {
    let traj = simulate(cfg);
    let h = OutputHeader::new(cfg.hash(), cfg.ugsa.seed);
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &h, &traj).unwrap();
    write_kpi_json(&mut buf, &h, &kpi_record(&traj)).unwrap();
    write_entropy_csv(&mut buf, &h, &entropy_report(&traj).unwrap()).unwrap();
    write_ts_csv(&mut buf, &h, &ts_diagram(&traj).unwrap()).unwrap();
    buf
}

#[test]
fn c10_performance_and_determinism() {
    let _g = serial();
    let cfg = ScenarioConfig::default();
    let fs = build_flowsheet(&cfg).unwrap();
    let start = Instant::now();
    let traj = integrate(&fs, &StopCondition::for_flowsheet(&fs)).unwrap();
    let seconds = start.elapsed().as_secs_f64();
    let hours = traj.time.last().copied().unwrap_or(0.0) / 3600.0;
    let same = artifacts(&cfg) == artifacts(&cfg);
    verdict(
        10,
        "performance and determinism",
        seconds <= 5.0 && same,
        &format!("nominal run ({hours:.1} h simulated) {seconds:.2} s (<= 5 s); repeated outputs bit-identical {same}"),
    );
}
