//! Run the nominal case in both pump modes and print KPIs and entropy terms.

use std::time::Instant;

use lh2_core::config::ScenarioConfig;
use lh2_core::sim::{build_flowsheet, conservation, entropy_report, integrate, kpi_record, StopCondition};

fn main() {
    let overrides: Vec<String> = std::env::args().skip(1).collect();
    for mode in ["split-range", "fixed-speed"] {
        let mut o = overrides.clone();
        o.insert(0, format!("control.mode={mode}"));
        let cfg = ScenarioConfig::from_toml_with_overrides("", &o).expect("config");
        let fs = build_flowsheet(&cfg).expect("flowsheet");
        let start = Instant::now();
        let traj = integrate(&fs, &StopCondition::for_flowsheet(&fs)).expect("run");
        let elapsed = start.elapsed().as_secs_f64();
        let k = kpi_record(&traj);
        println!("{mode}: {elapsed:.2} s wall, {} records", traj.len());
        println!("  {k:?}");
        println!("  {:?}", conservation(&traj));
        if let Some(r) = entropy_report(&traj) {
            println!(
                "  snapshot t={:.0}s steady={} rates pump={:.2} pipe={:.2} valve={:.2} total={:.2} W/K; s4-s1 rise={:.2}",
                r.snapshot_time, r.steady, r.rate.pump, r.rate.pipe, r.rate.valve, r.rate.total(), r.state_point_rise
            );
        }
    }
}
