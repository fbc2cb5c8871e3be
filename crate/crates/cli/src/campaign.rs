//! UGSA campaign: sample, simulate in resumable batches, then estimate.
//!
//! Layout of `<out_dir>/ugsa-<hash>/`:
//! `config.resolved`, `samples.csv`, `records/<index>.json` (one per
//! finished sample, written by the batch that ran it), and after the merge
//! `records.csv`, `gsa.csv`, `histogram.csv`, `summary.json`.
//! The directory name depends only on the resolved configuration, so a rerun
//! of the same command picks up where the previous one stopped.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use lh2_core::config::ScenarioConfig;
use lh2_core::sim::OutputHeader;
use lh2_core::ugsa::{
    kpi_statistics, lhs_sample, run_batch, sensitivity, GsaOptions, KpiStatistics, ParameterSpace,
    SampleMatrix, SampleOutcome, Sensitivity,
};
use serde::Serialize;

use crate::files::{self, KPI_COLUMNS};
use crate::{aborted, invalid, Failure};

/// Campaigns with more failed samples than this fraction exit with code 3.
const MAX_FAILED_FRACTION: f64 = 0.05;

/// KPIs ranked by the sensitivity indices.
const GSA_KPIS: &[&str] = &["relative_bog", "relative_power"];

#[derive(Serialize)]
struct Summary {
    samples: usize,
    failed: usize,
    failed_fraction: f64,
    gsa: BTreeMap<String, Result<Sensitivity, String>>,
    statistics: Vec<KpiStatistics>,
}

pub fn run(cfg: &ScenarioConfig, out_dir: &Path, chunk: usize) -> Result<(), Failure> {
    let space = ParameterSpace::for_simulation(cfg.ugsa.parameters.clone()).map_err(invalid)?;
    let samples = lhs_sample(&space, cfg.ugsa.samples, cfg.ugsa.seed).map_err(invalid)?;
    let header = OutputHeader::new(cfg.hash(), cfg.ugsa.seed);

    let dir = out_dir.join(format!("ugsa-{}", cfg.hash()));
    let records = dir.join("records");
    fs::create_dir_all(&records)
        .with_context(|| format!("cannot create {}", records.display()))
        .map_err(aborted)?;
    files::write_text(&dir.join("config.resolved"), &cfg.to_toml()).map_err(aborted)?;
    write_samples(&dir.join("samples.csv"), &header, &samples).map_err(aborted)?;

    let mut outcomes: Vec<Option<SampleOutcome>> = vec![None; samples.len()];
    for o in load_records(&records) {
        if o.index < outcomes.len() {
            let index = o.index;
            outcomes[index] = Some(o);
        }
    }
    let pending: Vec<usize> = (0..samples.len()).filter(|&i| outcomes[i].is_none()).collect();
    if pending.len() < samples.len() {
        eprintln!("resuming: {} of {} samples already on disk", samples.len() - pending.len(), samples.len());
    }
    for batch in pending.chunks(chunk) {
        for o in run_batch(cfg, &samples, batch) {
            let path = record_path(&records, o.index);
            let json = serde_json::to_string(&o).map_err(aborted)?;
            // write-then-rename so an interrupted run never leaves a torn record
            let tmp = path.with_extension("tmp");
            files::write_text(&tmp, &json).map_err(aborted)?;
            fs::rename(&tmp, &path).map_err(aborted)?;
            let index = o.index;
            outcomes[index] = Some(o);
        }
        let done = outcomes.iter().filter(|o| o.is_some()).count();
        eprintln!("{done}/{} samples", samples.len());
    }
    let outcomes: Vec<SampleOutcome> = outcomes.into_iter().map(|o| o.expect("every sample ran")).collect();

    let summary = summarize(cfg, &samples, &outcomes);
    write_records(&dir.join("records.csv"), &header, &samples, &outcomes).map_err(aborted)?;
    write_gsa(&dir.join("gsa.csv"), &header, &samples.names, &summary.gsa).map_err(aborted)?;
    write_histograms(&dir.join("histogram.csv"), &header, &summary.statistics).map_err(aborted)?;
    let json = serde_json::to_string_pretty(&summary).map_err(aborted)?;
    files::write_text(&dir.join("summary.json"), &json).map_err(aborted)?;

    println!("{}", dir.display());
    for (kpi, s) in &summary.gsa {
        match s {
            Ok(s) => {
                let mut ranked: Vec<(&String, f64)> = samples.names.iter().zip(s.delta.iter().map(|d| d.value)).collect();
                ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
                let list: Vec<String> = ranked.iter().map(|(n, d)| format!("{n}={d:.3}")).collect();
                println!("{kpi}: delta {}", list.join(" "));
            }
            Err(e) => eprintln!("warning: no indices for {kpi}: {e}"),
        }
    }
    if summary.failed > 0 {
        eprintln!("{} of {} samples failed", summary.failed, summary.samples);
    }
    if summary.failed_fraction > MAX_FAILED_FRACTION {
        return Err(Failure {
            code: 3,
            error: anyhow!(
                "{:.1}% of samples failed (limit {:.0}%)",
                100.0 * summary.failed_fraction,
                100.0 * MAX_FAILED_FRACTION
            ),
        });
    }
    Ok(())
}

fn record_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("{index:06}.json"))
}

/// Every parseable record in `dir`; torn or foreign files are ignored and
/// the corresponding samples rerun.
fn load_records(dir: &Path) -> Vec<SampleOutcome> {
    let Ok(entries) = fs::read_dir(dir) else {
        return Vec::new();
    };
    entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "json"))
        .filter_map(|e| fs::read_to_string(e.path()).ok())
        .filter_map(|s| serde_json::from_str(&s).ok())
        .collect()
}

fn summarize(cfg: &ScenarioConfig, samples: &SampleMatrix, outcomes: &[SampleOutcome]) -> Summary {
    let ok: Vec<&SampleOutcome> = outcomes.iter().filter(|o| !o.failed()).collect();
    let x: Vec<Vec<f64>> = ok.iter().map(|o| samples.rows[o.index].clone()).collect();
    let kpi = |name: &str| -> Vec<f64> {
        ok.iter()
            .map(|o| {
                let k = o.kpi.as_ref().expect("successful sample has a record");
                match name {
                    "relative_bog" => k.relative_bog,
                    "relative_power" => k.relative_power,
                    "mean_bog_flow" => k.mean_bog_flow,
                    "filling_time" => k.filling_time,
                    _ => unreachable!("unknown KPI {name}"),
                }
            })
            .collect()
    };
    let opts = GsaOptions {
        resamples: cfg.ugsa.resamples,
        seed: cfg.ugsa.seed,
        ..GsaOptions::default()
    };
    let gsa = GSA_KPIS
        .iter()
        .map(|&name| {
            let result = sensitivity(&x, &kpi(name), &opts).map_err(|e| e.to_string());
            (name.to_string(), result)
        })
        .collect();
    let bins = cfg.ugsa.histogram_bins;
    let statistics = vec![
        kpi_statistics("relative_bog", &kpi("relative_bog"), bins, &[0.01]),
        kpi_statistics("relative_power", &kpi("relative_power"), bins, &[]),
        kpi_statistics("mean_bog_flow", &kpi("mean_bog_flow"), bins, &[0.19, 0.25]),
        kpi_statistics("filling_time", &kpi("filling_time"), bins, &[]),
    ];
    let failed = outcomes.len() - ok.len();
    Summary {
        samples: outcomes.len(),
        failed,
        failed_fraction: if outcomes.is_empty() { 0.0 } else { failed as f64 / outcomes.len() as f64 },
        gsa,
        statistics,
    }
}

fn write_samples(path: &Path, header: &OutputHeader, samples: &SampleMatrix) -> anyhow::Result<()> {
    files::write_csv(path, header, |w| {
        w.write_record(std::iter::once("index").chain(samples.names.iter().map(String::as_str)))?;
        for (i, row) in samples.rows.iter().enumerate() {
            w.write_record(std::iter::once(i.to_string()).chain(row.iter().map(f64::to_string)))?;
        }
        Ok(())
    })
}

fn write_records(
    path: &Path,
    header: &OutputHeader,
    samples: &SampleMatrix,
    outcomes: &[SampleOutcome],
) -> anyhow::Result<()> {
    files::write_csv(path, header, |w| {
        let cols: Vec<&str> = std::iter::once("index")
            .chain(samples.names.iter().map(String::as_str))
            .chain(KPI_COLUMNS.iter().copied())
            .chain(std::iter::once("error"))
            .collect();
        w.write_record(&cols)?;
        for o in outcomes {
            let mut rec = vec![o.index.to_string()];
            rec.extend(samples.rows[o.index].iter().map(f64::to_string));
            rec.extend(files::kpi_fields(o.kpi.as_ref()));
            rec.push(o.error.clone().unwrap_or_default());
            w.write_record(&rec)?;
        }
        Ok(())
    })
}

fn write_gsa(
    path: &Path,
    header: &OutputHeader,
    names: &[String],
    gsa: &BTreeMap<String, Result<Sensitivity, String>>,
) -> anyhow::Result<()> {
    files::write_csv(path, header, |w| {
        w.write_record([
            "kpi",
            "parameter",
            "delta",
            "delta_ci_low",
            "delta_ci_high",
            "s1",
            "s1_ci_low",
            "s1_ci_high",
            "classes",
            "degenerate",
        ])?;
        for (kpi, s) in gsa {
            let Ok(s) = s else { continue };
            for (j, name) in names.iter().enumerate() {
                let (d, s1) = (&s.delta[j], &s.s1[j]);
                w.write_record([
                    kpi.clone(),
                    name.clone(),
                    d.value.to_string(),
                    d.ci_low.to_string(),
                    d.ci_high.to_string(),
                    s1.value.to_string(),
                    s1.ci_low.to_string(),
                    s1.ci_high.to_string(),
                    s.classes.to_string(),
                    s.degenerate.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

fn write_histograms(path: &Path, header: &OutputHeader, stats: &[KpiStatistics]) -> anyhow::Result<()> {
    files::write_csv(path, header, |w| {
        w.write_record(["kpi", "bin_low", "bin_high", "count"])?;
        for s in stats {
            let h = &s.histogram;
            for (k, count) in h.counts.iter().enumerate() {
                w.write_record([
                    s.name.clone(),
                    h.edges[k].to_string(),
                    h.edges[k + 1].to_string(),
                    count.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}
