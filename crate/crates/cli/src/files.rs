//! Run directories and file writers shared by the subcommands.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use lh2_core::sim::{KpiRecord, OutputHeader};

/// `KpiRecord` columns in CSV order.
pub const KPI_COLUMNS: &[&str] = &[
    "relative_bog",
    "relative_power",
    "mean_bog_flow",
    "max_bog_flow",
    "filling_time",
    "total_bog",
    "total_shaft_energy",
    "completed",
];

/// KPI fields as strings; empty when the run failed.
pub fn kpi_fields(kpi: Option<&KpiRecord>) -> Vec<String> {
    match kpi {
        Some(k) => vec![
            k.relative_bog.to_string(),
            k.relative_power.to_string(),
            k.mean_bog_flow.to_string(),
            k.max_bog_flow.to_string(),
            k.filling_time.to_string(),
            k.total_bog.to_string(),
            k.total_shaft_energy.to_string(),
            k.completed.to_string(),
        ],
        None => vec![String::new(); KPI_COLUMNS.len()],
    }
}

/// Fresh `<out_dir>/<hash>-<unix seconds>` directory; a counter suffix
/// keeps two runs started in the same second apart.
pub fn run_dir(out_dir: &Path, hash: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    for k in 0u32.. {
        let name = if k == 0 {
            format!("{hash}-{ts}")
        } else {
            format!("{hash}-{ts}-{k}")
        };
        let path = out_dir.join(name);
        match fs::create_dir(&path) {
            Ok(()) => return Ok(path),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e).with_context(|| format!("cannot create {}", path.display())),
        }
    }
    unreachable!("u32 counter exhausted")
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
    f(&mut w).and_then(|_| w.flush()).with_context(|| format!("cannot write {}", path.display()))
}

/// CSV file whose first line is the `# schema_version=...` comment.
pub fn write_csv(
    path: &Path,
    header: &OutputHeader,
    f: impl FnOnce(&mut csv::Writer<&mut BufWriter<File>>) -> csv::Result<()>,
) -> anyhow::Result<()> {
    write_with(path, |w| {
        header.write_comment(w)?;
        let mut c = csv::Writer::from_writer(w);
        f(&mut c).map_err(io::Error::other)?;
        c.flush()
    })
}
