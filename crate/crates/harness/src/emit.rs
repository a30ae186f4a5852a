//! Plot-data emission: CSV files plus a JSON manifest.
//!
//! Row order is fixed (methods as configured, T ascending, bins by index)
//! and floats print with Rust's shortest round-trip formatting, so the same
//! results always serialize to the same bytes.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use uq_core::metrics::CalibrationBins;
use uq_core::Result;

use crate::report::UncertainReport;
use crate::sweep::SweepResult;

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

pub const SWEEP_CSV_HEADER: &str = "method,model,T,error,nll,ece";
pub const RELIABILITY_CSV_HEADER: &str = "bin_lo,bin_hi,confidence,accuracy,count";
pub const LOSS_CSV_HEADER: &str = "epoch,loss";

/// Sweep curves for all methods in one CSV (the data behind the
/// error/NLL/ECE-versus-T figures).
pub fn write_sweep_csv(results: &[SweepResult], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for result in results {
        for row in &result.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                result.method, result.model_id, row.t, row.error, row.nll, row.ece
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reliability-diagram points: one row per non-empty bin, in bin order.
pub fn write_reliability_csv(bins: &CalibrationBins, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{RELIABILITY_CSV_HEADER}")?;
    for bin in bins.bins.iter().filter(|b| b.count > 0) {
        writeln!(
            w,
            "{},{},{},{},{}",
            bin.lo,
            bin.hi,
            bin.mean_confidence.expect("non-empty bin"),
            bin.accuracy.expect("non-empty bin"),
            bin.count
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Per-epoch mean training loss; epochs are 1-based.
pub fn write_loss_history_csv(history: &[f64], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{LOSS_CSV_HEADER}")?;
    for (epoch, loss) in history.iter().enumerate() {
        writeln!(w, "{},{}", epoch + 1, loss)?;
    }
    w.flush()?;
    Ok(())
}

/// One emitted file, with enough context to interpret it.
#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub name: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<String>,
    /// Operating point (samples/members) the file was evaluated at.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub format_version: u32,
    pub command: String,
    pub master_seed: u64,
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new(command: &str, master_seed: u64) -> Self {
        Self {
            format_version: MANIFEST_FORMAT_VERSION,
            command: command.to_string(),
            master_seed,
            files: Vec::new(),
        }
    }

    pub fn push(&mut self, entry: ManifestEntry) {
        self.files.push(entry);
    }
}

pub fn write_manifest(manifest: &Manifest, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(manifest)?)?;
    Ok(())
}

pub fn write_report_json(report: &UncertainReport, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(report)?)?;
    Ok(())
}
