//! CSV and JSON artifacts of an experiment run.

use std::fs;
use std::path::{Path, PathBuf};

use super::{ExperimentOutcome, TrialRecord};
use crate::error::{Error, Result};

pub const SUMMARY_FILE: &str = "summary.json";
pub const TIMING_FILE: &str = "timing.json";
pub const TAIL_BOUNDS_FILE: &str = "tail_bounds.csv";

const TRIAL_HEADER: [&str; 6] = [
    "seed",
    "m_max",
    "m_min",
    "rows_recovered",
    "exact_recovery",
    "residual",
];
const TAIL_HEADER: [&str; 10] = [
    "n",
    "t",
    "theta",
    "e_max",
    "c",
    "p_mmax_below",
    "p_mmin_below",
    "exact_tail",
    "lemma_bound",
    "valid",
];

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn headed_writer(path: &Path, header: &[&str]) -> Result<csv::Writer<fs::File>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    Ok(w)
}

/// Writes `records` as CSV with a fixed header, in the given order.
pub fn write_trials_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    let mut w = headed_writer(path, &TRIAL_HEADER)?;
    for r in records {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `summary.json`, one `trials_n{N}.csv` per row length (or
/// `tail_bounds.csv`), and `timing.json` into `dir`. Returns the paths written.
///
/// Everything except `timing.json` is a deterministic function of the config.
pub fn emit_results(outcome: &ExperimentOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let summary_path = dir.join(SUMMARY_FILE);
    write_json(&summary_path, &outcome.summary)?;
    written.push(summary_path);

    for (point, records) in outcome.summary.points.iter().zip(&outcome.records) {
        let path = dir.join(format!("trials_n{}.csv", point.n));
        write_trials_csv(records, &path)?;
        written.push(path);
    }

    if !outcome.summary.tail_bounds.is_empty() {
        let path = dir.join(TAIL_BOUNDS_FILE);
        let mut w = headed_writer(&path, &TAIL_HEADER)?;
        for r in &outcome.summary.tail_bounds {
            w.serialize(r).map_err(csv_err(&path))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }

    let timing_path = dir.join(TIMING_FILE);
    write_json(&timing_path, &outcome.timing)?;
    written.push(timing_path);
    Ok(written)
}
