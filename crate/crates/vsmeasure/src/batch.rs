//! Batch measurement over a manifest of canonical volumes.
//!
//! Manifest: CSV with header `header_path,operative_status,output_stem`.
//! `operative_status` may be empty (use the header's value) and
//! `output_stem` may be empty (no per-session report). Both paths resolve
//! relative to the manifest's directory.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use vsmeasure_core::measure_session;
use vsmeasure_core::measurement::{Diameter, MeasurementReport};
use vsmeasure_core::morphology::BoundaryConvention;
use vsmeasure_core::volume::OperativeStatus;

use crate::atomic::write_atomic;
use crate::canonical::load_canonical;
use crate::error::{Error, Result};
use crate::report::{fixed3_text, report_json};

pub const RESULTS_HEADER: [&str; 13] = [
    "case_id",
    "session_id",
    "chosen_kind",
    "chosen_mm",
    "slice_index",
    "d_intra_par_mm",
    "d_extra_par_mm",
    "d_extra_perp_mm",
    "intra_mm3",
    "extra_mm3",
    "whole_mm3",
    "warnings",
    "error",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub header_path: PathBuf,
    pub operative_status: Option<OperativeStatus>,
    pub output_stem: Option<PathBuf>,
}

#[derive(Debug, serde::Deserialize)]
struct RawRow {
    header_path: String,
    #[serde(default)]
    operative_status: String,
    #[serde(default)]
    output_stem: String,
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let bad = |reason: String| Error::Manifest { path: path.to_path_buf(), reason };
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if !headers.iter().any(|h| h == "header_path") {
        return Err(bad("missing header_path column".into()));
    }
    let mut rows = Vec::new();
    for (n, rec) in reader.deserialize::<RawRow>().enumerate() {
        let line = n + 2;
        let raw = rec.map_err(|e| bad(format!("row {}: {}", line, e)))?;
        if raw.header_path.is_empty() {
            return Err(bad(format!("row {}: empty header_path", line)));
        }
        let operative_status = match raw.operative_status.as_str() {
            "" => None,
            s => Some(
                OperativeStatus::parse(s)
                    .ok_or_else(|| bad(format!("row {}: operative_status {:?} is not pre_op or post_op", line, s)))?,
            ),
        };
        let output_stem = (!raw.output_stem.is_empty()).then(|| base.join(&raw.output_stem));
        rows.push(ManifestRow { header_path: base.join(&raw.header_path), operative_status, output_stem });
    }
    Ok(rows)
}

/// Outcome for one manifest row.
#[derive(Debug)]
pub struct SessionOutcome {
    pub row: ManifestRow,
    /// Case and session ids; file name when the header could not be read.
    pub ids: (String, String),
    pub result: Result<MeasurementReport>,
}

fn run_one(row: &ManifestRow, convention: BoundaryConvention) -> SessionOutcome {
    let fallback_ids = (row.header_path.display().to_string(), String::new());
    let vol = match load_canonical(&row.header_path) {
        Ok(v) => v,
        Err(e) => return SessionOutcome { row: row.clone(), ids: fallback_ids, result: Err(e) },
    };
    let vol = match row.operative_status {
        Some(s) => vol.with_operative_status(s),
        None => vol,
    };
    let ids = (vol.session().case_id.clone(), vol.session().session_id.clone());
    let result = measure_session(&vol, convention).map_err(Error::from);
    SessionOutcome { row: row.clone(), ids, result }
}

/// Measures every row; `jobs == 1` runs on the calling thread. Output
/// order always equals manifest order.
pub fn run_batch(rows: &[ManifestRow], convention: BoundaryConvention, jobs: usize) -> Vec<SessionOutcome> {
    if jobs <= 1 {
        return rows.iter().map(|r| run_one(r, convention)).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| rows.par_iter().map(|r| run_one(r, convention)).collect()),
        Err(_) => rows.iter().map(|r| run_one(r, convention)).collect(),
    }
}

fn error_text(e: &Error) -> String {
    match e {
        Error::Measure(m) => m.to_string(),
        other => other.to_string(),
    }
}

fn mm(d: &Option<Diameter>) -> String {
    d.as_ref().map(|d| fixed3_text(d.length_mm)).unwrap_or_default()
}

/// Results table text, one row per outcome.
pub fn results_csv(outcomes: &[SessionOutcome]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(RESULTS_HEADER).expect("in-memory write");
    for o in outcomes {
        let (case, session) = (&o.ids.0, &o.ids.1);
        let record: Vec<String> = match &o.result {
            Ok(r) => vec![
                case.clone(),
                session.clone(),
                r.chosen_kind.as_str().to_string(),
                fixed3_text(r.chosen.length_mm),
                r.chosen.slice_index.to_string(),
                mm(&r.aux.d_intra_par),
                mm(&r.aux.d_extra_par),
                mm(&r.aux.d_extra_perp),
                fixed3_text(r.volumes.intrameatal_mm3),
                fixed3_text(r.volumes.extrameatal_mm3),
                fixed3_text(r.volumes.whole_mm3),
                r.warnings.join("; "),
                String::new(),
            ],
            Err(e) => {
                let mut v = vec![case.clone(), session.clone()];
                v.extend((0..10).map(|_| String::new()));
                v.push(error_text(e));
                v
            }
        };
        w.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 fields")
}

/// Per-session report files for successful rows that name an output stem.
pub fn report_files(outcomes: &[SessionOutcome]) -> Vec<(PathBuf, String)> {
    outcomes
        .iter()
        .filter_map(|o| {
            let stem = o.row.output_stem.as_ref()?;
            let report = o.result.as_ref().ok()?;
            let mut name = stem.as_os_str().to_owned();
            name.push(".report.json");
            Some((PathBuf::from(name), report_json(report)))
        })
        .collect()
}

/// Writes the results table and reports after every session has finished.
pub fn write_outputs(outcomes: &[SessionOutcome], results_path: &Path) -> Result<()> {
    let table = results_csv(outcomes);
    let reports = report_files(outcomes);
    for (path, text) in &reports {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        write_atomic(path, text.as_bytes())?;
    }
    write_atomic(results_path, table.as_bytes())
}
