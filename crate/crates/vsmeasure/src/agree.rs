//! Agreement tables: reading pairs, per-category statistics JSON, plot
//! point CSVs and plots.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::value::RawValue;
use vsmeasure_core::agreement::{
    analyse, filter_pairs, AgreementError, AgreementStats, BlandAltman, Category, Exclusion, PairedMeasurement,
};
use vsmeasure_core::measurement::ChosenKind;

use crate::error::{Error, Result};
use crate::report::{fixed3, fixed3_text};
use crate::svg;

pub const PAIRS_HEADER: [&str; 7] =
    ["case_id", "session_id", "category", "automated_mm", "automated_kind", "manual_mm", "manual_kind"];

type Record = HashMap<String, String>;

fn read_table(path: &Path, required: &[&str]) -> Result<Vec<(usize, Record)>> {
    let bad = |reason: String| Error::Table { path: path.to_path_buf(), reason };
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if let Some(missing) = required.iter().find(|c| !headers.iter().any(|h| h == **c)) {
        return Err(bad(format!("missing column {}", missing)));
    }
    let mut rows = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(format!("row {}: {}", n + 2, e)))?;
        let map = headers.iter().zip(rec.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect();
        rows.push((n + 2, map));
    }
    Ok(rows)
}

struct Fields<'a> {
    path: &'a Path,
    line: usize,
    rec: &'a Record,
}

impl Fields<'_> {
    fn bad(&self, reason: String) -> Error {
        Error::Table { path: self.path.to_path_buf(), reason: format!("row {}: {}", self.line, reason) }
    }
    fn text(&self, key: &str) -> &str {
        self.rec.get(key).map(String::as_str).unwrap_or("")
    }
    fn mm(&self, key: &str) -> Result<Option<f64>> {
        match self.text(key) {
            "" => Ok(None),
            s => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Some(v)),
                _ => Err(self.bad(format!("{} {:?} is not a number", key, s))),
            },
        }
    }
    fn kind(&self, key: &str) -> Result<Option<ChosenKind>> {
        match self.text(key) {
            "" => Ok(None),
            s => ChosenKind::parse(s).map(Some).ok_or_else(|| self.bad(format!("{} {:?} is not WT or EM", key, s))),
        }
    }
    fn category(&self) -> Result<Category> {
        let s = self.text("category");
        Category::parse(s).ok_or_else(|| self.bad(format!("unknown category {:?}", s)))
    }
}

/// Reads a merged pairs table.
pub fn read_pairs(path: &Path) -> Result<Vec<PairedMeasurement>> {
    read_table(path, &PAIRS_HEADER)?
        .iter()
        .map(|(line, rec)| {
            let f = Fields { path, line: *line, rec };
            Ok(PairedMeasurement {
                case_id: f.text("case_id").to_string(),
                session_id: f.text("session_id").to_string(),
                category: f.category()?,
                automated_mm: f.mm("automated_mm")?,
                manual_mm: f.mm("manual_mm")?,
                automated_kind: f.kind("automated_kind")?,
                manual_kind: f.kind("manual_kind")?,
            })
        })
        .collect()
}

/// Joins a batch results table with a manual table
/// (`case_id,session_id,category,manual_mm,manual_kind`). Rows follow the
/// manual table; sessions missing from the batch, or failed there, have no
/// automated value.
pub fn join_tables(auto_path: &Path, manual_path: &Path) -> Result<Vec<PairedMeasurement>> {
    let auto = read_table(auto_path, &["case_id", "session_id", "chosen_kind", "chosen_mm"])?;
    let mut by_id: HashMap<(String, String), (Option<f64>, Option<ChosenKind>)> = HashMap::new();
    for (line, rec) in &auto {
        let f = Fields { path: auto_path, line: *line, rec };
        let key = (f.text("case_id").to_string(), f.text("session_id").to_string());
        let value = (f.mm("chosen_mm")?, f.kind("chosen_kind")?);
        if by_id.insert(key.clone(), value).is_some() {
            return Err(f.bad(format!("duplicate session {}/{}", key.0, key.1)));
        }
    }
    read_table(manual_path, &["case_id", "session_id", "category", "manual_mm", "manual_kind"])?
        .iter()
        .map(|(line, rec)| {
            let f = Fields { path: manual_path, line: *line, rec };
            let key = (f.text("case_id").to_string(), f.text("session_id").to_string());
            let (automated_mm, automated_kind) = by_id.get(&key).copied().unwrap_or((None, None));
            Ok(PairedMeasurement {
                case_id: key.0,
                session_id: key.1,
                category: f.category()?,
                automated_mm,
                automated_kind,
                manual_mm: f.mm("manual_mm")?,
                manual_kind: f.kind("manual_kind")?,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct ExclusionJson<'a> {
    case_id: &'a str,
    session_id: &'a str,
    reason: &'static str,
}

#[derive(Serialize)]
struct SessionRef<'a> {
    case_id: &'a str,
    session_id: &'a str,
}

#[derive(Serialize)]
struct BlandAltmanJson {
    bias_mm: Box<RawValue>,
    sd_mm: Box<RawValue>,
    loa_mm: [Box<RawValue>; 2],
    bias_mm_raw: f64,
    sd_mm_raw: f64,
    loa_mm_raw: [f64; 2],
}

#[derive(Serialize)]
struct PearsonJson {
    r: f64,
    p_value: f64,
    p_floored: bool,
}

#[derive(Serialize)]
struct CategoryJson<'a> {
    category: &'static str,
    status: &'static str,
    skip_reason: Option<String>,
    n: usize,
    bland_altman: Option<BlandAltmanJson>,
    pearson: Option<PearsonJson>,
    pearson_skip_reason: Option<String>,
    included: Vec<SessionRef<'a>>,
    excluded: Vec<ExclusionJson<'a>>,
}

#[derive(Serialize)]
struct StatsJson<'a> {
    categories: Vec<CategoryJson<'a>>,
}

/// One category's analysis and the pairs that fed it.
pub struct CategoryResult {
    pub category: Category,
    pub included: Vec<PairedMeasurement>,
    pub excluded: Vec<Exclusion>,
    pub outcome: std::result::Result<AgreementStats, AgreementError>,
}

pub fn analyse_categories(pairs: &[PairedMeasurement], categories: &[Category]) -> Vec<CategoryResult> {
    categories
        .iter()
        .map(|&category| {
            let (included, excluded) = filter_pairs(pairs, category);
            let outcome = analyse(pairs, category).map_err(|(e, _)| e);
            CategoryResult { category, included, excluded, outcome }
        })
        .collect()
}

pub fn stats_json(results: &[CategoryResult]) -> String {
    let categories = results
        .iter()
        .map(|c| {
            let included =
                c.included.iter().map(|p| SessionRef { case_id: &p.case_id, session_id: &p.session_id }).collect();
            let excluded = c
                .excluded
                .iter()
                .map(|e| ExclusionJson { case_id: &e.case_id, session_id: &e.session_id, reason: e.reason.as_str() })
                .collect();
            let base = CategoryJson {
                category: c.category.as_str(),
                status: "ok",
                skip_reason: None,
                n: c.included.len(),
                bland_altman: None,
                pearson: None,
                pearson_skip_reason: None,
                included,
                excluded,
            };
            match &c.outcome {
                Err(e) => CategoryJson { status: "skipped", skip_reason: Some(e.to_string()), ..base },
                Ok(s) => {
                    let ba = &s.bland_altman;
                    let (pearson, pearson_skip_reason) = match &s.correlation {
                        Ok(r) => (Some(PearsonJson { r: r.r, p_value: r.p_value, p_floored: r.p_floored }), None),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    CategoryJson {
                        bland_altman: Some(BlandAltmanJson {
                            bias_mm: fixed3(ba.bias_mm),
                            sd_mm: fixed3(ba.sd_mm),
                            loa_mm: [fixed3(ba.loa_low_mm), fixed3(ba.loa_high_mm)],
                            bias_mm_raw: ba.bias_mm,
                            sd_mm_raw: ba.sd_mm,
                            loa_mm_raw: [ba.loa_low_mm, ba.loa_high_mm],
                        }),
                        pearson,
                        pearson_skip_reason,
                        ..base
                    }
                }
            }
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&StatsJson { categories }).expect("stats serialise");
    text.push('\n');
    text
}

pub fn points_csv(ba: &BlandAltman) -> String {
    let mut out = String::from("mean_mm,diff_mm\n");
    for p in &ba.points {
        out.push_str(&format!("{},{}\n", fixed3_text(p.mean_mm), fixed3_text(p.diff_mm)));
    }
    out
}

/// Every artifact for a run, keyed by file name relative to the output
/// directory: `stats.json`, then per analysed category `<cat>.points.csv`
/// and, with `plots`, `<cat>.scatter.svg` and `<cat>.bland_altman.svg`.
pub fn artifacts(results: &[CategoryResult], plots: bool) -> Vec<(String, String)> {
    let mut out = vec![("stats.json".to_string(), stats_json(results))];
    for c in results {
        let Ok(s) = &c.outcome else { continue };
        let name = c.category.as_str();
        out.push((format!("{}.points.csv", name), points_csv(&s.bland_altman)));
        if plots {
            let pairs: Vec<(f64, f64)> =
                c.included.iter().filter_map(|p| Some((p.automated_mm?, p.manual_mm?))).collect();
            out.push((format!("{}.scatter.svg", name), svg::scatter_plot(name, &pairs)));
            out.push((format!("{}.bland_altman.svg", name), svg::bland_altman_plot(name, &s.bland_altman)));
        }
    }
    out
}
