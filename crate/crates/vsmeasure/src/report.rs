//! Report JSON.
//!
//! Millimetre and cubic-millimetre values are printed with exactly three
//! decimals; the unrounded value sits next to each under a `_raw` key.

use serde::Serialize;
use serde_json::value::RawValue;
use vsmeasure_core::geometry::Point2;
use vsmeasure_core::measurement::{Diameter, MeasurementReport};

use crate::canonical::SessionJson;

/// JSON Schema (draft 2020-12) describing [`report_json`] output.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

/// A number printed with three decimals, `-0.000` folded to `0.000`.
pub fn fixed3(v: f64) -> Box<RawValue> {
    RawValue::from_string(fixed3_text(v)).expect("finite decimal")
}

pub(crate) fn fixed3_text(v: f64) -> String {
    let s = format!("{:.3}", v);
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

#[derive(Serialize)]
struct DiameterJson {
    kind: &'static str,
    length_mm: Box<RawValue>,
    length_mm_raw: f64,
    slice_index: usize,
    p_mm: [Box<RawValue>; 2],
    q_mm: [Box<RawValue>; 2],
    p_mm_raw: [f64; 2],
    q_mm_raw: [f64; 2],
    convention: &'static str,
}

impl DiameterJson {
    fn new(d: &Diameter) -> Self {
        let pair = |p: Point2| [fixed3(p.x), fixed3(p.y)];
        DiameterJson {
            kind: d.kind.as_str(),
            length_mm: fixed3(d.length_mm),
            length_mm_raw: d.length_mm,
            slice_index: d.slice_index,
            p_mm: pair(d.segment.p),
            q_mm: pair(d.segment.q),
            p_mm_raw: [d.segment.p.x, d.segment.p.y],
            q_mm_raw: [d.segment.q.x, d.segment.q.y],
            convention: d.convention.as_str(),
        }
    }
}

#[derive(Serialize)]
struct AuxJson {
    d_intra_par: Option<DiameterJson>,
    d_extra_par: Option<DiameterJson>,
    d_extra_perp: Option<DiameterJson>,
    interface_dir: Option<[f64; 2]>,
    interface_source: &'static str,
    fallback_slices: Vec<usize>,
    skipped_slices: Vec<usize>,
}

#[derive(Serialize)]
struct VolumesJson {
    intrameatal: Box<RawValue>,
    extrameatal: Box<RawValue>,
    whole: Box<RawValue>,
    intrameatal_raw: f64,
    extrameatal_raw: f64,
    whole_raw: f64,
}

#[derive(Serialize)]
struct ReportJson {
    session: SessionJson,
    convention: &'static str,
    chosen_kind: &'static str,
    chosen: DiameterJson,
    aux: AuxJson,
    volumes_mm3: VolumesJson,
    decision_trace: Vec<String>,
    warnings: Vec<String>,
}

/// Pretty-printed report JSON with a trailing newline.
pub fn report_json(report: &MeasurementReport) -> String {
    let aux = &report.aux;
    let v = &report.volumes;
    let doc = ReportJson {
        session: SessionJson::from_meta(&report.session),
        convention: report.convention.as_str(),
        chosen_kind: report.chosen_kind.as_str(),
        chosen: DiameterJson::new(&report.chosen),
        aux: AuxJson {
            d_intra_par: aux.d_intra_par.as_ref().map(DiameterJson::new),
            d_extra_par: aux.d_extra_par.as_ref().map(DiameterJson::new),
            d_extra_perp: aux.d_extra_perp.as_ref().map(DiameterJson::new),
            interface_dir: aux.interface_dir.map(|d| [d.dx(), d.dy()]),
            interface_source: aux.interface_source.as_str(),
            fallback_slices: aux.fallback_slices.clone(),
            skipped_slices: aux.skipped_slices.clone(),
        },
        volumes_mm3: VolumesJson {
            intrameatal: fixed3(v.intrameatal_mm3),
            extrameatal: fixed3(v.extrameatal_mm3),
            whole: fixed3(v.whole_mm3),
            intrameatal_raw: v.intrameatal_mm3,
            extrameatal_raw: v.extrameatal_mm3,
            whole_raw: v.whole_mm3,
        },
        decision_trace: report.decision_trace.iter().map(|s| s.to_string()).collect(),
        warnings: report.warnings.clone(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("report serialises");
    text.push('\n');
    text
}
