//! Session-level measurement: whole-tumour and extrameatal diameters, the
//! three features measured against the intra/extra interface, volumes, and
//! the rule that picks which diameter to report.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{self, convex_hull, directional_extent, fit_line_direction, max_diameter, perpendicular};
use crate::geometry::{Point2, Segment2D, UnitDir2D};
use crate::morphology::{interface_points, largest_component_filter, slice_boundary};
use crate::morphology::{BoundaryConvention, MorphologyError};
use crate::volume::{LabelSelector, LabelVolume, OperativeStatus, SessionMeta, EXTRAMEATAL, INTRAMEATAL};

/// Extrameatal perpendicular extent above which the extrameatal diameter is
/// reported.
pub const EXTRA_PERP_THRESHOLD_MM: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiameterKind {
    WholeTumour,
    Extrameatal,
    IntraParallel,
    ExtraParallel,
    ExtraPerpendicular,
}

impl DiameterKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DiameterKind::WholeTumour => "WT",
            DiameterKind::Extrameatal => "EM",
            DiameterKind::IntraParallel => "intra_par",
            DiameterKind::ExtraParallel => "extra_par",
            DiameterKind::ExtraPerpendicular => "extra_perp",
        }
    }
}

/// The two diameters that can be reported for a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChosenKind {
    WT,
    EM,
}

impl ChosenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChosenKind::WT => "WT",
            ChosenKind::EM => "EM",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "WT" => Some(ChosenKind::WT),
            "EM" => Some(ChosenKind::EM),
            _ => None,
        }
    }

    pub fn diameter_kind(self) -> DiameterKind {
        match self {
            ChosenKind::WT => DiameterKind::WholeTumour,
            ChosenKind::EM => DiameterKind::Extrameatal,
        }
    }

    fn selector(self) -> LabelSelector {
        match self {
            ChosenKind::WT => LabelSelector::WHOLE,
            ChosenKind::EM => LabelSelector::EXTRA,
        }
    }
}

/// A measured in-plane line on one axial slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diameter {
    pub kind: DiameterKind,
    pub length_mm: f64,
    pub segment: Segment2D,
    pub slice_index: usize,
    pub convention: BoundaryConvention,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfaceSource {
    PerSlice,
    VolumeAggregate,
    Absent,
}

impl InterfaceSource {
    pub fn as_str(self) -> &'static str {
        match self {
            InterfaceSource::PerSlice => "per_slice",
            InterfaceSource::VolumeAggregate => "volume_aggregate",
            InterfaceSource::Absent => "absent",
        }
    }
}

/// Extents measured parallel and perpendicular to the fitted interface line.
///
/// Each feature is maximised over slices on its own, so the three may come
/// from different slices. `interface_dir` is the direction used on the
/// slice where `d_extra_par` was attained.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxFeatures {
    pub d_intra_par: Option<Diameter>,
    pub d_extra_par: Option<Diameter>,
    pub d_extra_perp: Option<Diameter>,
    pub interface_dir: Option<UnitDir2D>,
    pub interface_source: InterfaceSource,
    /// Slices whose own interface was degenerate and used the aggregate fit.
    pub fallback_slices: Vec<usize>,
    /// Slices with both labels that could not be measured at all.
    pub skipped_slices: Vec<usize>,
}

impl AuxFeatures {
    fn absent() -> Self {
        AuxFeatures {
            d_intra_par: None,
            d_extra_par: None,
            d_extra_perp: None,
            interface_dir: None,
            interface_source: InterfaceSource::Absent,
            fallback_slices: Vec::new(),
            skipped_slices: Vec::new(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.d_intra_par.is_some() && self.d_extra_par.is_some() && self.d_extra_perp.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Volumes {
    pub intrameatal_mm3: f64,
    pub extrameatal_mm3: f64,
    pub whole_mm3: f64,
}

/// One evaluated rule of the selection procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionStep {
    pub rule: &'static str,
    pub comparison: String,
    pub outcome: &'static str,
}

impl fmt::Display for DecisionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} -> {}", self.rule, self.comparison, self.outcome)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub kind: ChosenKind,
    pub trace: Vec<DecisionStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementReport {
    pub session: SessionMeta,
    pub convention: BoundaryConvention,
    pub chosen: Diameter,
    pub chosen_kind: ChosenKind,
    pub aux: AuxFeatures,
    pub volumes: Volumes,
    pub decision_trace: Vec<DecisionStep>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureError {
    EmptyTumour,
    EmptyRegion,
    MissingFeatures,
}

impl fmt::Display for MeasureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureError::EmptyTumour => f.write_str("EmptyTumour"),
            MeasureError::EmptyRegion => f.write_str("EmptyRegion"),
            MeasureError::MissingFeatures => f.write_str("MissingFeatures"),
        }
    }
}

impl core::error::Error for MeasureError {}

impl From<MorphologyError> for MeasureError {
    fn from(e: MorphologyError) -> Self {
        match e {
            MorphologyError::EmptyTumour => MeasureError::EmptyTumour,
            MorphologyError::DimMismatch { .. } => MeasureError::EmptyRegion,
        }
    }
}

/// Largest in-plane caliper diameter of the selected labels over all axial
/// slices. Ties between slices go to the lowest slice index.
pub fn region_diameter(
    volume: &LabelVolume,
    selector: LabelSelector,
    kind: DiameterKind,
    convention: BoundaryConvention,
) -> Result<Diameter, MeasureError> {
    let mut best: Option<Diameter> = None;
    for z in 0..volume.dims()[2] {
        let boundary = slice_boundary(volume, selector, z, convention);
        let Ok(hull) = convex_hull(&boundary.points) else {
            continue;
        };
        let segment = max_diameter(&hull);
        if best.is_none_or(|b| segment.length_mm > b.length_mm) {
            best = Some(Diameter { kind, length_mm: segment.length_mm, segment, slice_index: z, convention });
        }
    }
    best.ok_or(MeasureError::EmptyRegion)
}

fn slice_has(volume: &LabelVolume, z: usize, label: u8) -> bool {
    volume.slice(z).contains(&label)
}

/// Segment of length `extent` running along `dir`, placed midway between
/// the two extreme vertices in the perpendicular direction.
fn extent_line(extent: f64, realising: Segment2D, dir: UnitDir2D) -> Segment2D {
    let d = dir.as_point();
    let n = perpendicular(dir).as_point();
    let (t0, t1) = (realising.p.dot(d), realising.q.dot(d));
    let offset = 0.5 * (realising.p.dot(n) + realising.q.dot(n));
    let at = |t: f64| Point2::new(t * d.x + offset * n.x, t * d.y + offset * n.y);
    let mut seg = Segment2D::new(at(t0), at(t1));
    seg.length_mm = extent;
    seg
}

fn extent_feature(
    volume: &LabelVolume,
    selector: LabelSelector,
    z: usize,
    dir: UnitDir2D,
    kind: DiameterKind,
    convention: BoundaryConvention,
) -> Option<Diameter> {
    let boundary = slice_boundary(volume, selector, z, convention);
    let hull = convex_hull(&boundary.points).ok()?;
    let (extent, realising) = directional_extent(&hull, dir);
    Some(Diameter { kind, length_mm: extent, segment: extent_line(extent, realising, dir), slice_index: z, convention })
}

fn keep_max(slot: &mut Option<Diameter>, candidate: Option<Diameter>) {
    if let Some(c) = candidate {
        if slot.is_none_or(|s| c.length_mm > s.length_mm) {
            *slot = Some(c);
        }
    }
}

/// Features measured against the fitted intra/extra interface line.
///
/// Only slices holding both labels are measured. Each such slice uses the
/// principal direction of its own interface points, falling back to the
/// direction fitted over every slice's interface points when its own fit is
/// degenerate.
pub fn aux_features(volume: &LabelVolume, convention: BoundaryConvention) -> AuxFeatures {
    let nz = volume.dims()[2];
    let candidates: Vec<usize> =
        (0..nz).filter(|&z| slice_has(volume, z, INTRAMEATAL) && slice_has(volume, z, EXTRAMEATAL)).collect();
    if candidates.is_empty() {
        return AuxFeatures::absent();
    }

    let per_slice: Vec<(usize, Vec<Point2>)> =
        candidates.iter().map(|&z| (z, interface_points(volume, z).points)).collect();
    let mut aggregate: Option<Result<UnitDir2D, geometry::GeometryError>> = None;

    let mut aux = AuxFeatures::absent();
    let mut extra_par_dir = None;
    let mut used_fallback = false;
    let mut used_any = false;
    for (z, points) in &per_slice {
        let z = *z;
        let dir = match fit_line_direction(points) {
            Ok(d) => d,
            Err(_) => {
                let agg = aggregate.get_or_insert_with(|| {
                    let all: Vec<Point2> = per_slice.iter().flat_map(|(_, p)| p.iter().copied()).collect();
                    fit_line_direction(&all)
                });
                match agg {
                    Ok(d) => {
                        aux.fallback_slices.push(z);
                        used_fallback = true;
                        *d
                    }
                    Err(_) => {
                        aux.skipped_slices.push(z);
                        continue;
                    }
                }
            }
        };
        used_any = true;
        let perp = perpendicular(dir);
        keep_max(
            &mut aux.d_intra_par,
            extent_feature(volume, LabelSelector::INTRA, z, dir, DiameterKind::IntraParallel, convention),
        );
        let before = aux.d_extra_par.map(|d| d.slice_index);
        keep_max(
            &mut aux.d_extra_par,
            extent_feature(volume, LabelSelector::EXTRA, z, dir, DiameterKind::ExtraParallel, convention),
        );
        if aux.d_extra_par.map(|d| d.slice_index) != before {
            extra_par_dir = Some(dir);
        }
        keep_max(
            &mut aux.d_extra_perp,
            extent_feature(volume, LabelSelector::EXTRA, z, perp, DiameterKind::ExtraPerpendicular, convention),
        );
    }
    if !used_any {
        aux.d_intra_par = None;
        aux.d_extra_par = None;
        aux.d_extra_perp = None;
        return aux;
    }
    aux.interface_dir = extra_par_dir;
    aux.interface_source = if used_fallback { InterfaceSource::VolumeAggregate } else { InterfaceSource::PerSlice };
    aux
}

pub fn tumour_volumes(volume: &LabelVolume) -> Volumes {
    let unit = volume.voxel_volume_mm3();
    let (mut intra, mut extra) = (0usize, 0usize);
    for &v in volume.voxels() {
        match v {
            INTRAMEATAL => intra += 1,
            EXTRAMEATAL => extra += 1,
            _ => {}
        }
    }
    let intrameatal_mm3 = intra as f64 * unit;
    let extrameatal_mm3 = extra as f64 * unit;
    Volumes { intrameatal_mm3, extrameatal_mm3, whole_mm3: (intra + extra) as f64 * unit }
}

fn step(rule: &'static str, comparison: String, outcome: &'static str) -> DecisionStep {
    DecisionStep { rule, comparison, outcome }
}

/// Chooses between the whole-tumour and extrameatal diameter.
///
/// Post-operative and purely intracanalicular sessions report the whole
/// tumour. Otherwise the whole tumour is reported when the intrameatal
/// parallel extent is at least the extrameatal one, the extrameatal
/// diameter when the extrameatal perpendicular extent exceeds 2 mm, and the
/// whole tumour otherwise.
pub fn select_diameter(volume: &LabelVolume, aux: &AuxFeatures) -> Result<Decision, MeasureError> {
    let mut trace = Vec::new();
    let status = volume.session().operative_status;
    if status == OperativeStatus::PostOp {
        trace.push(step("operative_status", String::from(status.as_str()), "WT"));
        return Ok(Decision { kind: ChosenKind::WT, trace });
    }
    trace.push(step("operative_status", String::from(status.as_str()), "continue"));

    let extra = volume.count(EXTRAMEATAL);
    if extra == 0 {
        trace.push(step("extrameatal_present", format!("{} voxels", extra), "WT"));
        return Ok(Decision { kind: ChosenKind::WT, trace });
    }
    trace.push(step("extrameatal_present", format!("{} voxels", extra), "continue"));

    let (Some(intra_par), Some(extra_par), Some(extra_perp)) = (aux.d_intra_par, aux.d_extra_par, aux.d_extra_perp)
    else {
        return Err(MeasureError::MissingFeatures);
    };
    let (ip, ep, eq) = (intra_par.length_mm, extra_par.length_mm, extra_perp.length_mm);
    if ip >= ep {
        trace.push(step("intra_par_vs_extra_par", format!("{:?} mm >= {:?} mm", ip, ep), "WT"));
        return Ok(Decision { kind: ChosenKind::WT, trace });
    }
    trace.push(step("intra_par_vs_extra_par", format!("{:?} mm < {:?} mm", ip, ep), "continue"));
    if eq > EXTRA_PERP_THRESHOLD_MM {
        trace.push(step("extra_perp_vs_threshold", format!("{:?} mm > {:?} mm", eq, EXTRA_PERP_THRESHOLD_MM), "EM"));
        Ok(Decision { kind: ChosenKind::EM, trace })
    } else {
        trace.push(step("extra_perp_vs_threshold", format!("{:?} mm <= {:?} mm", eq, EXTRA_PERP_THRESHOLD_MM), "WT"));
        Ok(Decision { kind: ChosenKind::WT, trace })
    }
}

/// Full pipeline for one session: largest-component filtering, features,
/// volumes, selection, and the chosen diameter.
pub fn measure_session(
    volume: &LabelVolume,
    convention: BoundaryConvention,
) -> Result<MeasurementReport, MeasureError> {
    let filtered = largest_component_filter(volume)?;
    let mut warnings = Vec::new();

    let removed = volume.count_selected(LabelSelector::WHOLE) - filtered.count_selected(LabelSelector::WHOLE);
    if removed > 0 {
        warnings.push(format!("largest_component: removed {} disconnected voxels", removed));
    }

    let aux = aux_features(&filtered, convention);
    if aux.is_complete() {
        warnings.push(String::from(
            "interface_proxy: parallel/perpendicular directions come from a line fitted to intra/extra interface points",
        ));
    }
    for z in &aux.fallback_slices {
        warnings.push(format!("interface_fallback: slice {} used the volume-aggregate direction", z));
    }
    for z in &aux.skipped_slices {
        warnings.push(format!("interface_degenerate: slice {} skipped", z));
    }

    let volumes = tumour_volumes(&filtered);
    let decision = select_diameter(&filtered, &aux)?;
    let chosen = region_diameter(&filtered, decision.kind.selector(), decision.kind.diameter_kind(), convention)?;
    if chosen.length_mm == 0.0 {
        warnings.push(format!("degenerate_geometry: {} diameter has zero length", decision.kind.as_str()));
    }

    Ok(MeasurementReport {
        session: filtered.session().clone(),
        convention,
        chosen,
        chosen_kind: decision.kind,
        aux,
        volumes,
        decision_trace: decision.trace,
        warnings,
    })
}
