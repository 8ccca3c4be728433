//! SVG output: per-slice measurement overlays and agreement plots.
//!
//! Documents are assembled as plain text with every coordinate printed to
//! three decimals, so identical inputs give identical bytes.

use std::fmt::Write;

use vsmeasure_core::agreement::BlandAltman;
use vsmeasure_core::geometry::{fit_line_direction, Point2, Segment2D, UnitDir2D};
use vsmeasure_core::measurement::{ChosenKind, Diameter, MeasurementReport};
use vsmeasure_core::morphology::{interface_points, largest_component_filter};
use vsmeasure_core::volume::{LabelVolume, EXTRAMEATAL, INTRAMEATAL};

use crate::error::{Error, Result};
use crate::report::fixed3_text as f3;

pub const INTRAMEATAL_COLOUR: &str = "#00c000";
pub const EXTRAMEATAL_COLOUR: &str = "#ffff00";
pub const INTERFACE_COLOUR: &str = "#ffffff";
pub const EM_COLOUR: &str = "#ff0000";
pub const WT_COLOUR: &str = "#ffa500";
pub const INTRA_PAR_COLOUR: &str = "#00ff00";
pub const EXTRA_PAR_COLOUR: &str = "#0000ff";
pub const EXTRA_PERP_COLOUR: &str = "#ffd700";
pub const SCALE_BAR_MM: f64 = 10.0;

const TARGET_UNITS: f64 = 512.0;
const MARGIN: f64 = 16.0;
const FOOTER: f64 = 48.0;

/// Units per mm: a multiple of 1/8 so scale-bar lengths print exactly.
fn units_per_mm(extent_mm: f64) -> f64 {
    ((TARGET_UNITS / extent_mm * 8.0).floor() / 8.0).max(0.125)
}

struct Frame {
    k: f64,
}

impl Frame {
    fn x(&self, mm: f64) -> String {
        f3(MARGIN + mm * self.k)
    }
    fn y(&self, mm: f64) -> String {
        f3(MARGIN + mm * self.k)
    }
}

/// Outline of the pixels of `label` in slice `z`, drawn along pixel edges.
fn contour_path(vol: &LabelVolume, z: usize, label: u8, f: &Frame) -> String {
    let [nx, ny, _] = vol.dims();
    let [sx, sy, _] = vol.spacing_mm();
    let inside = |i: i64, j: i64| {
        i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny && vol.label(i as usize, j as usize, z) == label
    };
    let mut d = String::new();
    for j in 0..ny as i64 {
        for i in 0..nx as i64 {
            if !inside(i, j) {
                continue;
            }
            let (x0, x1) = (i as f64 * sx, (i + 1) as f64 * sx);
            let (y0, y1) = (j as f64 * sy, (j + 1) as f64 * sy);
            let edges = [
                (!inside(i, j - 1), (x0, y0, x1, y0)),
                (!inside(i + 1, j), (x1, y0, x1, y1)),
                (!inside(i, j + 1), (x0, y1, x1, y1)),
                (!inside(i - 1, j), (x0, y0, x0, y1)),
            ];
            for (open, (ax, ay, bx, by)) in edges {
                if open {
                    let _ = write!(d, "M{} {}L{} {}", f.x(ax), f.y(ay), f.x(bx), f.y(by));
                }
            }
        }
    }
    d
}

fn segment_line(out: &mut String, f: &Frame, s: &Segment2D, colour: &str, role: &str, width: f64) {
    let _ = writeln!(
        out,
        r#"<line data-role="{}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="{}" stroke-linecap="round"/>"#,
        role,
        f.x(s.p.x),
        f.y(s.p.y),
        f.x(s.q.x),
        f.y(s.q.y),
        colour,
        f3(width)
    );
}

/// Overlay of the chosen diameter's slice.
pub fn render_overlay(volume: &LabelVolume, report: &MeasurementReport) -> Result<String> {
    render_slice(volume, report, report.chosen.slice_index)
}

/// Overlay of slice `z`; the chosen and auxiliary segments are drawn only
/// where they were measured on that slice.
pub fn render_slice(volume: &LabelVolume, report: &MeasurementReport, z: usize) -> Result<String> {
    let [nx, ny, nz] = volume.dims();
    if z >= nz {
        return Err(Error::SliceOutOfRange { slice: z, slices: nz });
    }
    let shown = largest_component_filter(volume).unwrap_or_else(|_| volume.clone());
    let [sx, sy, _] = volume.spacing_mm();
    let (w_mm, h_mm) = (nx as f64 * sx, ny as f64 * sy);
    let f = Frame { k: units_per_mm(w_mm.max(h_mm).max(SCALE_BAR_MM)) };
    let width = 2.0 * MARGIN + w_mm.max(SCALE_BAR_MM) * f.k;
    let height = 2.0 * MARGIN + h_mm * f.k + FOOTER;
    let stroke = (f.k * sx.min(sy) * 0.15).clamp(1.0, 4.0);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" data-units-per-mm="{k}" data-slice="{z}">"#,
        w = f3(width),
        h = f3(height),
        k = f3(f.k),
        z = z
    );
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{}" height="{}" fill="#000000"/>"##, f3(width), f3(height));
    for (label, colour, role) in [
        (INTRAMEATAL, INTRAMEATAL_COLOUR, "intrameatal-contour"),
        (EXTRAMEATAL, EXTRAMEATAL_COLOUR, "extrameatal-contour"),
    ] {
        let d = contour_path(&shown, z, label, &f);
        if !d.is_empty() {
            let _ = writeln!(
                out,
                r#"<path data-role="{}" d="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
                role,
                d,
                colour,
                f3(stroke)
            );
        }
    }

    let iface = interface_points(&shown, z);
    if iface.len() >= 2 {
        let dir = fit_line_direction(&iface.points).ok().or(report.aux.interface_dir).unwrap_or(UnitDir2D::X);
        let mut pts: Vec<Point2> = iface.points.clone();
        let key = |p: &Point2| p.dot(dir.as_point());
        pts.sort_by(|a, b| key(a).total_cmp(&key(b)).then(a.lex_cmp(b)));
        let list: Vec<String> = pts.iter().map(|p| format!("{},{}", f.x(p.x), f.y(p.y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline data-role="interface" points="{}" fill="none" stroke="{}" stroke-width="{}" stroke-dasharray="4 3"/>"#,
            list.join(" "),
            INTERFACE_COLOUR,
            f3(stroke)
        );
    }

    let aux = &report.aux;
    let layers: [(&Option<Diameter>, &str, &str); 3] = [
        (&aux.d_intra_par, INTRA_PAR_COLOUR, "d_intra_par"),
        (&aux.d_extra_par, EXTRA_PAR_COLOUR, "d_extra_par"),
        (&aux.d_extra_perp, EXTRA_PERP_COLOUR, "d_extra_perp"),
    ];
    for (d, colour, role) in layers {
        if let Some(d) = d.as_ref().filter(|d| d.slice_index == z) {
            segment_line(&mut out, &f, &d.segment, colour, role, stroke);
        }
    }

    let chosen = &report.chosen;
    let colour = match report.chosen_kind {
        ChosenKind::EM => EM_COLOUR,
        ChosenKind::WT => WT_COLOUR,
    };
    if chosen.slice_index == z {
        segment_line(&mut out, &f, &chosen.segment, colour, "measurement", stroke * 1.5);
    }

    let base = MARGIN + h_mm * f.k;
    let bar = SCALE_BAR_MM * f.k;
    let _ = writeln!(
        out,
        r##"<line data-role="scale-bar" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#ffffff" stroke-width="2"/>"##,
        f3(MARGIN),
        f3(MARGIN + bar),
        y = f3(base + 16.0)
    );
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" fill="#ffffff" font-family="sans-serif" font-size="12">10 mm</text>"##,
        f3(MARGIN + bar + 6.0),
        f3(base + 20.0)
    );
    let _ = writeln!(
        out,
        r##"<text data-role="annotation" x="{}" y="{}" fill="{}" font-family="sans-serif" font-size="14">{} {:.1} mm (slice {})</text>"##,
        f3(MARGIN),
        f3(base + 40.0),
        colour,
        report.chosen_kind.as_str(),
        chosen.length_mm,
        chosen.slice_index
    );
    out.push_str("</svg>\n");
    Ok(out)
}

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

const PLOT_W: f64 = 480.0;
const PLOT_H: f64 = 360.0;
const PAD: f64 = 56.0;

impl Axes {
    fn fit(xs: impl Iterator<Item = f64>, ys: impl Iterator<Item = f64>) -> Self {
        fn span(v: Vec<f64>) -> (f64, f64) {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() {
                return (0.0, 1.0);
            }
            let pad = ((hi - lo) * 0.08).max(0.5);
            (lo - pad, hi + pad)
        }
        let (x0, x1) = span(xs.collect());
        let (y0, y1) = span(ys.collect());
        Axes { x0, x1, y0, y1 }
    }
    fn px(&self, x: f64) -> String {
        f3(PAD + (x - self.x0) / (self.x1 - self.x0) * PLOT_W)
    }
    fn py(&self, y: f64) -> String {
        f3(PAD + (self.y1 - y) / (self.y1 - self.y0) * PLOT_H)
    }
}

fn plot_frame(out: &mut String, ax: &Axes, title: &str, xlabel: &str, ylabel: &str) {
    let (w, h) = (PLOT_W + 2.0 * PAD, PLOT_H + 2.0 * PAD);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = f3(w),
        h = f3(h)
    );
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##, f3(w), f3(h));
    let _ = writeln!(
        out,
        r##"<rect data-role="axes" x="{p}" y="{p}" width="{}" height="{}" fill="none" stroke="#000000"/>"##,
        f3(PLOT_W),
        f3(PLOT_H),
        p = f3(PAD)
    );
    let esc = |s: &str| s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        f3(PAD + PLOT_W / 2.0),
        f3(PAD / 2.0),
        esc(title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        f3(PAD + PLOT_W / 2.0),
        f3(h - 12.0),
        esc(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{y}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {y})">{}</text>"#,
        esc(ylabel),
        y = f3(PAD + PLOT_H / 2.0)
    );
    for (v, label) in [(ax.x0, ax.px(ax.x0)), (ax.x1, ax.px(ax.x1))] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="10">{:.1}</text>"#,
            label,
            f3(PAD + PLOT_H + 14.0),
            v
        );
    }
    for (v, label) in [(ax.y0, ax.py(ax.y0)), (ax.y1, ax.py(ax.y1))] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="10">{:.1}</text>"#,
            f3(PAD - 4.0),
            label,
            v
        );
    }
}

fn circles(out: &mut String, ax: &Axes, pts: impl Iterator<Item = (f64, f64)>) {
    for (x, y) in pts {
        let _ =
            writeln!(out, r##"<circle data-role="point" cx="{}" cy="{}" r="3" fill="#1f77b4"/>"##, ax.px(x), ax.py(y));
    }
}

fn hline(out: &mut String, ax: &Axes, y: f64, colour: &str, role: &str) {
    let _ = writeln!(
        out,
        r#"<line data-role="{}" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="1.5" stroke-dasharray="6 4"/>"#,
        role,
        f3(PAD),
        f3(PAD + PLOT_W),
        colour,
        y = ax.py(y)
    );
}

/// Manual diameter (x) against automated diameter (y), with the identity line.
pub fn scatter_plot(title: &str, pairs: &[(f64, f64)]) -> String {
    let both = || pairs.iter().flat_map(|&(a, m)| [a, m]);
    let ax = Axes::fit(both(), both());
    let mut out = String::new();
    plot_frame(&mut out, &ax, title, "manual diameter (mm)", "automated diameter (mm)");
    let lo = ax.x0.max(ax.y0);
    let hi = ax.x1.min(ax.y1);
    let _ = writeln!(
        out,
        r##"<line data-role="identity" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#808080" stroke-width="1"/>"##,
        ax.px(lo),
        ax.py(lo),
        ax.px(hi),
        ax.py(hi)
    );
    circles(&mut out, &ax, pairs.iter().map(|&(a, m)| (m, a)));
    out.push_str("</svg>\n");
    out
}

/// Bland-Altman plot: bias as a red dashed line, limits as black dashed lines.
pub fn bland_altman_plot(title: &str, ba: &BlandAltman) -> String {
    let ys = ba.points.iter().map(|p| p.diff_mm).chain([ba.loa_low_mm, ba.loa_high_mm]);
    let ax = Axes::fit(ba.points.iter().map(|p| p.mean_mm), ys);
    let mut out = String::new();
    plot_frame(&mut out, &ax, title, "mean of automated and manual (mm)", "automated - manual (mm)");
    hline(&mut out, &ax, ba.bias_mm, "#ff0000", "bias");
    hline(&mut out, &ax, ba.loa_low_mm, "#000000", "loa-low");
    hline(&mut out, &ax, ba.loa_high_mm, "#000000", "loa-high");
    circles(&mut out, &ax, ba.points.iter().map(|p| (p.mean_mm, p.diff_mm)));
    for (v, role) in [(ba.bias_mm, "bias"), (ba.loa_low_mm, "loa-low"), (ba.loa_high_mm, "loa-high")] {
        let _ = writeln!(
            out,
            r#"<text data-role="{}-label" x="{}" y="{}" font-family="sans-serif" font-size="10">{:.3}</text>"#,
            role,
            f3(PAD + PLOT_W + 4.0),
            ax.py(v),
            v
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use vsmeasure_core::measure_session;
    use vsmeasure_core::morphology::BoundaryConvention;
    use vsmeasure_core::phantom;
    use vsmeasure_core::volume::OperativeStatus;

    #[test]
    fn scale_is_a_multiple_of_one_eighth() {
        for e in [1.0, 7.3, 18.0, 123.456, 5000.0] {
            let k = units_per_mm(e);
            assert_eq!((k * 8.0).fract(), 0.0);
        }
    }

    #[test]
    fn slice_out_of_range() {
        let vol = phantom::bar_and_square(OperativeStatus::PreOp);
        let report = measure_session(&vol, BoundaryConvention::PixelCenters).unwrap();
        assert!(matches!(render_slice(&vol, &report, 1), Err(Error::SliceOutOfRange { slice: 1, slices: 1 })));
    }
}
