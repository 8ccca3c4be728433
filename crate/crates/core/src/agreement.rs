//! Agreement between automated and manual diameters: pair filtering,
//! Pearson correlation and Bland-Altman limits of agreement.
//!
//! Differences are always automated minus manual.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::measurement::ChosenKind;
use crate::stats::student_t_two_sided;

/// Multiplier on the difference SD for the 95% limits of agreement.
pub const LOA_Z: f64 = 1.96;
/// p-values below this are reported as zero and flagged.
pub const P_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    PreopExtrameatal,
    PreopIntrameatalOnly,
    Postop,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::PreopExtrameatal, Category::PreopIntrameatalOnly, Category::Postop];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::PreopExtrameatal => "preop_extrameatal",
            Category::PreopIntrameatalOnly => "preop_intrameatal_only",
            Category::Postop => "postop",
        }
    }

    /// Accepts both `snake_case` and `kebab-case` spellings.
    pub fn parse(s: &str) -> Option<Self> {
        Category::ALL.into_iter().find(|c| {
            let name = c.as_str();
            s == name
                || (s.len() == name.len()
                    && s.bytes().zip(name.bytes()).all(|(a, b)| a == b || (a == b'-' && b == b'_')))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedMeasurement {
    pub case_id: String,
    pub session_id: String,
    pub category: Category,
    pub automated_mm: Option<f64>,
    pub manual_mm: Option<f64>,
    pub automated_kind: Option<ChosenKind>,
    pub manual_kind: Option<ChosenKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExclusionReason {
    MissingAutomated,
    MissingManual,
    KindMismatch,
}

impl ExclusionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionReason::MissingAutomated => "missing_automated",
            ExclusionReason::MissingManual => "missing_manual",
            ExclusionReason::KindMismatch => "kind_mismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exclusion {
    pub case_id: String,
    pub session_id: String,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgreementError {
    InsufficientData { n: usize, required: usize },
    ConstantSeries,
}

impl fmt::Display for AgreementError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgreementError::InsufficientData { n, required } => {
                write!(f, "InsufficientData: {} pairs, at least {} required", n, required)
            }
            AgreementError::ConstantSeries => f.write_str("ConstantSeries: a series has zero variance"),
        }
    }
}

impl core::error::Error for AgreementError {}

/// Splits the pairs of `category` into those usable for statistics and
/// those excluded with a reason. Pairs of other categories are ignored.
///
/// A missing automated value is reported before a missing manual one, and
/// both before a kind mismatch.
pub fn filter_pairs(pairs: &[PairedMeasurement], category: Category) -> (Vec<PairedMeasurement>, Vec<Exclusion>) {
    let mut included = Vec::new();
    let mut excluded = Vec::new();
    for p in pairs.iter().filter(|p| p.category == category) {
        let reason = if p.automated_mm.is_none() {
            Some(ExclusionReason::MissingAutomated)
        } else if p.manual_mm.is_none() {
            Some(ExclusionReason::MissingManual)
        } else if p.automated_kind != p.manual_kind {
            Some(ExclusionReason::KindMismatch)
        } else {
            None
        };
        match reason {
            Some(reason) => {
                excluded.push(Exclusion { case_id: p.case_id.clone(), session_id: p.session_id.clone(), reason })
            }
            None => included.push(p.clone()),
        }
    }
    (included, excluded)
}

fn values(pairs: &[PairedMeasurement]) -> (Vec<f64>, Vec<f64>) {
    pairs.iter().filter_map(|p| Some((p.automated_mm?, p.manual_mm?))).unzip()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub n: usize,
    pub r: f64,
    pub p_value: f64,
    /// The exact p-value was below [`P_FLOOR`] and is reported as zero.
    pub p_floored: bool,
}

/// Sample Pearson correlation with a two-sided Student-t p-value on n - 2
/// degrees of freedom.
pub fn pearson_values(x: &[f64], y: &[f64]) -> Result<Correlation, AgreementError> {
    let n = x.len().min(y.len());
    if n < 3 {
        return Err(AgreementError::InsufficientData { n, required: 3 });
    }
    let (x, y) = (&x[..n], &y[..n]);
    let (mx, my) = (mean(x), mean(y));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(AgreementError::ConstantSeries);
    }
    let r = (sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0);
    let exact = if r.abs() >= 1.0 {
        0.0
    } else {
        let df = (n - 2) as f64;
        let t = r * libm::sqrt(df / (1.0 - r * r));
        student_t_two_sided(t, df)
    };
    let p_floored = exact < P_FLOOR;
    Ok(Correlation { n, r, p_value: if p_floored { 0.0 } else { exact }, p_floored })
}

pub fn pearson(pairs: &[PairedMeasurement]) -> Result<Correlation, AgreementError> {
    let (a, m) = values(pairs);
    pearson_values(&a, &m)
}

/// `bias ± 1.96·sd`.
#[inline]
pub fn limits_of_agreement(bias_mm: f64, sd_mm: f64) -> (f64, f64) {
    (bias_mm - LOA_Z * sd_mm, bias_mm + LOA_Z * sd_mm)
}

/// One Bland-Altman plot point: pair mean against pair difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotPoint {
    pub mean_mm: f64,
    pub diff_mm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlandAltman {
    pub n: usize,
    pub bias_mm: f64,
    pub sd_mm: f64,
    pub loa_low_mm: f64,
    pub loa_high_mm: f64,
    pub points: Vec<PlotPoint>,
}

/// Bias and sample (n - 1) SD of the differences.
pub fn bland_altman_values(automated: &[f64], manual: &[f64]) -> Result<BlandAltman, AgreementError> {
    let n = automated.len().min(manual.len());
    if n < 2 {
        return Err(AgreementError::InsufficientData { n, required: 2 });
    }
    let points: Vec<PlotPoint> =
        automated.iter().zip(manual).map(|(a, m)| PlotPoint { mean_mm: 0.5 * (a + m), diff_mm: a - m }).collect();
    let diffs: Vec<f64> = points.iter().map(|p| p.diff_mm).collect();
    let bias_mm = mean(&diffs);
    let ss: f64 = diffs.iter().map(|d| (d - bias_mm) * (d - bias_mm)).sum();
    let sd_mm = libm::sqrt(ss / (n - 1) as f64);
    let (loa_low_mm, loa_high_mm) = limits_of_agreement(bias_mm, sd_mm);
    Ok(BlandAltman { n, bias_mm, sd_mm, loa_low_mm, loa_high_mm, points })
}

pub fn bland_altman(pairs: &[PairedMeasurement]) -> Result<BlandAltman, AgreementError> {
    let (a, m) = values(pairs);
    bland_altman_values(&a, &m)
}

/// Everything reported for one comparison category.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementStats {
    pub category: Category,
    pub bland_altman: BlandAltman,
    pub correlation: Result<Correlation, AgreementError>,
    pub excluded: Vec<Exclusion>,
}

impl AgreementStats {
    pub fn n(&self) -> usize {
        self.bland_altman.n
    }
}

/// Category analysis. Fails only when fewer than two pairs survive
/// filtering; a correlation that cannot be computed is kept as its error.
pub fn analyse(
    pairs: &[PairedMeasurement],
    category: Category,
) -> Result<AgreementStats, (AgreementError, Vec<Exclusion>)> {
    let (included, excluded) = filter_pairs(pairs, category);
    let ba = match bland_altman(&included) {
        Ok(ba) => ba,
        Err(e) => return Err((e, excluded)),
    };
    Ok(AgreementStats { category, bland_altman: ba, correlation: pearson(&included), excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    fn pair(
        id: usize,
        a: Option<f64>,
        m: Option<f64>,
        ak: Option<ChosenKind>,
        mk: Option<ChosenKind>,
    ) -> PairedMeasurement {
        PairedMeasurement {
            case_id: String::from("c"),
            session_id: format!("s{}", id),
            category: Category::PreopExtrameatal,
            automated_mm: a,
            manual_mm: m,
            automated_kind: ak,
            manual_kind: mk,
        }
    }

    const EM: Option<ChosenKind> = Some(ChosenKind::EM);
    const WT: Option<ChosenKind> = Some(ChosenKind::WT);

    #[test]
    fn exclusion_reasons() {
        let pairs = vec![
            pair(0, Some(10.0), Some(9.0), EM, WT),
            pair(1, None, Some(9.0), EM, EM),
            pair(2, Some(10.0), None, EM, EM),
            pair(3, Some(10.0), Some(9.5), EM, EM),
        ];
        let (inc, exc) = filter_pairs(&pairs, Category::PreopExtrameatal);
        assert_eq!(inc, vec![pairs[3].clone()]);
        let reasons: Vec<_> = exc.iter().map(|e| e.reason).collect();
        assert_eq!(
            reasons,
            vec![ExclusionReason::KindMismatch, ExclusionReason::MissingAutomated, ExclusionReason::MissingManual]
        );
        let (inc, exc) = filter_pairs(&pairs, Category::Postop);
        assert!(inc.is_empty() && exc.is_empty());
    }

    #[test]
    fn perfect_linearity() {
        let x: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let c = pearson_values(&x, &y).unwrap();
        assert_eq!(c.r, 1.0);
        assert_eq!(c.p_value, 0.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson_values(&x, &neg).unwrap().r, -1.0);
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(
            pearson_values(&[1.0, 2.0], &[1.0, 2.0]),
            Err(AgreementError::InsufficientData { n: 2, required: 3 })
        );
        assert_eq!(pearson_values(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]), Err(AgreementError::ConstantSeries));
    }

    #[test]
    fn bland_altman_analytic() {
        let ba = bland_altman_values(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(ba.bias_mm, 2.0);
        assert_eq!(ba.sd_mm, 1.0);
        assert!((ba.loa_low_mm - 0.04).abs() < 1e-12);
        assert!((ba.loa_high_mm - 3.96).abs() < 1e-12);
        let same = bland_altman_values(&[5.0, 6.0], &[5.0, 6.0]).unwrap();
        assert_eq!((same.bias_mm, same.sd_mm, same.loa_low_mm, same.loa_high_mm), (0.0, 0.0, 0.0, 0.0));
        assert!(matches!(bland_altman_values(&[1.0], &[1.0]), Err(AgreementError::InsufficientData { .. })));
    }

    #[test]
    fn reported_interval() {
        let (lo, hi) = limits_of_agreement(0.777, 1.057);
        assert!((lo - -1.294).abs() <= 0.005 && (hi - 2.848).abs() <= 0.005);
        assert!((lo - -1.295).abs() <= 0.001 && (hi - 2.849).abs() <= 0.001);
    }

    #[test]
    fn category_names() {
        assert_eq!(Category::parse("preop-intrameatal-only"), Some(Category::PreopIntrameatalOnly));
        assert_eq!(Category::parse("postop"), Some(Category::Postop));
        assert_eq!(Category::parse("post-op"), None);
    }
}
