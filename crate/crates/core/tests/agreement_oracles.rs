use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::statistics::Statistics;
use vsmeasure_core::agreement::{bland_altman_values, limits_of_agreement, pearson_values, LOA_Z};

fn reference_pearson(x: &[f64], y: &[f64]) -> (f64, f64) {
    let r = x.iter().copied().covariance(y.iter().copied()) / (x.std_dev() * y.std_dev());
    let df = (x.len() - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).unwrap();
    (r, 2.0 * (1.0 - dist.cdf(t.abs())))
}

#[test]
fn pearson_matches_reference_on_random_pairs() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    for case in 0..200 {
        let n = rng.random_range(3..120);
        let slope = rng.random_range(-2.0..2.0);
        let noise = rng.random_range(0.01..20.0);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(2.0..40.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| slope * v + rng.random_range(-noise..noise)).collect();
        let got = pearson_values(&x, &y).unwrap();
        let (r, p) = reference_pearson(&x, &y);
        assert!((got.r - r).abs() <= 1e-9, "case {}: r {} vs {}", case, got.r, r);
        assert!((got.p_value - p).abs() <= 1e-6, "case {}: p {} vs {}", case, got.p_value, p);
    }
}

#[test]
fn bland_altman_matches_reference() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.random_range(2..80);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..30.0)).collect();
        let m: Vec<f64> = a.iter().map(|v| v - rng.random_range(-3.0..4.0)).collect();
        let d: Vec<f64> = a.iter().zip(&m).map(|(x, y)| x - y).collect();
        let ba = bland_altman_values(&a, &m).unwrap();
        assert!((ba.bias_mm - d.iter().mean()).abs() <= 1e-9);
        assert!((ba.sd_mm - d.iter().std_dev()).abs() <= 1e-9);
        assert_eq!((ba.loa_low_mm, ba.loa_high_mm), limits_of_agreement(ba.bias_mm, ba.sd_mm));
        assert_eq!(ba.points.len(), n);
    }
}

fn series() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..40).prop_flat_map(|n| {
        (prop::collection::vec(0.0..50.0f64, n), prop::collection::vec(-5.0..5.0f64, n))
            .prop_map(|(m, e)| (m.iter().zip(&e).map(|(a, b)| a + b).collect(), m))
    })
}

proptest! {
    #[test]
    fn swap_mirrors_statistics((auto, manual) in series()) {
        let ab = bland_altman_values(&auto, &manual).unwrap();
        let ba = bland_altman_values(&manual, &auto).unwrap();
        prop_assert!((ab.bias_mm + ba.bias_mm).abs() <= 1e-12);
        prop_assert!((ab.sd_mm - ba.sd_mm).abs() <= 1e-12);
        prop_assert!((ab.loa_low_mm + ba.loa_high_mm).abs() <= 1e-12);
        prop_assert!((ab.loa_high_mm + ba.loa_low_mm).abs() <= 1e-12);
        prop_assert!((ab.loa_high_mm - ab.loa_low_mm - 2.0 * LOA_Z * ab.sd_mm).abs() <= 1e-12);
        if let (Ok(x), Ok(y)) = (pearson_values(&auto, &manual), pearson_values(&manual, &auto)) {
            prop_assert!((x.r.abs() - y.r.abs()).abs() <= 1e-12);
        }
    }

    #[test]
    fn shift_moves_bias_only((auto, manual) in series(), c in -10.0..10.0f64) {
        let shifted: Vec<f64> = auto.iter().map(|v| v + c).collect();
        let a = bland_altman_values(&auto, &manual).unwrap();
        let b = bland_altman_values(&shifted, &manual).unwrap();
        prop_assert!((b.bias_mm - a.bias_mm - c).abs() <= 1e-9);
        prop_assert!((b.loa_low_mm - a.loa_low_mm - c).abs() <= 1e-9);
        prop_assert!((b.loa_high_mm - a.loa_high_mm - c).abs() <= 1e-9);
        prop_assert!((b.sd_mm - a.sd_mm).abs() <= 1e-9);
        if let (Ok(x), Ok(y)) = (pearson_values(&auto, &manual), pearson_values(&shifted, &manual)) {
            prop_assert!((x.r - y.r).abs() <= 1e-9);
        }
    }

    #[test]
    fn pearson_is_affine_invariant((auto, manual) in series(), s in 0.1..10.0f64, c in -10.0..10.0f64) {
        let moved: Vec<f64> = manual.iter().map(|v| s * v + c).collect();
        if let (Ok(x), Ok(y)) = (pearson_values(&auto, &manual), pearson_values(&auto, &moved)) {
            prop_assert!((x.r - y.r).abs() <= 1e-9);
            prop_assert!((-1.0..=1.0).contains(&x.r));
            prop_assert!((0.0..=1.0).contains(&x.p_value));
        }
    }
}
