use proptest::prelude::*;
use vsmeasure_core::geometry::{convex_hull, directional_extent, Point2, Segment2D, UnitDir2D};
use vsmeasure_core::measurement::{
    aux_features, measure_session, region_diameter, select_diameter, tumour_volumes, AuxFeatures, ChosenKind, Diameter,
    DiameterKind, InterfaceSource,
};
use vsmeasure_core::morphology::{largest_component_filter, slice_boundary, BoundaryConvention};
use vsmeasure_core::phantom;
use vsmeasure_core::volume::{LabelSelector, LabelVolume, OperativeStatus, SessionMeta, EXTRAMEATAL};

const CENTERS: BoundaryConvention = BoundaryConvention::PixelCenters;

fn feature(kind: DiameterKind, length: f64) -> Diameter {
    Diameter {
        kind,
        length_mm: length,
        segment: Segment2D::new(Point2::new(0.0, 0.0), Point2::new(length, 0.0)),
        slice_index: 0,
        convention: CENTERS,
    }
}

fn aux(intra_par: f64, extra_par: f64, extra_perp: f64) -> AuxFeatures {
    AuxFeatures {
        d_intra_par: Some(feature(DiameterKind::IntraParallel, intra_par)),
        d_extra_par: Some(feature(DiameterKind::ExtraParallel, extra_par)),
        d_extra_perp: Some(feature(DiameterKind::ExtraPerpendicular, extra_perp)),
        interface_dir: Some(UnitDir2D::Y),
        interface_source: InterfaceSource::PerSlice,
        fallback_slices: vec![],
        skipped_slices: vec![],
    }
}

#[test]
fn decision_examples() {
    let pre = phantom::bar_and_square(OperativeStatus::PreOp);
    let post = phantom::bar_and_square(OperativeStatus::PostOp);
    assert_eq!(select_diameter(&pre, &aux(8.0, 6.0, 1.0)).unwrap().kind, ChosenKind::WT);
    assert_eq!(select_diameter(&pre, &aux(5.0, 7.0, 3.5)).unwrap().kind, ChosenKind::EM);
    assert_eq!(select_diameter(&pre, &aux(5.0, 7.0, 2.0)).unwrap().kind, ChosenKind::WT);
    assert_eq!(select_diameter(&pre, &aux(7.0, 7.0, 9.0)).unwrap().kind, ChosenKind::WT);
    assert_eq!(select_diameter(&post, &aux(5.0, 7.0, 3.5)).unwrap().kind, ChosenKind::WT);
    let trace = select_diameter(&pre, &aux(5.0, 7.0, 2.0)).unwrap().trace;
    let lines: Vec<String> = trace.iter().map(|s| s.to_string()).collect();
    assert_eq!(
        lines,
        [
            "operative_status: pre_op -> continue",
            "extrameatal_present: 36 voxels -> continue",
            "intra_par_vs_extra_par: 5.0 mm < 7.0 mm -> continue",
            "extra_perp_vs_threshold: 2.0 mm <= 2.0 mm -> WT",
        ]
    );
}

#[test]
fn intracanalicular_collapses_to_whole_tumour() {
    let vol = phantom::ellipse(4.0, 2.0, 0.5, 1.0, 2, 1);
    let report = measure_session(&vol, CENTERS).unwrap();
    assert_eq!(report.chosen_kind, ChosenKind::WT);
    let intra = region_diameter(&vol, LabelSelector::INTRA, DiameterKind::WholeTumour, CENTERS).unwrap();
    assert_eq!(report.chosen, intra);
    assert_eq!(report.decision_trace.last().unwrap().rule, "extrameatal_present");
}

#[test]
fn two_region_phantom_end_to_end() {
    let vol = phantom::bar_and_square(OperativeStatus::PreOp);
    let report = measure_session(&vol, CENTERS).unwrap();
    assert_eq!(report.chosen_kind, ChosenKind::EM);
    let em = region_diameter(&vol, LabelSelector::EXTRA, DiameterKind::Extrameatal, CENTERS).unwrap();
    assert_eq!(report.chosen, em);
    assert!((em.length_mm - 5.0 * std::f64::consts::SQRT_2).abs() < 1e-12);

    let post = measure_session(&phantom::bar_and_square(OperativeStatus::PostOp), CENTERS).unwrap();
    assert_eq!(post.chosen_kind, ChosenKind::WT);
    assert_eq!(post.decision_trace.len(), 1);
    // deterministic
    assert_eq!(measure_session(&vol, CENTERS).unwrap(), report);
}

#[test]
fn ellipse_phantom_geometry() {
    let (a, b, s, thickness) = (10.0, 5.0, 0.5, 1.5);
    let vol = phantom::ellipse(a, b, s, thickness, 3, EXTRAMEATAL);
    let tol = (s * s + s * s).sqrt();
    assert!(tol <= 0.708);
    for convention in [BoundaryConvention::PixelCenters, BoundaryConvention::PixelCorners] {
        let d = region_diameter(&vol, LabelSelector::WHOLE, DiameterKind::WholeTumour, convention).unwrap();
        assert!((d.length_mm - 2.0 * a).abs() <= tol, "{:?}: {}", convention, d.length_mm);
        let hull = convex_hull(&slice_boundary(&vol, LabelSelector::WHOLE, 0, convention).points).unwrap();
        assert!((directional_extent(&hull, UnitDir2D::X).0 - 2.0 * a).abs() <= tol);
        assert!((directional_extent(&hull, UnitDir2D::Y).0 - 2.0 * b).abs() <= tol);
    }
    let per_slice = tumour_volumes(&vol).whole_mm3 / 3.0;
    let expected = std::f64::consts::PI * a * b * thickness;
    assert!((per_slice - expected).abs() / expected <= 0.02, "{} vs {}", per_slice, expected);
}

#[test]
fn rotated_fixture_has_identical_features() {
    let vol = phantom::bar_and_square(OperativeStatus::PreOp);
    let rot = phantom::rotate_quarter(&vol);
    for convention in [BoundaryConvention::PixelCenters, BoundaryConvention::PixelCorners] {
        let a = aux_features(&vol, convention);
        let r = aux_features(&rot, convention);
        for (x, y) in [(a.d_intra_par, r.d_intra_par), (a.d_extra_par, r.d_extra_par), (a.d_extra_perp, r.d_extra_perp)]
        {
            assert!((x.unwrap().length_mm - y.unwrap().length_mm).abs() <= 1e-9);
        }
        assert_eq!(r.interface_dir, Some(UnitDir2D::X));
        let d = region_diameter(&vol, LabelSelector::WHOLE, DiameterKind::WholeTumour, convention).unwrap();
        let dr = region_diameter(&rot, LabelSelector::WHOLE, DiameterKind::WholeTumour, convention).unwrap();
        assert!((d.length_mm - dr.length_mm).abs() <= 1e-9);
    }
    assert_eq!(
        measure_session(&rot, CENTERS).unwrap().chosen_kind,
        measure_session(&vol, CENTERS).unwrap().chosen_kind
    );
}

fn two_label_blob() -> impl Strategy<Value = LabelVolume> {
    (4usize..14, 4usize..14, 1usize..4, 0.3..2.0f64, 0.3..2.0f64).prop_flat_map(|(nx, ny, nz, sx, sy)| {
        prop::collection::vec(prop_oneof![2 => Just(0u8), 1 => Just(1u8), 2 => Just(2u8)], nx * ny * nz).prop_map(
            move |v| {
                LabelVolume::new([nx, ny, nz], [sx, sy, 1.0], v, SessionMeta::new("c", "s", OperativeStatus::PreOp))
                    .unwrap()
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn whole_tumour_dominates_extrameatal(vol in two_label_blob()) {
        prop_assume!(vol.count(EXTRAMEATAL) > 0);
        for convention in [BoundaryConvention::PixelCenters, BoundaryConvention::PixelCorners] {
            let wt = region_diameter(&vol, LabelSelector::WHOLE, DiameterKind::WholeTumour, convention).unwrap();
            let em = region_diameter(&vol, LabelSelector::EXTRA, DiameterKind::Extrameatal, convention).unwrap();
            prop_assert!(wt.length_mm >= em.length_mm - 1e-12);
        }
    }

    #[test]
    fn lengths_scale_with_in_plane_spacing(vol in two_label_blob(), k in 0.25..4.0f64) {
        prop_assume!(vol.count(EXTRAMEATAL) > 0);
        let [sx, sy, sz] = vol.spacing_mm();
        let scaled = LabelVolume::new(vol.dims(), [sx * k, sy * k, sz], vol.voxels().to_vec(), vol.session().clone()).unwrap();
        let a = region_diameter(&vol, LabelSelector::WHOLE, DiameterKind::WholeTumour, CENTERS).unwrap();
        let b = region_diameter(&scaled, LabelSelector::WHOLE, DiameterKind::WholeTumour, CENTERS).unwrap();
        prop_assert!((b.length_mm - k * a.length_mm).abs() <= 1e-9 * (k * a.length_mm).max(1.0));
        let fa = aux_features(&vol, CENTERS);
        let fb = aux_features(&scaled, CENTERS);
        prop_assert_eq!(fa.d_extra_par.is_some(), fb.d_extra_par.is_some());
        if let (Some(x), Some(y)) = (fa.d_extra_par, fb.d_extra_par) {
            prop_assert!((y.length_mm - k * x.length_mm).abs() <= 1e-6 * (k * x.length_mm).max(1.0));
        }
    }

    #[test]
    fn volumes_are_additive(vol in two_label_blob()) {
        let v = tumour_volumes(&vol);
        prop_assert!((v.whole_mm3 - (v.intrameatal_mm3 + v.extrameatal_mm3)).abs() <= 1e-6 * v.whole_mm3.max(1e-300));
        prop_assert!(v.intrameatal_mm3 >= 0.0 && v.extrameatal_mm3 >= 0.0);
    }

    #[test]
    fn session_reports_are_consistent(vol in two_label_blob()) {
        match measure_session(&vol, CENTERS) {
            Ok(r) => {
                prop_assert_eq!(r.chosen.kind, r.chosen_kind.diameter_kind());
                prop_assert!(!r.decision_trace.is_empty());
                prop_assert!((r.chosen.length_mm - r.chosen.segment.length_mm).abs() <= 1e-9);
                for d in [r.aux.d_intra_par, r.aux.d_extra_par, r.aux.d_extra_perp].into_iter().flatten() {
                    prop_assert!((d.length_mm - d.segment.length_mm).abs() <= 1e-9 * d.length_mm.max(1.0));
                }
                let filtered = largest_component_filter(&vol).unwrap();
                let kind_sel = match r.chosen_kind { ChosenKind::WT => LabelSelector::WHOLE, ChosenKind::EM => LabelSelector::EXTRA };
                let again = region_diameter(&filtered, kind_sel, r.chosen.kind, CENTERS).unwrap();
                prop_assert_eq!(again, r.chosen);
                prop_assert_eq!(measure_session(&vol, CENTERS).unwrap(), r);
            }
            Err(e) => {
                let msg = e.to_string();
                prop_assert!(msg == "EmptyTumour" || msg == "MissingFeatures", "{}", msg);
            }
        }
    }
}
