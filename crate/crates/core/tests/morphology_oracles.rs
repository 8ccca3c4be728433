use proptest::prelude::*;
use vsmeasure_core::geometry::Point2;
use vsmeasure_core::morphology::{
    boundary_pixels, connected_components, dice, interface_points, largest_component_filter, slice_boundary,
    BinaryMask3D, BoundaryConvention, Connectivity,
};
use vsmeasure_core::volume::{LabelSelector, LabelVolume, OperativeStatus, SessionMeta};

fn meta() -> SessionMeta {
    SessionMeta::new("c", "s", OperativeStatus::PreOp)
}

fn coords(idx: usize, dims: [usize; 3]) -> [i64; 3] {
    [(idx % dims[0]) as i64, ((idx / dims[0]) % dims[1]) as i64, (idx / (dims[0] * dims[1])) as i64]
}

fn adjacent(a: [i64; 3], b: [i64; 3], conn: Connectivity) -> bool {
    let d: Vec<i64> = (0..3).map(|k| (a[k] - b[k]).abs()).collect();
    match conn {
        Connectivity::Faces6 => d.iter().sum::<i64>() == 1,
        Connectivity::Full26 => d.iter().all(|&v| v <= 1) && d.iter().any(|&v| v > 0),
    }
}

/// Partition by union-find over every pair of set voxels.
fn pairwise_partition(bits: &[bool], dims: [usize; 3], conn: Connectivity) -> Vec<usize> {
    let n = bits.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let on: Vec<usize> = (0..n).filter(|&i| bits[i]).collect();
    for (k, &i) in on.iter().enumerate() {
        for &j in &on[k + 1..] {
            if adjacent(coords(i, dims), coords(j, dims), conn) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

fn sparse_mask() -> impl Strategy<Value = ([usize; 3], Vec<bool>)> {
    (1usize..6, 1usize..6, 1usize..5).prop_flat_map(|(x, y, z)| {
        let n = x * y * z;
        (Just([x, y, z]), prop::collection::vec(prop::bool::weighted(0.35), n))
    })
}

fn label_volume(max_dim: usize) -> impl Strategy<Value = LabelVolume> {
    (1usize..max_dim, 1usize..max_dim, 1usize..4).prop_flat_map(|(x, y, z)| {
        prop::collection::vec(prop_oneof![3 => Just(0u8), 2 => Just(1u8), 2 => Just(2u8)], x * y * z)
            .prop_map(move |v| LabelVolume::new([x, y, z], [0.5, 0.75, 2.0], v, meta()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn components_match_pairwise_union_find((dims, bits) in sparse_mask()) {
        let mask = BinaryMask3D::new(dims, [1.0; 3], bits.clone());
        for conn in [Connectivity::Faces6, Connectivity::Full26] {
            let labels = connected_components(&mask, conn);
            let roots = pairwise_partition(&bits, dims, conn);
            for i in 0..bits.len() {
                prop_assert_eq!(labels.ids[i] == 0, !bits[i]);
                for j in 0..bits.len() {
                    if bits[i] && bits[j] {
                        prop_assert_eq!(labels.ids[i] == labels.ids[j], roots[i] == roots[j]);
                    }
                }
            }
            // ids appear in order of first voxel
            let mut seen = 0u32;
            for &id in &labels.ids {
                if id > seen {
                    prop_assert_eq!(id, seen + 1);
                    seen = id;
                }
            }
            prop_assert_eq!(seen, labels.count);
        }
    }

    #[test]
    fn largest_component_filter_properties(vol in label_volume(7)) {
        match largest_component_filter(&vol) {
            Err(_) => prop_assert_eq!(vol.count_selected(LabelSelector::WHOLE), 0),
            Ok(out) => {
                let mask = BinaryMask3D::from_volume(&out, LabelSelector::WHOLE);
                prop_assert_eq!(connected_components(&mask, Connectivity::Full26).count, 1);
                prop_assert_eq!(largest_component_filter(&out).unwrap(), out.clone());
                for (a, b) in vol.voxels().iter().zip(out.voxels()) {
                    prop_assert!(*b == 0 || a == b);
                }
            }
        }
    }

    #[test]
    fn boundary_matches_naive_scan(vol in label_volume(9)) {
        let [nx, ny, nz] = vol.dims();
        let [sx, sy, _] = vol.spacing_mm();
        for selector in [LabelSelector::WHOLE, LabelSelector::INTRA, LabelSelector::EXTRA] {
            for z in 0..nz {
                let inside = |i: i64, j: i64| {
                    i >= 0 && j >= 0 && i < nx as i64 && j < ny as i64 && selector.matches(vol.label(i as usize, j as usize, z))
                };
                let mut expected = Vec::new();
                for i in 0..nx as i64 {
                    for j in 0..ny as i64 {
                        if !inside(i, j) {
                            continue;
                        }
                        let outside_nb = [(-1, 0), (1, 0), (0, -1), (0, 1)].iter().any(|(di, dj)| !inside(i + di, j + dj));
                        if outside_nb {
                            expected.push(Point2::new((i as f64 + 0.5) * sx, (j as f64 + 0.5) * sy));
                        }
                    }
                }
                let got = slice_boundary(&vol, selector, z, BoundaryConvention::PixelCenters);
                prop_assert_eq!(got.len(), expected.len());
                for p in &expected {
                    prop_assert!(got.points.contains(p));
                }
                prop_assert_eq!(boundary_pixels(&vol, selector, z).len(), expected.len());
                for p in &got.points {
                    prop_assert!(p.x >= 0.0 && p.x <= nx as f64 * sx && p.y >= 0.0 && p.y <= ny as f64 * sy);
                }
                let corners = slice_boundary(&vol, selector, z, BoundaryConvention::PixelCorners);
                for w in corners.points.windows(2) {
                    prop_assert!(w[0].lex_cmp(&w[1]) == std::cmp::Ordering::Less);
                }
            }
        }
    }

    #[test]
    fn interface_matches_pair_scan(vol in label_volume(9)) {
        let [nx, ny, nz] = vol.dims();
        let [sx, sy, _] = vol.spacing_mm();
        for z in 0..nz {
            let mut expected: Vec<Point2> = Vec::new();
            for ai in 0..nx {
                for aj in 0..ny {
                    for bi in 0..nx {
                        for bj in 0..ny {
                            let manhattan = ai.abs_diff(bi) + aj.abs_diff(bj);
                            if manhattan == 1 && vol.label(ai, aj, z) == 1 && vol.label(bi, bj, z) == 2 {
                                let m = Point2::new(
                                    (ai + bi + 1) as f64 * sx / 2.0,
                                    (aj + bj + 1) as f64 * sy / 2.0,
                                );
                                if !expected.contains(&m) {
                                    expected.push(m);
                                }
                            }
                        }
                    }
                }
            }
            let got = interface_points(&vol, z);
            prop_assert_eq!(got.len(), expected.len());
            for p in &expected {
                prop_assert!(got.points.contains(p), "missing {:?}", p);
            }
            let slice = vol.slice(z);
            if !slice.contains(&1) || !slice.contains(&2) {
                prop_assert!(got.is_empty());
            }
        }
    }

    #[test]
    fn dice_is_the_rational_overlap(bits in prop::collection::vec((any::<bool>(), any::<bool>()), 1..200)) {
        let n = bits.len();
        let a = BinaryMask3D::new([n, 1, 1], [1.0; 3], bits.iter().map(|p| p.0).collect());
        let b = BinaryMask3D::new([n, 1, 1], [1.0; 3], bits.iter().map(|p| p.1).collect());
        let inter = bits.iter().filter(|p| p.0 && p.1).count();
        let total = bits.iter().filter(|p| p.0).count() + bits.iter().filter(|p| p.1).count();
        let expected = if total == 0 { 1.0 } else { (2 * inter) as f64 / total as f64 };
        prop_assert_eq!(dice(&a, &b).unwrap(), expected);
        prop_assert_eq!(dice(&a, &b).unwrap(), dice(&b, &a).unwrap());
        if a.count() > 0 {
            prop_assert_eq!(dice(&a, &a).unwrap(), 1.0);
        }
    }
}

#[test]
fn face_diagonal_regions_kept_together() {
    // intrameatal at (1,1,0); extrameatal touches it only along an edge at
    // (2,2,0) and only at a corner at (3,3,1)
    let dims = [5, 5, 2];
    let mut v = vec![0u8; 50];
    v[1 + 5] = 1;
    v[2 + 5 * 2] = 2;
    v[3 + 5 * 3 + 25] = 2;
    let vol = LabelVolume::new(dims, [1.0; 3], v.clone(), meta()).unwrap();
    let roots = pairwise_partition(&v.iter().map(|&x| x > 0).collect::<Vec<_>>(), dims, Connectivity::Full26);
    assert_eq!(roots[1 + 5], roots[3 + 5 * 3 + 25]);
    let out = largest_component_filter(&vol).unwrap();
    assert_eq!(out, vol);
}
