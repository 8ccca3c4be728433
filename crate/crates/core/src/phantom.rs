//! Synthetic label volumes with known measurements.

use alloc::vec;

use crate::volume::{LabelVolume, OperativeStatus, SessionMeta, BACKGROUND, EXTRAMEATAL, INTRAMEATAL};

fn session(id: &str, status: OperativeStatus) -> SessionMeta {
    SessionMeta::new("phantom", id, status)
}

/// A 10x2-pixel intrameatal bar meeting a 6x6-pixel extrameatal square
/// along a vertical interface, one slice, 1 mm spacing.
///
/// Interface direction is `(0, 1)`; with pixel centres the intrameatal
/// parallel extent is 1 mm and both extrameatal extents are 5 mm.
pub fn bar_and_square(status: OperativeStatus) -> LabelVolume {
    let (nx, ny) = (18, 10);
    let mut voxels = vec![BACKGROUND; nx * ny];
    for y in 4..6 {
        for x in 1..11 {
            voxels[x + nx * y] = INTRAMEATAL;
        }
    }
    for y in 2..8 {
        for x in 11..17 {
            voxels[x + nx * y] = EXTRAMEATAL;
        }
    }
    LabelVolume::new([nx, ny, 1], [1.0, 1.0, 1.0], voxels, session("bar_and_square", status)).expect("valid phantom")
}

/// In-plane quarter turn: voxel `(x, y)` moves to `(ny - 1 - y, x)` on
/// every slice. In-plane spacings swap.
pub fn rotate_quarter(volume: &LabelVolume) -> LabelVolume {
    let [nx, ny, nz] = volume.dims();
    let [sx, sy, sz] = volume.spacing_mm();
    let (mx, my) = (ny, nx);
    let mut voxels = vec![BACKGROUND; nx * ny * nz];
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                voxels[(ny - 1 - y) + mx * (x + my * z)] = volume.label(x, y, z);
            }
        }
    }
    LabelVolume::new([mx, my, nz], [sy, sx, sz], voxels, volume.session().clone()).expect("rotation keeps validity")
}

/// Digitised axis-aligned ellipse with semi-axes `a_mm` (x) and `b_mm` (y)
/// on every slice, centred on a pixel centre. A pixel is inside when its
/// centre satisfies the ellipse inequality.
pub fn ellipse(a_mm: f64, b_mm: f64, spacing_xy: f64, thickness_mm: f64, slices: usize, label: u8) -> LabelVolume {
    let half_x = libm::ceil(a_mm / spacing_xy) as usize + 2;
    let half_y = libm::ceil(b_mm / spacing_xy) as usize + 2;
    let (nx, ny) = (2 * half_x + 1, 2 * half_y + 1);
    let (cx, cy) = ((half_x as f64 + 0.5) * spacing_xy, (half_y as f64 + 0.5) * spacing_xy);
    let mut voxels = vec![BACKGROUND; nx * ny * slices];
    for z in 0..slices {
        for y in 0..ny {
            for x in 0..nx {
                let px = ((x as f64 + 0.5) * spacing_xy - cx) / a_mm;
                let py = ((y as f64 + 0.5) * spacing_xy - cy) / b_mm;
                if px * px + py * py <= 1.0 {
                    voxels[x + nx * (y + ny * z)] = label;
                }
            }
        }
    }
    LabelVolume::new(
        [nx, ny, slices],
        [spacing_xy, spacing_xy, thickness_mm],
        voxels,
        session("ellipse", OperativeStatus::PreOp),
    )
    .expect("valid phantom")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_preserves_counts_and_cycles() {
        let v = bar_and_square(OperativeStatus::PreOp);
        let r = rotate_quarter(&v);
        assert_eq!(r.dims(), [10, 18, 1]);
        assert_eq!(r.count(INTRAMEATAL), 20);
        assert_eq!(r.count(EXTRAMEATAL), 36);
        let full = rotate_quarter(&rotate_quarter(&rotate_quarter(&r)));
        assert_eq!(full, v);
    }

    #[test]
    fn ellipse_is_symmetric() {
        let e = ellipse(10.0, 5.0, 0.5, 1.0, 1, EXTRAMEATAL);
        let [nx, ny, _] = e.dims();
        for y in 0..ny {
            for x in 0..nx {
                assert_eq!(e.label(x, y, 0), e.label(nx - 1 - x, y, 0));
                assert_eq!(e.label(x, y, 0), e.label(x, ny - 1 - y, 0));
            }
        }
    }
}
