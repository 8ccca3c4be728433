//! Voxel-level operations on label volumes.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::geometry::Point2;
use crate::volume::{LabelSelector, LabelVolume, BACKGROUND, EXTRAMEATAL, INTRAMEATAL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphologyError {
    EmptyTumour,
    DimMismatch { a: [usize; 3], b: [usize; 3] },
}

impl fmt::Display for MorphologyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorphologyError::EmptyTumour => f.write_str("volume contains no tumour voxels"),
            MorphologyError::DimMismatch { a, b } => write!(f, "mask dims differ: {:?} vs {:?}", a, b),
        }
    }
}

impl core::error::Error for MorphologyError {}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask3D {
    dims: [usize; 3],
    spacing_mm: [f64; 3],
    bits: Vec<bool>,
}

impl BinaryMask3D {
    pub fn new(dims: [usize; 3], spacing_mm: [f64; 3], bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), dims.iter().product::<usize>(), "mask length must match dims");
        BinaryMask3D { dims, spacing_mm, bits }
    }

    pub fn from_volume(volume: &LabelVolume, selector: LabelSelector) -> Self {
        let bits = volume.voxels().iter().map(|&v| selector.matches(v)).collect();
        BinaryMask3D { dims: volume.dims(), spacing_mm: volume.spacing_mm(), bits }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing_mm(&self) -> [f64; 3] {
        self.spacing_mm
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Faces6,
    Full26,
}

/// Component id per voxel (0 = background) and the number of components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabels {
    pub ids: Vec<u32>,
    pub count: u32,
}

impl ComponentLabels {
    /// Voxel count per component, indexed by `id - 1`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.count as usize];
        for &id in &self.ids {
            if id > 0 {
                sizes[id as usize - 1] += 1;
            }
        }
        sizes
    }
}

fn neighbour_offsets(connectivity: Connectivity) -> Vec<[isize; 3]> {
    let mut out = Vec::with_capacity(26);
    for dz in -1isize..=1 {
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                let manhattan = dx.abs() + dy.abs() + dz.abs();
                let keep = match connectivity {
                    Connectivity::Faces6 => manhattan == 1,
                    Connectivity::Full26 => manhattan > 0,
                };
                if keep {
                    out.push([dx, dy, dz]);
                }
            }
        }
    }
    out
}

/// Labels connected components. Ids run 1..=K in the x-fastest scan order of
/// each component's first voxel.
pub fn connected_components(mask: &BinaryMask3D, connectivity: Connectivity) -> ComponentLabels {
    let [nx, ny, nz] = mask.dims;
    let offsets = neighbour_offsets(connectivity);
    let mut ids = vec![0u32; mask.bits.len()];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..mask.bits.len() {
        if !mask.bits[start] || ids[start] != 0 {
            continue;
        }
        next += 1;
        ids[start] = next;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let x = (idx % nx) as isize;
            let y = ((idx / nx) % ny) as isize;
            let z = (idx / (nx * ny)) as isize;
            for off in &offsets {
                let (xx, yy, zz) = (x + off[0], y + off[1], z + off[2]);
                if xx < 0 || yy < 0 || zz < 0 || xx >= nx as isize || yy >= ny as isize || zz >= nz as isize {
                    continue;
                }
                let n = xx as usize + nx * (yy as usize + ny * zz as usize);
                if mask.bits[n] && ids[n] == 0 {
                    ids[n] = next;
                    stack.push(n);
                }
            }
        }
    }
    ComponentLabels { ids, count: next }
}

/// Keeps only the largest 26-connected tumour component (labels 1 and 2
/// together), zeroing everything else. Ties go to the smaller component id.
pub fn largest_component_filter(volume: &LabelVolume) -> Result<LabelVolume, MorphologyError> {
    let mask = BinaryMask3D::from_volume(volume, LabelSelector::WHOLE);
    let comps = connected_components(&mask, Connectivity::Full26);
    if comps.count == 0 {
        return Err(MorphologyError::EmptyTumour);
    }
    let sizes = comps.sizes();
    let mut keep = 1u32;
    for (i, &s) in sizes.iter().enumerate() {
        if s > sizes[keep as usize - 1] {
            keep = i as u32 + 1;
        }
    }
    let voxels =
        volume.voxels().iter().zip(&comps.ids).map(|(&v, &id)| if id == keep { v } else { BACKGROUND }).collect();
    Ok(volume.map_voxels(voxels).expect("filtered labels stay valid"))
}

/// Where boundary points sit relative to their pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BoundaryConvention {
    #[default]
    PixelCenters,
    PixelCorners,
}

impl BoundaryConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryConvention::PixelCenters => "pixel_centers",
            BoundaryConvention::PixelCorners => "pixel_corners",
        }
    }
}

/// Distinct in-plane points (mm) belonging to one axial slice, sorted
/// lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicePointSet {
    pub slice_index: usize,
    pub points: Vec<Point2>,
}

impl SlicePointSet {
    fn from_unsorted(slice_index: usize, mut points: Vec<Point2>) -> Self {
        points.sort_by(Point2::lex_cmp);
        points.dedup_by(|a, b| a.lex_cmp(b) == Ordering::Equal);
        SlicePointSet { slice_index, points }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

#[inline]
fn centre(i: usize, j: usize, sx: f64, sy: f64) -> Point2 {
    Point2::new((i as f64 + 0.5) * sx, (j as f64 + 0.5) * sy)
}

/// Inner boundary of the selected pixels on slice `z`: selected pixels with
/// a 4-neighbour outside the selection or outside the image.
pub fn boundary_pixels(volume: &LabelVolume, selector: LabelSelector, z: usize) -> Vec<(usize, usize)> {
    let [nx, ny, _] = volume.dims();
    let slice = volume.slice(z);
    let sel = |i: isize, j: isize| -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < nx
            && (j as usize) < ny
            && selector.matches(slice[i as usize + nx * j as usize])
    };
    let mut out = Vec::new();
    for j in 0..ny as isize {
        for i in 0..nx as isize {
            if sel(i, j) && !(sel(i - 1, j) && sel(i + 1, j) && sel(i, j - 1) && sel(i, j + 1)) {
                out.push((i as usize, j as usize));
            }
        }
    }
    out
}

pub fn slice_boundary(
    volume: &LabelVolume,
    selector: LabelSelector,
    z: usize,
    convention: BoundaryConvention,
) -> SlicePointSet {
    let [sx, sy, _] = volume.spacing_mm();
    let pixels = boundary_pixels(volume, selector, z);
    let points = match convention {
        BoundaryConvention::PixelCenters => pixels.iter().map(|&(i, j)| centre(i, j, sx, sy)).collect(),
        BoundaryConvention::PixelCorners => pixels
            .iter()
            .flat_map(|&(i, j)| {
                let (x0, x1) = (i as f64 * sx, (i + 1) as f64 * sx);
                let (y0, y1) = (j as f64 * sy, (j + 1) as f64 * sy);
                [Point2::new(x0, y0), Point2::new(x1, y0), Point2::new(x1, y1), Point2::new(x0, y1)]
            })
            .collect(),
    };
    SlicePointSet::from_unsorted(z, points)
}

/// Midpoints between 4-adjacent intrameatal/extrameatal pixel pairs on
/// slice `z`; a sampling of the boundary separating the two regions.
pub fn interface_points(volume: &LabelVolume, z: usize) -> SlicePointSet {
    let [nx, ny, _] = volume.dims();
    let [sx, sy, _] = volume.spacing_mm();
    let slice = volume.slice(z);
    let at = |i: usize, j: usize| slice[i + nx * j];
    let differs = |a: u8, b: u8| (a == INTRAMEATAL && b == EXTRAMEATAL) || (a == EXTRAMEATAL && b == INTRAMEATAL);
    let mut points = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if i + 1 < nx && differs(at(i, j), at(i + 1, j)) {
                points.push(Point2::new((i + 1) as f64 * sx, (j as f64 + 0.5) * sy));
            }
            if j + 1 < ny && differs(at(i, j), at(i, j + 1)) {
                points.push(Point2::new((i as f64 + 0.5) * sx, (j + 1) as f64 * sy));
            }
        }
    }
    SlicePointSet::from_unsorted(z, points)
}

/// Dice overlap `2|A∩B| / (|A|+|B|)`, 1.0 when both masks are empty.
pub fn dice(a: &BinaryMask3D, b: &BinaryMask3D) -> Result<f64, MorphologyError> {
    if a.dims != b.dims {
        return Err(MorphologyError::DimMismatch { a: a.dims, b: b.dims });
    }
    let (mut inter, mut na, mut nb) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.bits.iter().zip(&b.bits) {
        na += x as usize;
        nb += y as usize;
        inter += (x && y) as usize;
    }
    if na + nb == 0 {
        return Ok(1.0);
    }
    Ok((2 * inter) as f64 / (na + nb) as f64)
}
