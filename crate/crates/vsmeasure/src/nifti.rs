//! NIfTI-1 label-map import.
//!
//! Only single-file `.nii` / `.nii.gz` volumes are read. Voxel axes are
//! permuted (never resampled) so the axis closest to the scanner
//! inferior-superior direction becomes z; volumes tilted more than 5
//! degrees off the scanner axes are rejected.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use vsmeasure_core::volume::{LabelVolume, SessionMeta, EXTRAMEATAL};

use crate::error::{Error, Result};

const HEADER_SIZE: usize = 348;
const MAX_TILT_DEG: f64 = 5.0;
const INTEGER_TOL: f64 = 1e-6;

/// Stored integer value -> label code in `{0, 1, 2}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap(BTreeMap<i64, u8>);

impl LabelMap {
    pub fn identity() -> Self {
        LabelMap((0..=2).map(|v| (v, v as u8)).collect())
    }

    pub fn new(map: BTreeMap<i64, u8>) -> std::result::Result<Self, String> {
        if let Some((k, v)) = map.iter().find(|(_, &v)| v > EXTRAMEATAL) {
            return Err(format!("value {} maps to {}, labels must be 0, 1 or 2", k, v));
        }
        Ok(LabelMap(map))
    }

    /// Parses `stored=label` pairs separated by commas, e.g. `0=0,1=2,2=1`.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut map = BTreeMap::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| format!("expected stored=label, got {:?}", item))?;
            let k: i64 = k.trim().parse().map_err(|_| format!("bad stored value {:?}", k))?;
            let v: u8 = v.trim().parse().map_err(|_| format!("bad label {:?}", v))?;
            map.insert(k, v);
        }
        Self::new(map)
    }

    pub fn get(&self, stored: i64) -> Option<u8> {
        self.0.get(&stored).copied()
    }
}

impl Default for LabelMap {
    fn default() -> Self {
        Self::identity()
    }
}

fn fail(path: &Path, reason: impl Into<String>) -> Error {
    Error::Nifti { path: path.to_path_buf(), reason: reason.into() }
}

struct Bytes<'a> {
    data: &'a [u8],
    big_endian: bool,
}

impl Bytes<'_> {
    fn take<const N: usize>(&self, at: usize) -> [u8; N] {
        let mut b = [0u8; N];
        b.copy_from_slice(&self.data[at..at + N]);
        if self.big_endian {
            b.reverse();
        }
        b
    }
    fn i16(&self, at: usize) -> i16 {
        i16::from_le_bytes(self.take(at))
    }
    fn i32(&self, at: usize) -> i32 {
        i32::from_le_bytes(self.take(at))
    }
    fn f32(&self, at: usize) -> f64 {
        f32::from_le_bytes(self.take(at)) as f64
    }
    /// f32 widened through its shortest decimal form, so 0.8f32 reads as 0.8.
    fn f32_decimal(&self, at: usize) -> f64 {
        let v = f32::from_le_bytes(self.take(at));
        v.to_string().parse().unwrap_or(v as f64)
    }
}

#[derive(Debug, Clone, Copy)]
enum DataType {
    U8,
    I8,
    I16,
    U16,
    I32,
    U32,
    I64,
    U64,
    F32,
    F64,
}

impl DataType {
    fn from_code(code: i16) -> Option<Self> {
        Some(match code {
            2 => DataType::U8,
            4 => DataType::I16,
            8 => DataType::I32,
            16 => DataType::F32,
            64 => DataType::F64,
            256 => DataType::I8,
            512 => DataType::U16,
            768 => DataType::U32,
            1024 => DataType::I64,
            1280 => DataType::U64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            DataType::U8 | DataType::I8 => 1,
            DataType::I16 | DataType::U16 => 2,
            DataType::I32 | DataType::U32 | DataType::F32 => 4,
            DataType::I64 | DataType::U64 | DataType::F64 => 8,
        }
    }

    fn read(self, b: &Bytes<'_>, at: usize) -> f64 {
        match self {
            DataType::U8 => b.data[at] as f64,
            DataType::I8 => b.data[at] as i8 as f64,
            DataType::I16 => b.i16(at) as f64,
            DataType::U16 => u16::from_le_bytes(b.take(at)) as f64,
            DataType::I32 => b.i32(at) as f64,
            DataType::U32 => u32::from_le_bytes(b.take(at)) as f64,
            DataType::I64 => i64::from_le_bytes(b.take(at)) as f64,
            DataType::U64 => u64::from_le_bytes(b.take(at)) as f64,
            DataType::F32 => f32::from_le_bytes(b.take(at)) as f64,
            DataType::F64 => f64::from_le_bytes(b.take(at)),
        }
    }
}

/// Columns of the voxel-to-world matrix (one per voxel axis, without
/// translation), from sform, else qform, else pixdim.
fn axis_columns(b: &Bytes<'_>, pixdim: [f64; 4]) -> [[f64; 3]; 3] {
    let sform_code = b.i16(254);
    let qform_code = b.i16(252);
    if sform_code > 0 {
        let rows: [[f64; 4]; 3] = [280, 296, 312].map(|o| [0, 4, 8, 12].map(|k| b.f32(o + k)));
        return [0, 1, 2].map(|j| [rows[0][j], rows[1][j], rows[2][j]]);
    }
    if qform_code > 0 {
        let (qb, qc, qd) = (b.f32(256), b.f32(260), b.f32(264));
        let qa = (1.0 - (qb * qb + qc * qc + qd * qd)).max(0.0).sqrt();
        let r = [
            [qa * qa + qb * qb - qc * qc - qd * qd, 2.0 * (qb * qc - qa * qd), 2.0 * (qb * qd + qa * qc)],
            [2.0 * (qb * qc + qa * qd), qa * qa + qc * qc - qb * qb - qd * qd, 2.0 * (qc * qd - qa * qb)],
            [2.0 * (qb * qd - qa * qc), 2.0 * (qc * qd + qa * qb), qa * qa + qd * qd - qb * qb - qc * qc],
        ];
        let qfac = if pixdim[0] < 0.0 { -1.0 } else { 1.0 };
        let scale = [pixdim[1], pixdim[2], qfac * pixdim[3]];
        return [0, 1, 2].map(|j| [r[0][j] * scale[j], r[1][j] * scale[j], r[2][j] * scale[j]]);
    }
    let mut cols = [[0.0; 3]; 3];
    for (j, col) in cols.iter_mut().enumerate() {
        col[j] = pixdim[j + 1];
    }
    cols
}

/// For each voxel axis, the world axis it runs along. Errors when an axis
/// is tilted beyond tolerance or two axes share a world axis.
fn world_axes(path: &Path, cols: &[[f64; 3]; 3]) -> Result<[usize; 3]> {
    let min_cos = MAX_TILT_DEG.to_radians().cos();
    let mut out = [0usize; 3];
    for (j, c) in cols.iter().enumerate() {
        let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        if norm.is_nan() || norm <= 0.0 {
            return Err(fail(path, format!("voxel axis {} has a degenerate direction", j)));
        }
        let (k, best) =
            (0..3).map(|k| (k, c[k].abs() / norm)).fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best < min_cos {
            let tilt = best.clamp(-1.0, 1.0).acos().to_degrees();
            return Err(fail(
                path,
                format!("oblique acquisition: axis {} is {:.2} degrees off the scanner axes", j, tilt),
            ));
        }
        out[j] = k;
    }
    if out[0] == out[1] || out[1] == out[2] || out[0] == out[2] {
        return Err(fail(path, "voxel axes do not map to distinct scanner axes"));
    }
    Ok(out)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let name = path.file_name().map(|n| n.to_string_lossy().to_lowercase()).unwrap_or_default();
    let gz = name.ends_with(".nii.gz");
    if !gz && !name.ends_with(".nii") {
        return Err(fail(path, "only .nii and .nii.gz files are accepted"));
    }
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    if !gz {
        return Ok(raw);
    }
    let mut out = Vec::new();
    flate2::read::MultiGzDecoder::new(&raw[..])
        .read_to_end(&mut out)
        .map_err(|e| fail(path, format!("gzip: {}", e)))?;
    Ok(out)
}

/// Reads a NIfTI-1 label map and remaps its values into label codes.
pub fn import_nifti(path: &Path, label_map: &LabelMap, session: SessionMeta) -> Result<LabelVolume> {
    let data = read_bytes(path)?;
    if data.len() < HEADER_SIZE {
        return Err(fail(path, "file is shorter than a NIfTI-1 header"));
    }
    let big_endian = match (
        i32::from_le_bytes(data[0..4].try_into().unwrap()),
        i32::from_be_bytes(data[0..4].try_into().unwrap()),
    ) {
        (348, _) => false,
        (_, 348) => true,
        _ => return Err(fail(path, "sizeof_hdr is not 348")),
    };
    if &data[344..348] != b"n+1\0" {
        return Err(fail(path, "missing single-file NIfTI-1 magic"));
    }
    let b = Bytes { data: &data, big_endian };

    let dim: Vec<i64> = (0..8).map(|k| b.i16(40 + 2 * k) as i64).collect();
    let ndim = dim[0];
    if !(1..=7).contains(&ndim) {
        return Err(fail(path, format!("dim[0] = {} is out of range", ndim)));
    }
    let extent = |k: usize| if (k as i64) <= ndim { dim[k] } else { 1 };
    let shape = [extent(1), extent(2), extent(3)];
    if shape.iter().any(|&d| d <= 0) {
        return Err(fail(path, format!("non-positive dims {:?}", shape)));
    }
    if (4..=7).any(|k| extent(k) != 1) {
        return Err(fail(path, "only single 3D volumes are supported"));
    }
    let pixdim: Vec<f64> = (0..8).map(|k| b.f32(76 + 4 * k)).collect();
    let spacing_in = [1, 2, 3].map(|k| b.f32_decimal(76 + 4 * k).abs());
    if spacing_in.iter().any(|s| !s.is_finite() || *s <= 0.0) {
        return Err(fail(path, format!("non-positive pixdim {:?}", spacing_in)));
    }

    let dtype =
        DataType::from_code(b.i16(70)).ok_or_else(|| fail(path, format!("unsupported datatype {}", b.i16(70))))?;
    let offset = b.f32(108);
    if offset.is_nan() || offset < HEADER_SIZE as f64 {
        return Err(fail(path, format!("vox_offset {} lies inside the header", offset)));
    }
    let offset = offset as usize;
    let shape = shape.map(|d| d as usize);
    let count = shape[0] * shape[1] * shape[2];
    if data.len() < offset + count * dtype.size() {
        return Err(fail(path, "voxel data is truncated"));
    }
    let (slope, inter) = (b.f32(112), b.f32(116));
    let scaled = slope != 0.0 && slope.is_finite() && !(slope == 1.0 && inter == 0.0);

    let cols = axis_columns(&b, [pixdim[0], pixdim[1], pixdim[2], pixdim[3]]);
    let world = world_axes(path, &cols)?;
    // voxel axis running along scanner z goes last; the other two keep order
    let z_axis = world.iter().position(|&w| w == 2).expect("axes are a permutation");
    let mut order: Vec<usize> = (0..3).filter(|&k| k != z_axis).collect();
    order.push(z_axis);
    let dims = [shape[order[0]], shape[order[1]], shape[order[2]]];
    let spacing = [spacing_in[order[0]], spacing_in[order[1]], spacing_in[order[2]]];

    let mut voxels = vec![0u8; count];
    let strides = [1, shape[0], shape[0] * shape[1]];
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let mut src = [0usize; 3];
                src[order[0]] = x;
                src[order[1]] = y;
                src[order[2]] = z;
                let idx = src[0] * strides[0] + src[1] * strides[1] + src[2] * strides[2];
                let mut v = dtype.read(&b, offset + idx * dtype.size());
                if scaled {
                    v = v * slope + inter;
                }
                let r = v.round();
                if !v.is_finite() || (v - r).abs() > INTEGER_TOL {
                    return Err(fail(path, format!("voxel value {} is not an integer", v)));
                }
                let stored = r as i64;
                let label = label_map
                    .get(stored)
                    .ok_or_else(|| fail(path, format!("value {} is not in the label map", stored)))?;
                voxels[x + dims[0] * (y + dims[1] * z)] = label;
            }
        }
    }
    LabelVolume::new(dims, spacing, voxels, session)
        .map_err(|source| Error::Volume { path: PathBuf::from(path), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_map_parsing() {
        let m = LabelMap::parse("0=0, 10=1,20=2").unwrap();
        assert_eq!(m.get(10), Some(1));
        assert_eq!(m.get(3), None);
        assert!(LabelMap::parse("1=3").is_err());
        assert!(LabelMap::parse("1:2").is_err());
        assert_eq!(LabelMap::default(), LabelMap::parse("0=0,1=1,2=2").unwrap());
    }

    #[test]
    fn tilt_detection() {
        let p = Path::new("x.nii");
        let t = 4.0f64.to_radians();
        let ok = [[t.cos(), t.sin(), 0.0], [-t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(world_axes(p, &ok).unwrap(), [0, 1, 2]);
        let t = 6.0f64.to_radians();
        let bad = [[1.0, 0.0, 0.0], [0.0, t.cos(), t.sin()], [0.0, -t.sin(), t.cos()]];
        assert!(world_axes(p, &bad).is_err());
        let coronal = [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]];
        assert_eq!(world_axes(p, &coronal).unwrap(), [0, 2, 1]);
    }
}
