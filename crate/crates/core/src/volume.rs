//! Labelled tumour volumes.
//!
//! Voxels are stored x-fastest, then y, then z. The z axis is the axial
//! (inferior-superior) direction; every in-plane measurement happens on a
//! single z slice.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Label code for voxels outside the tumour.
pub const BACKGROUND: u8 = 0;
/// Label code for the tumour portion inside the internal auditory canal.
pub const INTRAMEATAL: u8 = 1;
/// Label code for the tumour portion in the cerebellopontine angle.
pub const EXTRAMEATAL: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperativeStatus {
    PreOp,
    PostOp,
}

impl OperativeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            OperativeStatus::PreOp => "pre_op",
            OperativeStatus::PostOp => "post_op",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pre_op" => Some(OperativeStatus::PreOp),
            "post_op" => Some(OperativeStatus::PostOp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modality {
    T1C,
    T2,
    Unknown,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::T1C => "T1C",
            Modality::T2 => "T2",
            Modality::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "T1C" => Some(Modality::T1C),
            "T2" => Some(Modality::T2),
            "unknown" => Some(Modality::Unknown),
            _ => None,
        }
    }
}

/// Identity and acquisition context of one imaging session.
///
/// The operative status is always supplied by the caller; nothing in this
/// crate derives it from voxel content.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SessionMeta {
    pub case_id: String,
    pub session_id: String,
    pub operative_status: OperativeStatus,
    pub modality: Modality,
}

impl SessionMeta {
    pub fn new(case_id: impl Into<String>, session_id: impl Into<String>, status: OperativeStatus) -> Self {
        SessionMeta {
            case_id: case_id.into(),
            session_id: session_id.into(),
            operative_status: status,
            modality: Modality::Unknown,
        }
    }
}

/// A subset of the two tumour labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabelSelector {
    pub intrameatal: bool,
    pub extrameatal: bool,
}

impl LabelSelector {
    pub const WHOLE: LabelSelector = LabelSelector { intrameatal: true, extrameatal: true };
    pub const INTRA: LabelSelector = LabelSelector { intrameatal: true, extrameatal: false };
    pub const EXTRA: LabelSelector = LabelSelector { intrameatal: false, extrameatal: true };

    #[inline]
    pub fn matches(self, label: u8) -> bool {
        match label {
            INTRAMEATAL => self.intrameatal,
            EXTRAMEATAL => self.extrameatal,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VolumeError {
    NonPositiveDims { dims: [usize; 3] },
    NonPositiveSpacing { spacing: [f64; 3] },
    LengthMismatch { expected: usize, actual: usize },
    InvalidLabel { index: usize, value: u8 },
}

impl fmt::Display for VolumeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VolumeError::NonPositiveDims { dims } => {
                write!(f, "dims must be strictly positive, got {:?}", dims)
            }
            VolumeError::NonPositiveSpacing { spacing } => {
                write!(f, "spacing must be finite and strictly positive, got {:?}", spacing)
            }
            VolumeError::LengthMismatch { expected, actual } => {
                write!(f, "voxel array holds {} values, dims require {}", actual, expected)
            }
            VolumeError::InvalidLabel { index, value } => {
                write!(f, "voxel {} has label {}, expected 0, 1 or 2", index, value)
            }
        }
    }
}

impl core::error::Error for VolumeError {}

/// A validated 3D label grid with physical voxel spacing in millimetres.
///
/// Immutable once built; the only way in is through [`LabelVolume::new`],
/// which enforces every invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelVolume {
    dims: [usize; 3],
    spacing_mm: [f64; 3],
    voxels: Vec<u8>,
    session: SessionMeta,
}

impl LabelVolume {
    pub fn new(
        dims: [usize; 3],
        spacing_mm: [f64; 3],
        voxels: Vec<u8>,
        session: SessionMeta,
    ) -> Result<Self, VolumeError> {
        if dims.contains(&0) {
            return Err(VolumeError::NonPositiveDims { dims });
        }
        if spacing_mm.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(VolumeError::NonPositiveSpacing { spacing: spacing_mm });
        }
        let expected = dims[0]
            .checked_mul(dims[1])
            .and_then(|v| v.checked_mul(dims[2]))
            .ok_or(VolumeError::NonPositiveDims { dims })?;
        if voxels.len() != expected {
            return Err(VolumeError::LengthMismatch { expected, actual: voxels.len() });
        }
        if let Some((index, &value)) = voxels.iter().enumerate().find(|(_, v)| **v > EXTRAMEATAL) {
            return Err(VolumeError::InvalidLabel { index, value });
        }
        Ok(LabelVolume { dims, spacing_mm, voxels, session })
    }

    /// An all-background volume.
    pub fn empty(dims: [usize; 3], spacing_mm: [f64; 3], session: SessionMeta) -> Result<Self, VolumeError> {
        let n = dims.iter().product();
        Self::new(dims, spacing_mm, alloc::vec![BACKGROUND; n], session)
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn spacing_mm(&self) -> [f64; 3] {
        self.spacing_mm
    }

    #[inline]
    pub fn voxels(&self) -> &[u8] {
        &self.voxels
    }

    #[inline]
    pub fn session(&self) -> &SessionMeta {
        &self.session
    }

    pub fn with_session(mut self, session: SessionMeta) -> Self {
        self.session = session;
        self
    }

    pub fn with_operative_status(mut self, status: OperativeStatus) -> Self {
        self.session.operative_status = status;
        self
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn label(&self, x: usize, y: usize, z: usize) -> u8 {
        self.voxels[self.index(x, y, z)]
    }

    /// Labels of slice `z`, x-fastest.
    pub fn slice(&self, z: usize) -> &[u8] {
        let plane = self.dims[0] * self.dims[1];
        &self.voxels[z * plane..(z + 1) * plane]
    }

    /// Rebuilds the volume with a new voxel array, re-validating it.
    pub fn map_voxels(&self, voxels: Vec<u8>) -> Result<Self, VolumeError> {
        Self::new(self.dims, self.spacing_mm, voxels, self.session.clone())
    }

    pub fn count(&self, label: u8) -> usize {
        self.voxels.iter().filter(|&&v| v == label).count()
    }

    pub fn count_selected(&self, selector: LabelSelector) -> usize {
        self.voxels.iter().filter(|&&v| selector.matches(v)).count()
    }

    /// Physical volume of one voxel in mm³.
    #[inline]
    pub fn voxel_volume_mm3(&self) -> f64 {
        self.spacing_mm[0] * self.spacing_mm[1] * self.spacing_mm[2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn meta() -> SessionMeta {
        SessionMeta::new("c1", "s1", OperativeStatus::PreOp)
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            LabelVolume::new([0, 1, 1], [1.0; 3], vec![], meta()),
            Err(VolumeError::NonPositiveDims { .. })
        ));
        assert!(matches!(
            LabelVolume::new([1, 1, 1], [1.0, 0.0, 1.0], vec![0], meta()),
            Err(VolumeError::NonPositiveSpacing { .. })
        ));
        assert!(matches!(
            LabelVolume::new([2, 1, 1], [1.0; 3], vec![0], meta()),
            Err(VolumeError::LengthMismatch { expected: 2, actual: 1 })
        ));
        assert_eq!(
            LabelVolume::new([2, 1, 1], [1.0; 3], vec![0, 3], meta()),
            Err(VolumeError::InvalidLabel { index: 1, value: 3 })
        );
    }

    #[test]
    fn x_fastest_indexing() {
        let v = LabelVolume::new([2, 2, 1], [1.0; 3], vec![0, 1, 2, 0], meta()).unwrap();
        assert_eq!(v.label(1, 0, 0), 1);
        assert_eq!(v.label(0, 1, 0), 2);
        assert_eq!(v.count_selected(LabelSelector::WHOLE), 2);
    }
}
