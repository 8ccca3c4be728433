//! Canonical on-disk label volumes: a `<name>.vsm.json` header next to a
//! raw file holding one `u8` label per voxel, x fastest.
//!
//! Files written by [`save_canonical`] reload to the same volume and save
//! back to identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vsmeasure_core::volume::{LabelVolume, Modality, OperativeStatus, SessionMeta};

use crate::atomic::write_atomic;
use crate::error::{Error, Result};

const HEADER_SUFFIX: &str = ".vsm.json";

pub(crate) fn label_names() -> BTreeMap<String, String> {
    [("0", "background"), ("1", "intrameatal"), ("2", "extrameatal")]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct SessionJson {
    pub case_id: String,
    pub session_id: String,
    pub operative_status: String,
    pub modality: String,
}

impl SessionJson {
    pub fn from_meta(meta: &SessionMeta) -> Self {
        SessionJson {
            case_id: meta.case_id.clone(),
            session_id: meta.session_id.clone(),
            operative_status: meta.operative_status.as_str().to_string(),
            modality: meta.modality.as_str().to_string(),
        }
    }

    fn into_meta(self) -> std::result::Result<SessionMeta, String> {
        let status = OperativeStatus::parse(&self.operative_status)
            .ok_or_else(|| format!("operative_status must be pre_op or post_op, got {:?}", self.operative_status))?;
        let modality = Modality::parse(&self.modality)
            .ok_or_else(|| format!("modality must be T1C, T2 or unknown, got {:?}", self.modality))?;
        Ok(SessionMeta { case_id: self.case_id, session_id: self.session_id, operative_status: status, modality })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct HeaderJson {
    dims: [i64; 3],
    spacing_mm: [f64; 3],
    raw_file: String,
    labels: BTreeMap<String, String>,
    session: SessionJson,
}

/// Raw file name paired with a header path: `case.vsm.json` -> `case.raw`.
pub fn raw_name_for(header: &Path) -> String {
    let name = header.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = name.strip_suffix(HEADER_SUFFIX).or_else(|| name.strip_suffix(".json")).unwrap_or(&name);
    format!("{}.raw", stem)
}

fn header_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Header { path: path.to_path_buf(), reason: reason.into() }
}

pub fn load_canonical(path: &Path) -> Result<LabelVolume> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: HeaderJson = serde_json::from_str(&text).map_err(|e| header_error(path, e.to_string()))?;
    if header.dims.iter().any(|&d| d <= 0) {
        return Err(header_error(path, format!("dims must be positive, got {:?}", header.dims)));
    }
    if header.spacing_mm.iter().any(|&s| !s.is_finite() || s <= 0.0) {
        return Err(header_error(path, format!("spacing_mm must be positive, got {:?}", header.spacing_mm)));
    }
    if header.labels != label_names() {
        return Err(header_error(path, "labels must map 0/1/2 to background/intrameatal/extrameatal"));
    }
    let session = header.session.into_meta().map_err(|r| header_error(path, r))?;
    let dims = header.dims.map(|d| d as usize);

    let raw_path: PathBuf = path.parent().unwrap_or(Path::new("")).join(&header.raw_file);
    let voxels = fs::read(&raw_path).map_err(|e| Error::io(&raw_path, e))?;
    LabelVolume::new(dims, header.spacing_mm, voxels, session)
        .map_err(|source| Error::Volume { path: raw_path, source })
}

/// Header JSON text and raw bytes for a volume saved under `path`.
pub fn canonical_bytes(volume: &LabelVolume, path: &Path) -> (String, Vec<u8>) {
    let header = HeaderJson {
        dims: volume.dims().map(|d| d as i64),
        spacing_mm: volume.spacing_mm(),
        raw_file: raw_name_for(path),
        labels: label_names(),
        session: SessionJson::from_meta(volume.session()),
    };
    let mut text = serde_json::to_string_pretty(&header).expect("header serialises");
    text.push('\n');
    (text, volume.voxels().to_vec())
}

pub fn save_canonical(volume: &LabelVolume, path: &Path) -> Result<()> {
    let (text, raw) = canonical_bytes(volume, path);
    let raw_path = path.parent().unwrap_or(Path::new("")).join(raw_name_for(path));
    write_atomic(&raw_path, &raw)?;
    write_atomic(path, text.as_bytes())
}
