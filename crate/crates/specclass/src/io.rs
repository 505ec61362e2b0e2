//! On-disk formats.
//!
//! A dataset `name` is three files side by side:
//!
//! * `name.hdr.json` — `{width, height, bands, band_names, pixel_size_m}`
//! * `name.bsq` — little-endian `f32` samples, band-sequential, row-major
//! * `name.classes.json` — optional class table for label masks, `id → {name, rgb}`

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use specclass_core::raster::{default_band_names, DEFAULT_PIXEL_SIZE};
use specclass_core::{ClassTable, LabelMask, Raster};

use crate::error::{CliError, Result};

const HEADER_SUFFIX: &str = ".hdr.json";
const PAYLOAD_SUFFIX: &str = ".bsq";
const CLASSES_SUFFIX: &str = ".classes.json";

/// Largest integer label that survives the `f32` payload exactly.
const MAX_STORED_LABEL: u32 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    #[serde(default)]
    pub band_names: Option<Vec<String>>,
    #[serde(default = "default_pixel_size")]
    pub pixel_size_m: f64,
}

fn default_pixel_size() -> f64 {
    DEFAULT_PIXEL_SIZE
}

impl Header {
    pub fn of(raster: &Raster) -> Self {
        Self {
            width: raster.width(),
            height: raster.height(),
            bands: raster.bands(),
            band_names: Some(raster.band_names().to_vec()),
            pixel_size_m: raster.pixel_size(),
        }
    }

    pub fn payload_len(&self) -> Option<u64> {
        (self.width as u64)
            .checked_mul(self.height as u64)?
            .checked_mul(self.bands as u64)?
            .checked_mul(4)
    }
}

/// Strips a known dataset suffix, so `scene`, `scene.hdr.json` and `scene.bsq` all name the same dataset.
pub fn dataset_stem(path: &Path) -> PathBuf {
    let text = path.to_string_lossy();
    for suffix in [HEADER_SUFFIX, PAYLOAD_SUFFIX, CLASSES_SUFFIX] {
        if let Some(stem) = text.strip_suffix(suffix) {
            return PathBuf::from(stem);
        }
    }
    path.to_path_buf()
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = dataset_stem(path).into_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn header_path(path: &Path) -> PathBuf {
    with_suffix(path, HEADER_SUFFIX)
}

pub fn payload_path(path: &Path) -> PathBuf {
    with_suffix(path, PAYLOAD_SUFFIX)
}

pub fn classes_path(path: &Path) -> PathBuf {
    with_suffix(path, CLASSES_SUFFIX)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e.to_string()))
}

/// Pretty JSON with a trailing newline; identical values give identical bytes.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_bytes(path, to_json_string(value).as_bytes())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn read_header(path: &Path) -> Result<Header> {
    let path = header_path(path);
    let header: Header = read_json(&path)?;
    if let Some(names) = &header.band_names {
        if names.len() != header.bands {
            return Err(CliError::format(
                &path,
                format!("{} band names for {} bands", names.len(), header.bands),
            ));
        }
    }
    Ok(header)
}

pub fn read_raster(path: &Path) -> Result<Raster> {
    let header = read_header(path)?;
    let payload = payload_path(path);
    let bytes = fs::read(&payload).map_err(|e| CliError::io(&payload, e))?;
    let expected = header
        .payload_len()
        .ok_or_else(|| CliError::format(&header_path(path), "dimensions overflow"))?;
    if bytes.len() as u64 != expected {
        return Err(CliError::format(
            &payload,
            format!(
                "size mismatch: header declares {}x{}x{} ({expected} bytes), file has {} bytes",
                header.width,
                header.height,
                header.bands,
                bytes.len()
            ),
        ));
    }
    let data: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(CliError::format(
            &payload,
            format!("sample {i} is not finite"),
        ));
    }
    let names = header
        .band_names
        .unwrap_or_else(|| default_band_names(header.bands));
    Raster::new(
        header.width,
        header.height,
        names,
        header.pixel_size_m,
        data,
    )
    .map_err(|e| CliError::format(&header_path(path), e.to_string()))
}

/// Encodes the payload, refusing samples that do not fit a finite `f32`.
pub fn encode_payload(raster: &Raster) -> std::result::Result<Vec<u8>, String> {
    let mut bytes = Vec::with_capacity(raster.data().len() * 4);
    for (i, &v) in raster.data().iter().enumerate() {
        let f = v as f32;
        if !f.is_finite() {
            return Err(format!("sample {i} ({v}) is outside the f32 range"));
        }
        bytes.extend_from_slice(&f.to_le_bytes());
    }
    Ok(bytes)
}

/// Writes header and payload. Nothing is written if any sample is unrepresentable.
pub fn write_raster(raster: &Raster, path: &Path) -> Result<()> {
    let payload = payload_path(path);
    let bytes = encode_payload(raster).map_err(|m| CliError::format(&payload, m))?;
    write_json(&header_path(path), &Header::of(raster))?;
    write_bytes(&payload, &bytes)
}

pub fn read_class_table(path: &Path) -> Result<ClassTable> {
    read_json(&classes_path(path))
}

pub fn write_class_table(table: &ClassTable, path: &Path) -> Result<()> {
    write_json(&classes_path(path), table)
}

/// Reads a one-band label raster plus its class table; without a table file
/// every present label gets a generic entry.
pub fn read_label_mask(path: &Path) -> Result<LabelMask> {
    let raster = read_raster(path)?;
    let table_path = classes_path(path);
    let table = if table_path.exists() {
        read_class_table(path)?
    } else {
        let mut ids: Vec<u32> = raster
            .band(0)
            .iter()
            .filter(|&&v| v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64)
            .map(|&v| v as u32)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ClassTable::generic(ids).map_err(|e| CliError::format(&table_path, e.to_string()))?
    };
    LabelMask::from_raster(&raster, table)
        .map_err(|e| CliError::format(&header_path(path), e.to_string()))
}

pub fn write_label_mask(mask: &LabelMask, pixel_size: f64, path: &Path) -> Result<()> {
    if let Some(&big) = mask.labels().iter().find(|&&l| l > MAX_STORED_LABEL) {
        return Err(CliError::format(
            &payload_path(path),
            format!("label {big} cannot be stored exactly as f32"),
        ));
    }
    let raster = mask
        .to_raster(pixel_size)
        .map_err(|e| CliError::format(&header_path(path), e.to_string()))?;
    write_raster(&raster, path)?;
    write_class_table(mask.class_table(), path)
}
