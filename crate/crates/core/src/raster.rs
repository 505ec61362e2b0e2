//! Raster and label-mask data model.
//!
//! A [`Raster`] stores its samples band-sequentially: band 0 row by row,
//! then band 1, and so on. A [`LabelMask`] is a single grid of class ids
//! where 0 means unlabeled (ground truth) or unclassified (classifier output).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Ground sample distance in meters used when a header omits it.
pub const DEFAULT_PIXEL_SIZE: f64 = 2.44;

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    band_names: Vec<String>,
    pixel_size: f64,
    data: Vec<f64>,
}

impl Raster {
    /// Builds a raster from band-sequential samples, checking every invariant.
    pub fn new(
        width: usize,
        height: usize,
        band_names: Vec<String>,
        pixel_size: f64,
        data: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidRaster(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if band_names.is_empty() {
            return Err(Error::InvalidRaster("at least one band is required".into()));
        }
        if !(pixel_size.is_finite() && pixel_size > 0.0) {
            return Err(Error::InvalidRaster(format!(
                "pixel size must be positive, got {pixel_size}"
            )));
        }
        let expected = width * height * band_names.len();
        if data.len() != expected {
            return Err(Error::InvalidRaster(format!(
                "expected {expected} samples for {width}x{height}x{}, got {}",
                band_names.len(),
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            let plane = width * height;
            return Err(Error::NonFinite(format!(
                "sample {} of band {} is {}",
                i % plane,
                i / plane,
                data[i]
            )));
        }
        Ok(Self {
            width,
            height,
            band_names,
            pixel_size,
            data,
        })
    }

    /// Builds a raster from one vector per band, naming bands `band1`, `band2`, ...
    pub fn from_bands(
        width: usize,
        height: usize,
        pixel_size: f64,
        bands: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let names = default_band_names(bands.len());
        let mut data = Vec::with_capacity(width * height * bands.len());
        for (b, band) in bands.into_iter().enumerate() {
            if band.len() != width * height {
                return Err(Error::InvalidRaster(format!(
                    "band {b} has {} samples, expected {}",
                    band.len(),
                    width * height
                )));
            }
            data.extend(band);
        }
        Self::new(width, height, names, pixel_size, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bands(&self) -> usize {
        self.band_names.len()
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn band_names(&self) -> &[String] {
        &self.band_names
    }

    pub fn pixel_size(&self) -> f64 {
        self.pixel_size
    }

    /// All samples, band-sequential and row-major within each band.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Samples of one band in row-major order.
    ///
    /// Panics if `band` is out of range.
    pub fn band(&self, band: usize) -> &[f64] {
        let plane = self.pixel_count();
        &self.data[band * plane..(band + 1) * plane]
    }

    pub fn checked_band(&self, band: usize) -> Result<&[f64]> {
        if band >= self.bands() {
            return Err(Error::InvalidArgument(format!(
                "band {band} out of range for a {}-band raster",
                self.bands()
            )));
        }
        Ok(self.band(band))
    }

    pub fn get(&self, band: usize, row: usize, col: usize) -> f64 {
        self.data[band * self.pixel_count() + row * self.width + col]
    }

    /// Writes the cross-band feature vector of the pixel at row-major `index` into `out`.
    pub fn pixel_into(&self, index: usize, out: &mut [f64]) {
        let plane = self.pixel_count();
        for (b, slot) in out.iter_mut().enumerate() {
            *slot = self.data[b * plane + index];
        }
    }

    /// Cross-band feature vector of one pixel.
    pub fn pixel(&self, row: usize, col: usize) -> Vec<f64> {
        let mut v = alloc::vec![0.0; self.bands()];
        self.pixel_into(row * self.width + col, &mut v);
        v
    }

    /// A new raster holding only the listed bands, in the listed order.
    pub fn select_bands(&self, bands: &[usize]) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::InvalidArgument("band subset is empty".into()));
        }
        let mut names = Vec::with_capacity(bands.len());
        let mut data = Vec::with_capacity(bands.len() * self.pixel_count());
        for &b in bands {
            data.extend_from_slice(self.checked_band(b)?);
            names.push(self.band_names[b].clone());
        }
        Ok(Self {
            width: self.width,
            height: self.height,
            band_names: names,
            pixel_size: self.pixel_size,
            data,
        })
    }

    /// Same geometry and band names, new samples.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.band_names.clone(),
            self.pixel_size,
            data,
        )
    }
}

pub fn default_band_names(count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("band{i}")).collect()
}

/// Display metadata for one class.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassInfo {
    pub name: String,
    pub rgb: [u8; 3],
}

/// Class id to name/color mapping. Id 0 is reserved and never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct ClassTable(BTreeMap<u32, ClassInfo>);

impl ClassTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: u32, info: ClassInfo) -> Result<()> {
        if id == 0 {
            return Err(Error::InvalidLabels(
                "class id 0 is reserved for unlabeled pixels".into(),
            ));
        }
        self.0.insert(id, info);
        Ok(())
    }

    pub fn with(mut self, id: u32, name: &str, rgb: [u8; 3]) -> Result<Self> {
        self.insert(
            id,
            ClassInfo {
                name: name.into(),
                rgb,
            },
        )?;
        Ok(self)
    }

    /// A table naming each id `class N` with a gray level color.
    pub fn generic(ids: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut table = Self::new();
        for id in ids {
            let level = (id.wrapping_mul(37) % 200 + 40) as u8;
            table.insert(
                id,
                ClassInfo {
                    name: format!("class {id}"),
                    rgb: [level, level, level],
                },
            )?;
        }
        Ok(table)
    }

    pub fn get(&self, id: u32) -> Option<&ClassInfo> {
        self.0.get(&id)
    }

    pub fn contains(&self, id: u32) -> bool {
        self.0.contains_key(&id)
    }

    /// Class ids in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &ClassInfo)> {
        self.0.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn validate(&self) -> Result<()> {
        if self.0.contains_key(&0) {
            return Err(Error::InvalidLabels(
                "class table must not define id 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelMask {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    class_table: ClassTable,
}

impl LabelMask {
    pub fn new(
        width: usize,
        height: usize,
        labels: Vec<u32>,
        class_table: ClassTable,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidLabels(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if labels.len() != width * height {
            return Err(Error::InvalidLabels(format!(
                "expected {} labels, got {}",
                width * height,
                labels.len()
            )));
        }
        class_table.validate()?;
        if let Some(&missing) = labels.iter().find(|&&l| l != 0 && !class_table.contains(l)) {
            return Err(Error::InvalidLabels(format!(
                "label {missing} is not in the class table"
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
            class_table,
        })
    }

    /// Interprets a single-band raster of nonnegative integral samples as labels.
    pub fn from_raster(raster: &Raster, class_table: ClassTable) -> Result<Self> {
        if raster.bands() != 1 {
            return Err(Error::InvalidLabels(format!(
                "label rasters must have exactly 1 band, got {}",
                raster.bands()
            )));
        }
        let mut labels = Vec::with_capacity(raster.pixel_count());
        for (i, &v) in raster.band(0).iter().enumerate() {
            if v < 0.0 || v != libm::round(v) || v > u32::MAX as f64 {
                return Err(Error::InvalidLabels(format!(
                    "pixel {i} holds {v}, which is not a nonnegative integer label"
                )));
            }
            labels.push(v as u32);
        }
        Self::new(raster.width(), raster.height(), labels, class_table)
    }

    /// Encodes the labels as a single-band raster (the on-disk container).
    pub fn to_raster(&self, pixel_size: f64) -> Result<Raster> {
        Raster::new(
            self.width,
            self.height,
            alloc::vec![String::from("class")],
            pixel_size,
            self.labels.iter().map(|&l| l as f64).collect(),
        )
    }

    /// The same labels under a different class table.
    pub fn with_class_table(&self, class_table: ClassTable) -> Result<Self> {
        Self::new(self.width, self.height, self.labels.clone(), class_table)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn class_table(&self) -> &ClassTable {
        &self.class_table
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.width + col]
    }

    /// Distinct nonzero labels present in the mask, ascending.
    pub fn present_classes(&self) -> Vec<u32> {
        let mut seen = BTreeMap::new();
        for &l in &self.labels {
            if l != 0 {
                seen.insert(l, ());
            }
        }
        seen.into_keys().collect()
    }

    pub fn same_shape(&self, width: usize, height: usize) -> bool {
        self.width == width && self.height == height
    }
}
