//! Raster containers, depth maps and dataset ingestion.

mod dataset;

pub use dataset::{
    load_depth, load_pair, load_raster, split_dataset, DatasetManifest, ManifestEntry, Split,
    SplitUnit,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What the channels of a raster represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColourModel {
    Rgb,
    Grey,
    HsvPlane,
    Edge,
}

/// 8-bit interleaved raster, row-major, `channels` samples per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    model: ColourModel,
    samples: Vec<u8>,
}

impl RasterImage {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        model: ColourModel,
        samples: Vec<u8>,
    ) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidRaster(format!("{channels} channels")));
        }
        match (model, channels) {
            (ColourModel::Rgb, 3)
            | (ColourModel::Grey | ColourModel::HsvPlane | ColourModel::Edge, 1) => {}
            _ => {
                return Err(Error::InvalidRaster(format!(
                    "{model:?} with {channels} channels"
                )))
            }
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidRaster("zero-sized raster".into()));
        }
        if samples.len() != width * height * channels {
            return Err(Error::InvalidRaster(format!(
                "{} samples for {width}x{height}x{channels}",
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            model,
            samples,
        })
    }

    /// Builds an RGB raster from a per-pixel function.
    pub fn rgb_from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Self {
        let mut samples = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                samples.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, 3, ColourModel::Rgb, samples).expect("valid rgb raster")
    }

    /// Builds a single-channel raster from a per-pixel function.
    pub fn grey_from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Self {
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self::new(width, height, 1, ColourModel::Grey, samples).expect("valid grey raster")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn model(&self) -> ColourModel {
        self.model
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let i = (y * self.width + x) * self.channels;
        &self.samples[i..i + self.channels]
    }

    /// Relabels a single-channel raster.
    pub fn with_model(mut self, model: ColourModel) -> Result<Self> {
        let ok = match model {
            ColourModel::Rgb => self.channels == 3,
            _ => self.channels == 1,
        };
        if !ok {
            return Err(Error::InvalidRaster(format!(
                "{model:?} with {} channels",
                self.channels
            )));
        }
        self.model = model;
        Ok(self)
    }

    /// Extracts channel `c` as a real plane on the [0,255] scale.
    pub fn channel(&self, c: usize) -> Plane {
        assert!(c < self.channels, "channel {c} out of range");
        let data = self
            .samples
            .iter()
            .skip(c)
            .step_by(self.channels)
            .map(|&s| f64::from(s))
            .collect();
        Plane {
            width: self.width,
            height: self.height,
            range: SampleRange::U8,
            data,
        }
    }

    /// Interleaves planes into an 8-bit raster, quantizing each sample.
    pub fn from_planes(planes: &[Plane], model: ColourModel) -> Result<Self> {
        let first = planes.first().ok_or(Error::EmptyInput("planes"))?;
        let (w, h) = first.dims();
        for p in planes {
            if p.dims() != (w, h) {
                return Err(Error::dims((w, h), p.dims()));
            }
        }
        let n = planes.len();
        let mut samples = vec![0u8; w * h * n];
        for (c, p) in planes.iter().enumerate() {
            for (i, &v) in p.data.iter().enumerate() {
                samples[i * n + c] = p.range.quantize(v);
            }
        }
        Self::new(w, h, n, model, samples)
    }

    pub fn require_channels(&self, expected: usize) -> Result<()> {
        if self.channels != expected {
            return Err(Error::WrongChannelCount {
                expected,
                actual: self.channels,
            });
        }
        Ok(())
    }
}

/// Declared value range of a real plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleRange {
    /// [0, 255]
    U8,
    /// [0, 1]
    Unit,
}

impl SampleRange {
    pub fn max(self) -> f64 {
        match self {
            SampleRange::U8 => 255.0,
            SampleRange::Unit => 1.0,
        }
    }

    pub fn clamp(self, v: f64) -> f64 {
        v.clamp(0.0, self.max())
    }

    /// Maps a value in this range to the nearest 8-bit level.
    pub fn quantize(self, v: f64) -> u8 {
        let scaled = match self {
            SampleRange::U8 => v,
            SampleRange::Unit => v * 255.0,
        };
        scaled.round().clamp(0.0, 255.0) as u8
    }
}

/// Single-channel real-valued plane, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    range: SampleRange,
    data: Vec<f64>,
}

impl Plane {
    /// Values are not range-checked: intermediate planes (e.g. before
    /// clamping) may leave the declared range.
    pub fn new(width: usize, height: usize, range: SampleRange, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "{} values for a {width}x{height} plane",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            range,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        range: SampleRange,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, range, data).expect("non-empty plane")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// (width, height)
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn range(&self) -> SampleRange {
        self.range
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn clamped(mut self) -> Self {
        let r = self.range;
        self.data.iter_mut().for_each(|v| *v = r.clamp(*v));
        self
    }

    /// Single-channel raster with the given model.
    pub fn to_raster(&self, model: ColourModel) -> Result<RasterImage> {
        RasterImage::from_planes(std::slice::from_ref(self), model)
    }
}

/// Value convention of a depth map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DepthConvention {
    /// 8-bit style values in [0, 255].
    #[serde(rename = "u8_0_255")]
    U8,
    /// Normalized values in [0, 1].
    #[serde(rename = "unit_real")]
    UnitReal,
}

impl DepthConvention {
    fn range(self) -> SampleRange {
        match self {
            DepthConvention::U8 => SampleRange::U8,
            DepthConvention::UnitReal => SampleRange::Unit,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    convention: DepthConvention,
    values: Vec<f64>,
}

impl DepthMap {
    pub fn new(
        width: usize,
        height: usize,
        convention: DepthConvention,
        values: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "{} depth values for {width}x{height}",
                values.len()
            )));
        }
        let max = convention.range().max();
        if let Some(v) = values.iter().find(|v| !(0.0..=max).contains(*v)) {
            return Err(Error::InvalidRaster(format!(
                "depth value {v} outside [0, {max}]"
            )));
        }
        Ok(Self {
            width,
            height,
            convention,
            values,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        convention: DepthConvention,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, convention, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn convention(&self) -> DepthConvention {
        self.convention
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Converts to the normalized [0,1] convention.
    pub fn to_unit(&self) -> DepthMap {
        match self.convention {
            DepthConvention::UnitReal => self.clone(),
            DepthConvention::U8 => DepthMap {
                convention: DepthConvention::UnitReal,
                values: self.values.iter().map(|v| v / 255.0).collect(),
                ..*self
            },
        }
    }

    /// Converts to the [0,255] convention, rounding to whole levels.
    pub fn to_u8(&self) -> DepthMap {
        match self.convention {
            DepthConvention::U8 => self.clone(),
            DepthConvention::UnitReal => DepthMap {
                convention: DepthConvention::U8,
                values: self
                    .values
                    .iter()
                    .map(|v| (v * 255.0).round().clamp(0.0, 255.0))
                    .collect(),
                ..*self
            },
        }
    }

    /// Depth values on the [0,255] scale without rounding.
    pub fn scaled_0_255(&self) -> impl Iterator<Item = f64> + '_ {
        let k = match self.convention {
            DepthConvention::U8 => 1.0,
            DepthConvention::UnitReal => 255.0,
        };
        self.values.iter().map(move |v| v * k)
    }

    pub fn as_plane(&self) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            range: self.convention.range(),
            data: self.values.clone(),
        }
    }

    /// Wraps a plane as a depth map, clamping to the convention's range.
    pub fn from_plane(plane: &Plane, convention: DepthConvention) -> DepthMap {
        let max = convention.range().max();
        DepthMap {
            width: plane.width,
            height: plane.height,
            convention,
            values: plane.data.iter().map(|v| v.clamp(0.0, max)).collect(),
        }
    }
}

/// One RGB image with its ground-truth depth.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePair {
    pub id: String,
    pub rgb: RasterImage,
    pub depth: DepthMap,
}

impl SamplePair {
    pub fn new(id: impl Into<String>, rgb: RasterImage, depth: DepthMap) -> Result<Self> {
        rgb.require_channels(3)?;
        let rgb_dims = (rgb.width(), rgb.height());
        if rgb_dims != depth.dims() {
            return Err(Error::dims(rgb_dims, depth.dims()));
        }
        Ok(Self {
            id: id.into(),
            rgb,
            depth,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.depth.dims()
    }
}

/// BT.601 luma, rounded half away from zero.
pub fn to_greyscale(img: &RasterImage) -> Result<RasterImage> {
    img.require_channels(3)?;
    let samples = img
        .samples()
        .chunks_exact(3)
        .map(|p| {
            // Integer weights keep R=G=B=v mapping exactly to v.
            let weighted = 299 * u32::from(p[0]) + 587 * u32::from(p[1]) + 114 * u32::from(p[2]);
            ((weighted + 500) / 1000) as u8
        })
        .collect();
    RasterImage::new(img.width(), img.height(), 1, ColourModel::Grey, samples)
}
