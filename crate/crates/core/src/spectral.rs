//! 2-D DFT, seeded phase scrambling and its exact inverse.
//!
//! A [`ScrambleRecord`] holds a random phase field that is antisymmetric
//! under frequency negation, so multiplying a real plane's spectrum by
//! `exp(i * phase)` keeps the inverse transform real while leaving every
//! magnitude untouched. Multiplying by `exp(-i * phase)` undoes it.

use std::f64::consts::TAU;

use rand::Rng;
use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::colorspace::saturation_plane;
use crate::error::{Error, Result};
use crate::imgcore::{to_greyscale, ColourModel, DepthMap, Plane, RasterImage, SamplePair};
use crate::seed;

pub const SIDECAR_VERSION: u32 = 1;

/// Random phase field, regenerated from `(seed, height, width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScrambleRecord {
    seed: u64,
    height: usize,
    width: usize,
    phase_field: Vec<f64>,
}

/// On-disk form of a [`ScrambleRecord`]; the field itself is never stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScrambleSidecar {
    pub seed: u64,
    pub height: usize,
    pub width: usize,
    pub version: u32,
}

/// Draws a phase field uniformly in [0, 2π) over half of the frequency bins
/// and mirrors it with negation. DC and the other self-conjugate bins
/// (Nyquist rows/columns of even sizes) get zero phase.
pub fn make_record(seed: u64, height: usize, width: usize) -> Result<ScrambleRecord> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidParams(format!(
            "scramble record {width}x{height}"
        )));
    }
    let mut rng = seed::rng(seed);
    let mut field = vec![0.0; height * width];
    // Visiting bins in row-major order, the partner of an unvisited bin
    // always has a larger index, so each pair is drawn exactly once.
    for u in 0..height {
        for v in 0..width {
            let idx = u * width + v;
            let partner = ((height - u) % height) * width + (width - v) % width;
            if partner <= idx {
                continue;
            }
            let phase = rng.random::<f64>() * TAU % TAU;
            field[idx] = phase;
            field[partner] = if phase == 0.0 { 0.0 } else { TAU - phase };
        }
    }
    Ok(ScrambleRecord {
        seed,
        height,
        width,
        phase_field: field,
    })
}

impl ScrambleRecord {
    /// All-zero phase field; scrambling with it is the identity.
    pub fn identity(height: usize, width: usize) -> Self {
        Self {
            seed: 0,
            height,
            width,
            phase_field: vec![0.0; height * width],
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn phase_field(&self) -> &[f64] {
        &self.phase_field
    }

    /// Phase at row frequency `u`, column frequency `v`.
    pub fn phase(&self, u: usize, v: usize) -> f64 {
        self.phase_field[u * self.width + v]
    }

    pub fn id(&self) -> String {
        format!("scramble-{:016x}-{}x{}", self.seed, self.width, self.height)
    }

    pub fn sidecar(&self) -> ScrambleSidecar {
        ScrambleSidecar {
            seed: self.seed,
            height: self.height,
            width: self.width,
            version: SIDECAR_VERSION,
        }
    }

    pub fn from_sidecar(sidecar: &ScrambleSidecar) -> Result<Self> {
        if sidecar.version != SIDECAR_VERSION {
            return Err(Error::VersionMismatch {
                found: sidecar.version,
                expected: SIDECAR_VERSION,
            });
        }
        make_record(sidecar.seed, sidecar.height, sidecar.width)
    }

    fn check(&self, dims: (usize, usize)) -> Result<()> {
        if dims != (self.width, self.height) {
            return Err(Error::dims((self.width, self.height), dims));
        }
        Ok(())
    }
}

fn fft_2d_in_place(width: usize, height: usize, buf: &mut [Complex64], direction: FftDirection) {
    let mut planner = FftPlanner::new();
    planner.plan_fft(width, direction).process(buf);

    let mut transposed = vec![Complex64::default(); width * height];
    for y in 0..height {
        for x in 0..width {
            transposed[x * height + y] = buf[y * width + x];
        }
    }
    planner.plan_fft(height, direction).process(&mut transposed);
    for x in 0..width {
        for y in 0..height {
            buf[y * width + x] = transposed[x * height + y];
        }
    }
}

/// Unnormalized forward 2-D DFT of a row-major real grid.
///
/// Output index `u * width + v` holds frequency (row `u`, column `v`).
pub fn fft2(width: usize, height: usize, data: &[f64]) -> Vec<Complex64> {
    assert_eq!(data.len(), width * height);
    let mut buf: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_2d_in_place(width, height, &mut buf, FftDirection::Forward);
    buf
}

/// Inverse 2-D DFT, normalized by `1 / (width * height)`.
pub fn ifft2(width: usize, height: usize, spectrum: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(spectrum.len(), width * height);
    let mut buf = spectrum.to_vec();
    fft_2d_in_place(width, height, &mut buf, FftDirection::Inverse);
    let norm = 1.0 / (width * height) as f64;
    buf.iter_mut().for_each(|c| *c *= norm);
    buf
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseDirection {
    Scramble,
    Unscramble,
}

/// Spatial result of rotating every frequency bin by the record's phase,
/// before taking the real part or clamping.
pub fn rotate_phase(
    plane: &Plane,
    record: &ScrambleRecord,
    direction: PhaseDirection,
) -> Result<Vec<Complex64>> {
    record.check(plane.dims())?;
    let (w, h) = plane.dims();
    let sign = match direction {
        PhaseDirection::Scramble => 1.0,
        PhaseDirection::Unscramble => -1.0,
    };
    let mut spectrum = fft2(w, h, plane.data());
    for (c, &phase) in spectrum.iter_mut().zip(&record.phase_field) {
        if phase != 0.0 {
            *c *= Complex64::from_polar(1.0, sign * phase);
        }
    }
    Ok(ifft2(w, h, &spectrum))
}

fn rotate_real(plane: &Plane, record: &ScrambleRecord, direction: PhaseDirection) -> Result<Plane> {
    let spatial = rotate_phase(plane, record, direction)?;
    let (w, h) = plane.dims();
    Plane::new(
        w,
        h,
        plane.range(),
        spatial.into_iter().map(|c| c.re).collect(),
    )
}

/// Scrambled plane before clamping; may leave the declared range.
pub fn phase_scramble_unclamped(plane: &Plane, record: &ScrambleRecord) -> Result<Plane> {
    rotate_real(plane, record, PhaseDirection::Scramble)
}

/// Scrambles a plane and clamps it to its declared range.
pub fn phase_scramble(plane: &Plane, record: &ScrambleRecord) -> Result<Plane> {
    Ok(phase_scramble_unclamped(plane, record)?.clamped())
}

pub fn phase_unscramble_unclamped(plane: &Plane, record: &ScrambleRecord) -> Result<Plane> {
    rotate_real(plane, record, PhaseDirection::Unscramble)
}

/// Inverse of [`phase_scramble`]; exact up to floating error when the
/// scrambled plane needed no clamping.
pub fn phase_unscramble(plane: &Plane, record: &ScrambleRecord) -> Result<Plane> {
    Ok(phase_unscramble_unclamped(plane, record)?.clamped())
}

/// Which cue a scrambled dataset carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScrambleMode {
    Rgb,
    Greyscale,
    Saturation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScrambledImage {
    pub image: RasterImage,
    pub record_id: String,
}

/// Scrambles the image cue and the depth map with one shared record.
pub fn scramble_pair(
    pair: &SamplePair,
    record: &ScrambleRecord,
    mode: ScrambleMode,
) -> Result<(ScrambledImage, DepthMap)> {
    record.check(pair.dims())?;
    let image = match mode {
        ScrambleMode::Rgb => {
            let channels = (0..3)
                .map(|c| phase_scramble(&pair.rgb.channel(c), record))
                .collect::<Result<Vec<_>>>()?;
            RasterImage::from_planes(&channels, ColourModel::Rgb)?
        }
        ScrambleMode::Greyscale => {
            let grey = to_greyscale(&pair.rgb)?.channel(0);
            phase_scramble(&grey, record)?.to_raster(ColourModel::Grey)?
        }
        ScrambleMode::Saturation => {
            let s = saturation_plane(&pair.rgb)?;
            phase_scramble(&s, record)?.to_raster(ColourModel::HsvPlane)?
        }
    };
    let depth = scramble_depth(&pair.depth, record)?;
    Ok((
        ScrambledImage {
            image,
            record_id: record.id(),
        },
        depth,
    ))
}

pub fn scramble_depth(depth: &DepthMap, record: &ScrambleRecord) -> Result<DepthMap> {
    let plane = phase_scramble(&depth.as_plane(), record)?;
    Ok(DepthMap::from_plane(&plane, depth.convention()))
}

pub fn unscramble_depth(depth: &DepthMap, record: &ScrambleRecord) -> Result<DepthMap> {
    let plane = phase_unscramble(&depth.as_plane(), record)?;
    Ok(DepthMap::from_plane(&plane, depth.convention()))
}

/// Unscrambles every channel of an 8-bit raster with one record.
pub fn unscramble_image(img: &RasterImage, record: &ScrambleRecord) -> Result<RasterImage> {
    let channels = (0..img.channels())
        .map(|c| phase_unscramble(&img.channel(c), record))
        .collect::<Result<Vec<_>>>()?;
    RasterImage::from_planes(&channels, img.model())
}
