//! Seeded, invertible patch shuffling.
//!
//! The input is center-cropped to whole patches, cut into a `rows x cols`
//! grid, and output cell `i` receives input cell `permutation[i]`. Only
//! index arithmetic is involved, so shuffling and unshuffling are exact.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{DepthMap, Plane, RasterImage};
use crate::seed;

pub const SIDECAR_VERSION: u32 = 1;

/// Patch sizes swept for the local-texture cue.
pub const STANDARD_PATCH_SIZES: [usize; 5] = [4, 16, 32, 64, 128];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crop {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShuffleRecord {
    seed: u64,
    patch_size: usize,
    orig_h: usize,
    orig_w: usize,
    crop: Crop,
    rows: usize,
    cols: usize,
    permutation: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShuffleSidecar {
    pub seed: u64,
    pub patch_size: usize,
    pub orig_h: usize,
    pub orig_w: usize,
    pub version: u32,
}

fn geometry(height: usize, width: usize, patch_size: usize) -> Result<(Crop, usize, usize)> {
    if patch_size == 0 {
        return Err(Error::InvalidParams("patch size 0".into()));
    }
    if patch_size > height.min(width) {
        return Err(Error::PatchTooLarge {
            patch: patch_size,
            width,
            height,
        });
    }
    let rows = height / patch_size;
    let cols = width / patch_size;
    let (ch, cw) = (rows * patch_size, cols * patch_size);
    let crop = Crop {
        top: (height - ch) / 2,
        left: (width - cw) / 2,
        height: ch,
        width: cw,
    };
    Ok((crop, rows, cols))
}

/// Center-crops to whole patches and draws a Fisher-Yates permutation of
/// the patch grid from `seed`.
pub fn make_shuffle(
    seed: u64,
    height: usize,
    width: usize,
    patch_size: usize,
) -> Result<ShuffleRecord> {
    let (crop, rows, cols) = geometry(height, width, patch_size)?;
    let mut permutation: Vec<usize> = (0..rows * cols).collect();
    permutation.shuffle(&mut seed::rng(seed));
    Ok(ShuffleRecord {
        seed,
        patch_size,
        orig_h: height,
        orig_w: width,
        crop,
        rows,
        cols,
        permutation,
    })
}

impl ShuffleRecord {
    pub fn identity(height: usize, width: usize, patch_size: usize) -> Result<Self> {
        let n = (height / patch_size.max(1)) * (width / patch_size.max(1));
        Self::from_permutation(height, width, patch_size, (0..n).collect())
    }

    /// Record with an explicit permutation; it must be a bijection on the grid.
    pub fn from_permutation(
        height: usize,
        width: usize,
        patch_size: usize,
        permutation: Vec<usize>,
    ) -> Result<Self> {
        let (crop, rows, cols) = geometry(height, width, patch_size)?;
        if !is_bijection(&permutation, rows * cols) {
            return Err(Error::InvalidParams(format!(
                "permutation is not a bijection on {} cells",
                rows * cols
            )));
        }
        Ok(Self {
            seed: 0,
            patch_size,
            orig_h: height,
            orig_w: width,
            crop,
            rows,
            cols,
            permutation,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn patch_size(&self) -> usize {
        self.patch_size
    }

    /// (rows, cols) of the patch grid.
    pub fn grid(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn crop(&self) -> Crop {
        self.crop
    }

    /// Original (height, width).
    pub fn original_dims(&self) -> (usize, usize) {
        (self.orig_h, self.orig_w)
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn inverse_permutation(&self) -> Vec<usize> {
        let mut inv = vec![0; self.permutation.len()];
        for (i, &p) in self.permutation.iter().enumerate() {
            inv[p] = i;
        }
        inv
    }

    pub fn sidecar(&self) -> ShuffleSidecar {
        ShuffleSidecar {
            seed: self.seed,
            patch_size: self.patch_size,
            orig_h: self.orig_h,
            orig_w: self.orig_w,
            version: SIDECAR_VERSION,
        }
    }

    pub fn from_sidecar(sidecar: &ShuffleSidecar) -> Result<Self> {
        if sidecar.version != SIDECAR_VERSION {
            return Err(Error::VersionMismatch {
                found: sidecar.version,
                expected: SIDECAR_VERSION,
            });
        }
        make_shuffle(
            sidecar.seed,
            sidecar.orig_h,
            sidecar.orig_w,
            sidecar.patch_size,
        )
    }

    /// Source pixel (x, y) in cropped coordinates for output pixel (x, y),
    /// given a cell mapping `out cell -> source cell`.
    fn source(&self, cells: &[usize], x: usize, y: usize) -> (usize, usize) {
        let p = self.patch_size;
        let src = cells[(y / p) * self.cols + x / p];
        ((src % self.cols) * p + x % p, (src / self.cols) * p + y % p)
    }
}

pub fn is_bijection(map: &[usize], n: usize) -> bool {
    if map.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &m in map {
        if m >= n || std::mem::replace(&mut seen[m], true) {
            return false;
        }
    }
    true
}

/// Anything laid out as a row-major pixel grid that can be rearranged.
pub trait PatchGrid: Sized {
    /// (width, height)
    fn grid_dims(&self) -> (usize, usize);

    /// New grid of `width x height` whose pixel (x, y) copies this grid's
    /// pixel `source(x, y)`.
    fn remap(
        &self,
        width: usize,
        height: usize,
        source: impl Fn(usize, usize) -> (usize, usize),
    ) -> Self;
}

fn remap_samples<T: Copy>(
    src: &[T],
    src_w: usize,
    channels: usize,
    width: usize,
    height: usize,
    source: impl Fn(usize, usize) -> (usize, usize),
) -> Vec<T> {
    let mut out = Vec::with_capacity(width * height * channels);
    for y in 0..height {
        for x in 0..width {
            let (sx, sy) = source(x, y);
            let i = (sy * src_w + sx) * channels;
            out.extend_from_slice(&src[i..i + channels]);
        }
    }
    out
}

impl PatchGrid for RasterImage {
    fn grid_dims(&self) -> (usize, usize) {
        (self.width(), self.height())
    }

    fn remap(
        &self,
        width: usize,
        height: usize,
        source: impl Fn(usize, usize) -> (usize, usize),
    ) -> Self {
        let samples = remap_samples(
            self.samples(),
            self.width(),
            self.channels(),
            width,
            height,
            source,
        );
        RasterImage::new(width, height, self.channels(), self.model(), samples)
            .expect("remap keeps layout")
    }
}

impl PatchGrid for Plane {
    fn grid_dims(&self) -> (usize, usize) {
        self.dims()
    }

    fn remap(
        &self,
        width: usize,
        height: usize,
        source: impl Fn(usize, usize) -> (usize, usize),
    ) -> Self {
        let data = remap_samples(self.data(), self.width(), 1, width, height, source);
        Plane::new(width, height, self.range(), data).expect("remap keeps layout")
    }
}

impl PatchGrid for DepthMap {
    fn grid_dims(&self) -> (usize, usize) {
        self.dims()
    }

    fn remap(
        &self,
        width: usize,
        height: usize,
        source: impl Fn(usize, usize) -> (usize, usize),
    ) -> Self {
        let values = remap_samples(self.values(), self.width(), 1, width, height, source);
        DepthMap::new(width, height, self.convention(), values).expect("remap keeps layout")
    }
}

fn expect_dims(actual: (usize, usize), expected: (usize, usize)) -> Result<()> {
    if actual != expected {
        return Err(Error::dims(expected, actual));
    }
    Ok(())
}

/// The record's crop applied to an input of the original size.
pub fn crop_to_grid<T: PatchGrid>(input: &T, record: &ShuffleRecord) -> Result<T> {
    expect_dims(input.grid_dims(), (record.orig_w, record.orig_h))?;
    let c = record.crop;
    Ok(input.remap(c.width, c.height, |x, y| (x + c.left, y + c.top)))
}

/// Crops `input` (original size) and rearranges its patches.
pub fn shuffle_patches<T: PatchGrid>(input: &T, record: &ShuffleRecord) -> Result<T> {
    expect_dims(input.grid_dims(), (record.orig_w, record.orig_h))?;
    let c = record.crop;
    Ok(input.remap(c.width, c.height, |x, y| {
        let (sx, sy) = record.source(&record.permutation, x, y);
        (sx + c.left, sy + c.top)
    }))
}

/// Inverse of [`shuffle_patches`] on a cropped-size input.
pub fn unshuffle_patches<T: PatchGrid>(input: &T, record: &ShuffleRecord) -> Result<T> {
    let c = record.crop;
    expect_dims(input.grid_dims(), (c.width, c.height))?;
    let inverse = record.inverse_permutation();
    Ok(input.remap(c.width, c.height, |x, y| record.source(&inverse, x, y)))
}
