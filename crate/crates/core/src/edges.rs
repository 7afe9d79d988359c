//! Shape-cue extraction: Sobel gradient maps and Canny edge maps.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{
    to_greyscale, ColourModel, DepthMap, Plane, RasterImage, SamplePair, SampleRange,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Thresholds are gradient magnitudes.
    Absolute,
    /// Thresholds are fractions of the image's maximum gradient magnitude.
    RatioOfMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeParams {
    pub gaussian_sigma: f64,
    pub low_threshold: f64,
    pub high_threshold: f64,
    pub threshold_mode: ThresholdMode,
}

impl Default for EdgeParams {
    fn default() -> Self {
        Self {
            gaussian_sigma: 1.4,
            low_threshold: 0.1,
            high_threshold: 0.2,
            threshold_mode: ThresholdMode::RatioOfMax,
        }
    }
}

impl EdgeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gaussian_sigma.is_finite() && self.gaussian_sigma > 0.0) {
            return Err(Error::InvalidParams(format!(
                "sigma {}",
                self.gaussian_sigma
            )));
        }
        if !(self.low_threshold > 0.0
            && self.low_threshold < self.high_threshold
            && self.high_threshold.is_finite())
        {
            return Err(Error::InvalidParams(format!(
                "need 0 < low ({}) < high ({})",
                self.low_threshold, self.high_threshold
            )));
        }
        Ok(())
    }
}

fn at_clamped(data: &[f64], w: usize, h: usize, x: isize, y: isize) -> f64 {
    let x = x.clamp(0, w as isize - 1) as usize;
    let y = y.clamp(0, h as isize - 1) as usize;
    data[y * w + x]
}

/// 3x3 Sobel responses `(gx, gy)` with replicate borders.
///
/// `gx` is positive where intensity increases to the right, `gy` where it
/// increases downwards.
pub fn sobel_gradients(plane: &Plane) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = plane.dims();
    let d = plane.data();
    let mut gx = Vec::with_capacity(w * h);
    let mut gy = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |dx: isize, dy: isize| at_clamped(d, w, h, x + dx, y + dy);
            gx.push((p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1)));
            gy.push((p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1)));
        }
    }
    (gx, gy)
}

/// Sobel gradient magnitude scaled so its maximum maps to 255.
pub fn sobel_magnitude(grey: &RasterImage) -> Result<Plane> {
    grey.require_channels(1)?;
    let (gx, gy) = sobel_gradients(&grey.channel(0));
    let mag: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();
    let max = mag.iter().cloned().fold(0.0, f64::max);
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    Plane::new(
        grey.width(),
        grey.height(),
        SampleRange::U8,
        mag.into_iter().map(|m| m * scale).collect(),
    )
}

/// Separable Gaussian blur, kernel radius `ceil(3 sigma)`, replicate borders.
pub fn gaussian_blur(plane: &Plane, sigma: f64) -> Plane {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= sum);

    let (w, h) = plane.dims();
    let src = plane.data();
    let mut horiz = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            horiz[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    c * at_clamped(src, w, h, x as isize + k as isize - radius, y as isize)
                })
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    c * at_clamped(&horiz, w, h, x as isize, y as isize + k as isize - radius)
                })
                .sum();
        }
    }
    Plane::new(w, h, plane.range(), out).expect("same dims")
}

/// Gradient direction quantized to 0, 45, 90 or 135 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Horizontal,
    Diagonal,
    Vertical,
    AntiDiagonal,
}

impl Direction {
    fn quantize(gx: f64, gy: f64) -> Self {
        let mut angle = gy.atan2(gx).to_degrees();
        if angle < 0.0 {
            angle += 180.0;
        }
        if !(22.5..157.5).contains(&angle) {
            Direction::Horizontal
        } else if angle < 67.5 {
            Direction::Diagonal
        } else if angle < 112.5 {
            Direction::Vertical
        } else {
            Direction::AntiDiagonal
        }
    }

    /// Pixel step along the gradient, in image coordinates (y down).
    pub fn step(self) -> (isize, isize) {
        match self {
            Direction::Horizontal => (1, 0),
            Direction::Diagonal => (1, 1),
            Direction::Vertical => (0, 1),
            Direction::AntiDiagonal => (-1, 1),
        }
    }
}

/// Intermediate results of the Canny pipeline.
#[derive(Debug, Clone)]
pub struct CannyStages {
    pub width: usize,
    pub height: usize,
    pub magnitude: Vec<f64>,
    pub direction: Vec<Direction>,
    /// Magnitude where the pixel is a local maximum along its gradient, else 0.
    pub suppressed: Vec<f64>,
    pub low: f64,
    pub high: f64,
    pub edges: Vec<bool>,
}

pub fn canny_stages(grey: &RasterImage, params: &EdgeParams) -> Result<CannyStages> {
    grey.require_channels(1)?;
    params.validate()?;
    let (w, h) = (grey.width(), grey.height());
    let blurred = gaussian_blur(&grey.channel(0), params.gaussian_sigma);
    let (gx, gy) = sobel_gradients(&blurred);
    let magnitude: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();
    let direction: Vec<Direction> = gx
        .iter()
        .zip(&gy)
        .map(|(a, b)| Direction::quantize(*a, *b))
        .collect();

    let mag_at = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            magnitude[y as usize * w + x as usize]
        }
    };
    let mut suppressed = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = magnitude[i];
            if m == 0.0 {
                continue;
            }
            let (dx, dy) = direction[i].step();
            let (x, y) = (x as isize, y as isize);
            // Strict on one side, inclusive on the other: a symmetric ridge
            // two pixels wide keeps exactly one of them.
            if m > mag_at(x - dx, y - dy) && m >= mag_at(x + dx, y + dy) {
                suppressed[i] = m;
            }
        }
    }

    let (low, high) = match params.threshold_mode {
        ThresholdMode::Absolute => (params.low_threshold, params.high_threshold),
        ThresholdMode::RatioOfMax => {
            let max = magnitude.iter().cloned().fold(0.0, f64::max);
            (params.low_threshold * max, params.high_threshold * max)
        }
    };

    let weak = |i: usize| suppressed[i] > 0.0 && suppressed[i] >= low;
    let mut edges = vec![false; w * h];
    let mut queue = VecDeque::new();
    for i in 0..w * h {
        if suppressed[i] > 0.0 && suppressed[i] >= high {
            edges[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !edges[j] && weak(j) {
                    edges[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }

    Ok(CannyStages {
        width: w,
        height: h,
        magnitude,
        direction,
        suppressed,
        low,
        high,
        edges,
    })
}

/// Binary edge map (255 on edges, 0 elsewhere): Gaussian blur, Sobel
/// gradients, non-maximum suppression and hysteresis with 8-connectivity.
pub fn canny_edges(grey: &RasterImage, params: &EdgeParams) -> Result<RasterImage> {
    let stages = canny_stages(grey, params)?;
    let samples = stages
        .edges
        .iter()
        .map(|&e| if e { 255 } else { 0 })
        .collect();
    RasterImage::new(stages.width, stages.height, 1, ColourModel::Edge, samples)
}

/// Edge map of the pair's greyscale image, with the depth passed through.
pub fn shape_dataset(pair: &SamplePair, params: &EdgeParams) -> Result<(RasterImage, DepthMap)> {
    let grey = to_greyscale(&pair.rgb)?;
    Ok((canny_edges(&grey, params)?, pair.depth.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::DepthConvention;

    fn grey(w: usize, h: usize, f: impl FnMut(usize, usize) -> u8) -> RasterImage {
        RasterImage::grey_from_fn(w, h, f)
    }

    #[test]
    fn sobel_constant_is_zero() {
        let p = sobel_magnitude(&grey(9, 7, |_, _| 120)).unwrap();
        assert!(p.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sobel_step_edge() {
        // 0 left of column 5, 255 from column 5 on
        let c = 5;
        let img = grey(12, 6, |x, _| if x >= c { 255 } else { 0 });
        let (gx, gy) = sobel_gradients(&img.channel(0));
        for y in 0..6 {
            for x in 0..12 {
                let v = gx[y * 12 + x];
                if x == c - 1 || x == c {
                    assert_eq!(v, 4.0 * 255.0);
                } else {
                    assert_eq!(v, 0.0);
                }
                assert_eq!(gy[y * 12 + x], 0.0);
            }
        }
        let mag = sobel_magnitude(&img).unwrap();
        assert_eq!(mag.get(c - 1, 3), 255.0);
        assert_eq!(mag.get(c, 3), 255.0);
        assert_eq!(mag.get(0, 3), 0.0);
        assert_eq!(mag.get(11, 3), 0.0);
    }

    #[test]
    fn sobel_ramp_interior_is_eight_times_slope() {
        let img = grey(10, 6, |x, _| (3 * x) as u8);
        let (gx, gy) = sobel_gradients(&img.channel(0));
        for y in 0..6 {
            for x in 1..9 {
                assert_eq!(gx[y * 10 + x], 24.0);
            }
        }
        assert!(gy.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sobel_rejects_rgb() {
        let rgb = RasterImage::rgb_from_fn(3, 3, |_, _| [1, 2, 3]);
        assert!(matches!(
            sobel_magnitude(&rgb),
            Err(Error::WrongChannelCount { .. })
        ));
        assert!(canny_edges(&rgb, &EdgeParams::default()).is_err());
    }

    #[test]
    fn blur_preserves_constant_and_mass() {
        let p = Plane::from_fn(11, 9, SampleRange::U8, |_, _| 77.0);
        let b = gaussian_blur(&p, 1.4);
        assert!(b.data().iter().all(|v| (v - 77.0).abs() < 1e-9));
    }

    #[test]
    fn canny_constant_is_empty() {
        let e = canny_edges(&grey(32, 32, |_, _| 200), &EdgeParams::default()).unwrap();
        assert!(e.samples().iter().all(|&v| v == 0));
        assert_eq!(e.model(), ColourModel::Edge);
    }

    #[test]
    fn canny_output_is_binary() {
        let img = grey(40, 30, |x, y| ((x * 37 + y * 91) % 256) as u8);
        let e = canny_edges(&img, &EdgeParams::default()).unwrap();
        assert!(e.samples().iter().all(|&v| v == 0 || v == 255));
        assert!(e.samples().contains(&255));
    }

    #[test]
    fn canny_thresholds_above_max() {
        let img = grey(64, 64, |x, y| {
            if (22..42).contains(&x) && (22..42).contains(&y) {
                255
            } else {
                0
            }
        });
        let p = EdgeParams {
            low_threshold: 1.5,
            high_threshold: 2.0,
            ..EdgeParams::default()
        };
        let e = canny_edges(&img, &p).unwrap();
        assert!(e.samples().iter().all(|&v| v == 0));
    }

    #[test]
    fn params_validation() {
        let bad = [
            EdgeParams {
                gaussian_sigma: 0.0,
                ..EdgeParams::default()
            },
            EdgeParams {
                low_threshold: 0.3,
                high_threshold: 0.2,
                ..EdgeParams::default()
            },
            EdgeParams {
                low_threshold: 0.0,
                ..EdgeParams::default()
            },
        ];
        for p in bad {
            assert!(matches!(p.validate(), Err(Error::InvalidParams(_))));
        }
        EdgeParams::default().validate().unwrap();
    }

    #[test]
    fn shape_dataset_passes_depth_through() {
        let rgb = RasterImage::rgb_from_fn(16, 16, |_, _| [0, 0, 0]);
        let depth = DepthMap::from_fn(16, 16, DepthConvention::UnitReal, |x, y| {
            (x + y) as f64 / 32.0
        })
        .unwrap();
        let pair = SamplePair::new("b", rgb, depth.clone()).unwrap();
        let (edges, d) = shape_dataset(&pair, &EdgeParams::default()).unwrap();
        assert_eq!(d, depth);
        assert!(edges.samples().iter().all(|&v| v == 0));
    }
}
