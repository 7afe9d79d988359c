//! Statistical analyses of saturation and colour against depth, and the
//! scramble / add-noise / restore experiment.

use rand::seq::index::sample;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::colorspace::{extract_hsv, saturation_plane};
use crate::error::{Error, Result};
use crate::imgcore::{ColourModel, Plane, RasterImage, SamplePair, SampleRange};
use crate::seed;
use crate::spectral::{phase_scramble, unscramble_image, ScrambleRecord};

/// Per-bin means of some quantity; `means[i]` is `None` for empty bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedProfile {
    pub bin_edges: Vec<f64>,
    pub means: Vec<Option<f64>>,
    pub counts: Vec<u64>,
}

impl BinnedProfile {
    fn from_sums(bin_edges: Vec<f64>, sums: &[f64], counts: Vec<u64>) -> Self {
        let means = sums
            .iter()
            .zip(&counts)
            .map(|(s, &c)| (c > 0).then(|| s / c as f64))
            .collect();
        Self {
            bin_edges,
            means,
            counts,
        }
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Count-weighted merge of two profiles over the same bins.
    pub fn merge(&self, other: &BinnedProfile) -> Result<BinnedProfile> {
        if self.bin_edges != other.bin_edges {
            return Err(Error::InvalidParams("profiles have different bins".into()));
        }
        let sums: Vec<f64> =
            [self, other]
                .iter()
                .fold(vec![0.0; self.counts.len()], |mut acc, p| {
                    for (i, (m, &c)) in p.means.iter().zip(&p.counts).enumerate() {
                        acc[i] += m.unwrap_or(0.0) * c as f64;
                    }
                    acc
                });
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::from_sums(self.bin_edges.clone(), &sums, counts))
    }

    /// `lower,upper,count,mean` rows; empty bins leave `mean` blank.
    pub fn to_csv(&self, label: &str) -> String {
        let mut out = format!("{label}_lower,{label}_upper,count,mean\n");
        for i in 0..self.counts.len() {
            let mean = self.means[i].map(|m| format!("{m:.6}")).unwrap_or_default();
            out.push_str(&format!(
                "{:.4},{:.4},{},{}\n",
                self.bin_edges[i],
                self.bin_edges[i + 1],
                self.counts[i],
                mean
            ));
        }
        out
    }
}

/// Equal-width bin of a depth on the [0,255] scale; 255 lands in the last bin.
pub fn depth_bin(depth_0_255: f64, n_bins: usize) -> usize {
    ((depth_0_255 * n_bins as f64 / 255.0).floor() as usize).min(n_bins - 1)
}

/// Mean saturation per equal-width depth interval of [0,255].
pub fn saturation_by_depth(pairs: &[SamplePair], n_bins: usize) -> Result<BinnedProfile> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("sample pairs"));
    }
    if n_bins == 0 {
        return Err(Error::InvalidParams("n_bins must be at least 1".into()));
    }
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0u64; n_bins];
    for pair in pairs {
        let s = saturation_plane(&pair.rgb)?;
        for (d, &sat) in pair.depth.scaled_0_255().zip(s.data()) {
            let b = depth_bin(d, n_bins);
            sums[b] += sat;
            counts[b] += 1;
        }
    }
    let edges = (0..=n_bins)
        .map(|i| 255.0 * i as f64 / n_bins as f64)
        .collect();
    Ok(BinnedProfile::from_sums(edges, &sums, counts))
}

/// Mean saturation of horizontal bands, top to bottom. Every band is
/// `height / n_rows` rows tall except the last, which takes the remainder.
pub fn row_saturation_profile(img: &RasterImage, n_rows: usize) -> Result<BinnedProfile> {
    let h = img.height();
    if n_rows == 0 || n_rows > h {
        return Err(Error::TooManyRows {
            rows: n_rows,
            height: h,
        });
    }
    let s = saturation_plane(img)?;
    let band = h / n_rows;
    let mut sums = vec![0.0; n_rows];
    let mut counts = vec![0u64; n_rows];
    for y in 0..h {
        let b = (y / band).min(n_rows - 1);
        for x in 0..img.width() {
            sums[b] += s.get(x, y);
            counts[b] += 1;
        }
    }
    let edges = (0..=n_rows)
        .map(|i| {
            if i == n_rows {
                h as f64
            } else {
                (i * band) as f64
            }
        })
        .collect();
    Ok(BinnedProfile::from_sums(edges, &sums, counts))
}

/// Bin of an 8-bit value using bins of width `ceil(256 / value_bins)`; the
/// last bin absorbs whatever is left.
pub fn value_bin(v: u8, value_bins: usize) -> usize {
    let step = 256usize.div_ceil(value_bins);
    (usize::from(v) / step).min(value_bins - 1)
}

/// Joint (depth bin, value bin) pixel counts for each RGB channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeatmapTable {
    pub depth_bins: usize,
    pub value_bins: usize,
    /// Indexed `(depth * value_bins + value) * 3 + channel`.
    pub counts: Vec<u64>,
}

impl HeatmapTable {
    pub fn new(depth_bins: usize, value_bins: usize) -> Self {
        Self {
            depth_bins,
            value_bins,
            counts: vec![0; depth_bins * value_bins * 3],
        }
    }

    pub fn get(&self, depth: usize, value: usize, channel: usize) -> u64 {
        self.counts[(depth * self.value_bins + value) * 3 + channel]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge(&mut self, other: &HeatmapTable) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    /// Long-format CSV: `depth_bin,value_bin,r,g,b`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("depth_bin,value_bin,r,g,b\n");
        for d in 0..self.depth_bins {
            for v in 0..self.value_bins {
                out.push_str(&format!(
                    "{d},{v},{},{},{}\n",
                    self.get(d, v, 0),
                    self.get(d, v, 1),
                    self.get(d, v, 2)
                ));
            }
        }
        out
    }
}

pub const DEFAULT_HEATMAP_DEPTH_BINS: usize = 10;
pub const DEFAULT_HEATMAP_VALUE_BINS: usize = 26;

pub fn rgb_depth_heatmap(
    pairs: &[SamplePair],
    depth_bins: usize,
    value_bins: usize,
) -> Result<HeatmapTable> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("sample pairs"));
    }
    if depth_bins == 0 || value_bins == 0 {
        return Err(Error::InvalidParams(
            "heatmap needs at least one bin per axis".into(),
        ));
    }
    let mut table = HeatmapTable::new(depth_bins, value_bins);
    for pair in pairs {
        for (d, px) in pair
            .depth
            .scaled_0_255()
            .zip(pair.rgb.samples().chunks_exact(3))
        {
            let db = depth_bin(d, depth_bins);
            for (c, &v) in px.iter().enumerate() {
                table.counts[(db * value_bins + value_bin(v, value_bins)) * 3 + c] += 1;
            }
        }
    }
    Ok(table)
}

/// Seeded choice of up to `count` ids, returned in their input order.
pub fn sample_ids(ids: &[String], count: usize, seed: u64) -> Vec<String> {
    if count >= ids.len() {
        return ids.to_vec();
    }
    let mut picked = sample(&mut seed::rng(seed), ids.len(), count).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| ids[i].clone()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseRegion {
    Whole,
    /// Centered rectangle of half the width and half the height.
    Central,
}

/// `(left, top, width, height)` of the region receiving noise.
pub fn noise_region(
    width: usize,
    height: usize,
    region: NoiseRegion,
) -> (usize, usize, usize, usize) {
    match region {
        NoiseRegion::Whole => (0, 0, width, height),
        NoiseRegion::Central => {
            let (rw, rh) = (width / 2, height / 2);
            ((width - rw) / 2, (height - rh) / 2, rw, rh)
        }
    }
}

#[derive(Debug, Clone)]
pub struct NoiseOutcome {
    pub scrambled: RasterImage,
    pub noisy: RasterImage,
    pub restored: RasterImage,
    /// Per-channel RMSE of restored against the original, 0-255 scale.
    pub rmse_per_channel: [f64; 3],
    /// RMSE over all channels.
    pub rmse: f64,
    /// L2 norm of the noise actually injected (after rounding and clamping).
    pub injected_norm: f64,
    pub noisy_pixels: usize,
}

/// Scrambles the RGB image, adds seeded Gaussian noise to the 8-bit
/// scrambled image (whole image or central region), re-clamps, restores
/// with the same record and measures the damage.
pub fn noise_experiment(
    pair: &SamplePair,
    record: &ScrambleRecord,
    sigma: f64,
    region: NoiseRegion,
    noise_seed: u64,
) -> Result<NoiseOutcome> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParams(format!("sigma {sigma}")));
    }
    let channels = (0..3)
        .map(|c| phase_scramble(&pair.rgb.channel(c), record))
        .collect::<Result<Vec<_>>>()?;
    let scrambled = RasterImage::from_planes(&channels, ColourModel::Rgb)?;

    let (w, h) = pair.dims();
    let (left, top, rw, rh) = noise_region(w, h, region);
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let mut rng = seed::rng(noise_seed);
    let mut noisy = scrambled.samples().to_vec();
    for y in top..top + rh {
        for x in left..left + rw {
            for c in 0..3 {
                let i = (y * w + x) * 3 + c;
                let n: f64 = normal.sample(&mut rng);
                noisy[i] = (f64::from(noisy[i]) + n).round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    let injected_norm = noisy
        .iter()
        .zip(scrambled.samples())
        .map(|(&a, &b)| (f64::from(a) - f64::from(b)).powi(2))
        .sum::<f64>()
        .sqrt();
    let noisy = RasterImage::new(w, h, 3, ColourModel::Rgb, noisy)?;
    let restored = unscramble_image(&noisy, record)?;

    let mut sq = [0.0; 3];
    for (i, (&a, &b)) in restored
        .samples()
        .iter()
        .zip(pair.rgb.samples())
        .enumerate()
    {
        sq[i % 3] += (f64::from(a) - f64::from(b)).powi(2);
    }
    let n = (w * h) as f64;
    let rmse_per_channel = sq.map(|s| (s / n).sqrt());
    let rmse = (sq.iter().sum::<f64>() / (3.0 * n)).sqrt();
    Ok(NoiseOutcome {
        scrambled,
        noisy,
        restored,
        rmse_per_channel,
        rmse,
        injected_norm,
        noisy_pixels: rw * rh,
    })
}

/// Demonstration only: scrambles the hue plane (as a fraction of a turn)
/// and returns it. Hue is circular, so the result shows the blocky
/// discontinuities that keep hue out of the cue datasets.
pub fn hue_scramble_demo(img: &RasterImage, record: &ScrambleRecord) -> Result<Plane> {
    let hsv = extract_hsv(img)?;
    let (w, h) = hsv.h.dims();
    let turns = Plane::new(
        w,
        h,
        SampleRange::Unit,
        hsv.h.data().iter().map(|d| d / 360.0).collect(),
    )?;
    phase_scramble(&turns, record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::{DepthConvention, DepthMap};
    use crate::spectral::make_record;

    fn pair_with(
        w: usize,
        h: usize,
        rgb: impl FnMut(usize, usize) -> [u8; 3],
        depth: impl FnMut(usize, usize) -> f64,
    ) -> SamplePair {
        SamplePair::new(
            "t",
            RasterImage::rgb_from_fn(w, h, rgb),
            DepthMap::from_fn(w, h, DepthConvention::U8, depth).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn constant_saturation_in_every_bin() {
        // (250, 150, 200): S = 100/250 = 0.4
        let p = pair_with(
            16,
            16,
            |_, _| [250, 150, 200],
            |x, y| ((x + 16 * y) % 256) as f64,
        );
        let prof = saturation_by_depth(&[p], 8).unwrap();
        assert_eq!(prof.means.len(), 8);
        assert_eq!(prof.bin_edges.len(), 9);
        for m in prof.means.iter().flatten() {
            assert!((m - 0.4).abs() < 1e-12);
        }
        assert_eq!(prof.total_count(), 256);
    }

    #[test]
    fn empty_bins_have_no_mean() {
        let p = pair_with(4, 4, |_, _| [10, 20, 30], |_, _| 0.0);
        let prof = saturation_by_depth(&[p], 4).unwrap();
        assert!(prof.means[0].is_some());
        assert!(prof.means[1..].iter().all(Option::is_none));
        assert!(prof
            .to_csv("depth")
            .lines()
            .nth(2)
            .unwrap()
            .ends_with(",0,"));
    }

    #[test]
    fn saturation_by_depth_errors() {
        assert!(matches!(
            saturation_by_depth(&[], 8),
            Err(Error::EmptyInput(_))
        ));
        let p = pair_with(2, 2, |_, _| [1, 2, 3], |_, _| 1.0);
        assert!(saturation_by_depth(&[p], 0).is_err());
    }

    #[test]
    fn depth_bins_cover_range() {
        assert_eq!(depth_bin(0.0, 8), 0);
        assert_eq!(depth_bin(255.0, 8), 7);
        assert_eq!(depth_bin(31.87, 8), 0);
        assert_eq!(depth_bin(31.875, 8), 1);
    }

    #[test]
    fn row_profile_band_heights() {
        let img = RasterImage::rgb_from_fn(4, 480, |_, _| [200, 100, 50]);
        let prof = row_saturation_profile(&img, 10).unwrap();
        assert!(prof.counts.iter().all(|&c| c == 48 * 4));
        assert!(prof.means.iter().all(|m| m.unwrap() == 0.75));
        assert_eq!(prof.bin_edges[1], 48.0);

        let odd = RasterImage::rgb_from_fn(2, 23, |_, _| [1, 1, 1]);
        let prof = row_saturation_profile(&odd, 10).unwrap();
        assert_eq!(prof.counts[..9], [4; 9]);
        assert_eq!(prof.counts[9], 10);
        assert_eq!(*prof.bin_edges.last().unwrap(), 23.0);
    }

    #[test]
    fn row_profile_too_many_rows() {
        let img = RasterImage::rgb_from_fn(2, 5, |_, _| [1, 1, 1]);
        assert!(matches!(
            row_saturation_profile(&img, 6),
            Err(Error::TooManyRows { rows: 6, height: 5 })
        ));
    }

    #[test]
    fn heatmap_single_cell() {
        let p = pair_with(
            2,
            2,
            |x, y| [(x * 9) as u8, (y * 3) as u8, 200],
            |_, _| 100.0,
        );
        let t = rgb_depth_heatmap(&[p], 1, 1).unwrap();
        assert_eq!((t.get(0, 0, 0), t.get(0, 0, 1), t.get(0, 0, 2)), (4, 4, 4));
    }

    #[test]
    fn heatmap_zero_red() {
        let p = pair_with(5, 3, |x, _| [0, x as u8, 9], |x, _| (x * 50) as f64);
        let t = rgb_depth_heatmap(&[p], 4, 256).unwrap();
        let red_total: u64 = (0..4).map(|d| t.get(d, 0, 0)).sum();
        assert_eq!(red_total, 15);
        assert_eq!(t.total(), 45);
    }

    #[test]
    fn value_bins_default_step() {
        assert_eq!(value_bin(0, 26), 0);
        assert_eq!(value_bin(9, 26), 0);
        assert_eq!(value_bin(10, 26), 1);
        assert_eq!(value_bin(255, 26), 25);
        assert_eq!(value_bin(255, 256), 255);
        assert_eq!(value_bin(255, 1), 0);
        assert_eq!(value_bin(255, 3), 2);
    }

    #[test]
    fn sampling_is_seeded() {
        let ids: Vec<String> = (0..50).map(|i| format!("{i}")).collect();
        let a = sample_ids(&ids, 10, 3);
        assert_eq!(a.len(), 10);
        assert_eq!(a, sample_ids(&ids, 10, 3));
        assert_ne!(a, sample_ids(&ids, 10, 4));
        assert_eq!(sample_ids(&ids, 500, 3).len(), 50);
    }

    #[test]
    fn central_region_geometry() {
        assert_eq!(
            noise_region(640, 480, NoiseRegion::Central),
            (160, 120, 320, 240)
        );
        assert_eq!(noise_region(7, 5, NoiseRegion::Central), (2, 1, 3, 2));
        assert_eq!(noise_region(7, 5, NoiseRegion::Whole), (0, 0, 7, 5));
    }

    #[test]
    fn central_noise_touches_only_region() {
        let p = pair_with(
            32,
            24,
            |x, y| [(x * 7) as u8, (y * 9) as u8, 128],
            |_, _| 5.0,
        );
        let r = make_record(2, 24, 32).unwrap();
        let out = noise_experiment(&p, &r, 25.0, NoiseRegion::Central, 9).unwrap();
        assert_eq!(out.noisy_pixels, 16 * 12);
        let (l, t, w, h) = noise_region(32, 24, NoiseRegion::Central);
        for y in 0..24 {
            for x in 0..32 {
                let inside = (l..l + w).contains(&x) && (t..t + h).contains(&y);
                if !inside {
                    assert_eq!(out.noisy.pixel(x, y), out.scrambled.pixel(x, y));
                }
            }
        }
        assert!(out.injected_norm > 0.0);
    }

    #[test]
    fn hue_demo_shape() {
        let img = RasterImage::rgb_from_fn(8, 8, |x, _| [255, (x * 30) as u8, 0]);
        let r = make_record(1, 8, 8).unwrap();
        let p = hue_scramble_demo(&img, &r).unwrap();
        assert_eq!(p.dims(), (8, 8));
        assert!(p.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
