//! Depth metrics (threshold accuracies a1..a3, log10, rel, rmse), report
//! aggregation and simple non-learned baseline predictors.
//!
//! Metrics are computed on normalized depth: both maps are converted to the
//! [0,1] convention first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{to_greyscale, DepthConvention, DepthMap, RasterImage, SamplePair};

/// Pixels that take part in metric computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidMask {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl ValidMask {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "mask of {} for {width}x{height}",
                mask.len()
            )));
        }
        Ok(Self {
            width,
            height,
            mask,
        })
    }

    pub fn all(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            mask: vec![true; width * height],
        }
    }

    /// Excludes pixels without ground truth (depth 0).
    pub fn from_gt(gt: &DepthMap) -> Self {
        Self {
            width: gt.width(),
            height: gt.height(),
            mask: gt.values().iter().map(|&v| v > 0.0).collect(),
        }
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn get(&self, i: usize) -> bool {
        self.mask[i]
    }
}

/// Running sums from which every metric can be recomputed; summing these
/// across images gives the pixel-pooled metrics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSums {
    pub pixels: u64,
    pub a1_hits: u64,
    pub a2_hits: u64,
    pub a3_hits: u64,
    pub abs_rel: f64,
    pub sq_err: f64,
    pub abs_log10: f64,
}

impl MetricSums {
    fn add(&mut self, other: &MetricSums) {
        self.pixels += other.pixels;
        self.a1_hits += other.a1_hits;
        self.a2_hits += other.a2_hits;
        self.a3_hits += other.a3_hits;
        self.abs_rel += other.abs_rel;
        self.sq_err += other.sq_err;
        self.abs_log10 += other.abs_log10;
    }

    fn report(&self, image_count: usize) -> MetricsReport {
        let n = self.pixels as f64;
        MetricsReport {
            a1: 100.0 * self.a1_hits as f64 / n,
            a2: 100.0 * self.a2_hits as f64 / n,
            a3: 100.0 * self.a3_hits as f64 / n,
            log10_err: self.abs_log10 / n,
            rel: self.abs_rel / n,
            rmse: (self.sq_err / n).sqrt(),
            pixel_count: self.pixels as usize,
            image_count,
            sums: *self,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Percent of pixels with `max(pred/gt, gt/pred) < 1.25`.
    pub a1: f64,
    /// Same with 1.25².
    pub a2: f64,
    /// Same with 1.25³.
    pub a3: f64,
    pub log10_err: f64,
    pub rel: f64,
    pub rmse: f64,
    pub pixel_count: usize,
    pub image_count: usize,
    pub sums: MetricSums,
}

impl MetricsReport {
    /// Values in report column order: a1, a2, a3, log10, rel, rmse.
    pub fn values(&self) -> [f64; 6] {
        [
            self.a1,
            self.a2,
            self.a3,
            self.log10_err,
            self.rel,
            self.rmse,
        ]
    }
}

const T1: f64 = 1.25;
const T2: f64 = 1.25 * 1.25;
const T3: f64 = 1.25 * 1.25 * 1.25;

pub fn compute_metrics(pred: &DepthMap, gt: &DepthMap, mask: &ValidMask) -> Result<MetricsReport> {
    if pred.dims() != gt.dims() {
        return Err(Error::dims(gt.dims(), pred.dims()));
    }
    if (mask.width, mask.height) != gt.dims() {
        return Err(Error::dims(gt.dims(), (mask.width, mask.height)));
    }
    let pred = pred.to_unit();
    let gt = gt.to_unit();
    let mut sums = MetricSums::default();
    for (i, (&p, &g)) in pred.values().iter().zip(gt.values()).enumerate() {
        if !mask.get(i) {
            continue;
        }
        if g <= 0.0 {
            return Err(Error::NonPositiveDepth { index: i, value: g });
        }
        if p <= 0.0 {
            return Err(Error::NonPositiveDepth { index: i, value: p });
        }
        let ratio = (p / g).max(g / p);
        sums.pixels += 1;
        sums.a1_hits += u64::from(ratio < T1);
        sums.a2_hits += u64::from(ratio < T2);
        sums.a3_hits += u64::from(ratio < T3);
        sums.abs_rel += (p - g).abs() / g;
        sums.sq_err += (p - g) * (p - g);
        sums.abs_log10 += (p.log10() - g.log10()).abs();
    }
    if sums.pixels == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(sums.report(1))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Mean of per-image metrics, with their population standard deviation.
    #[default]
    ImageMean,
    /// Metrics recomputed over all pixels of all images.
    PixelPooled,
}

/// Population standard deviation of each per-image metric.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricStd {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub log10_err: f64,
    pub rel: f64,
    pub rmse: f64,
}

impl MetricStd {
    pub fn values(&self) -> [f64; 6] {
        [
            self.a1,
            self.a2,
            self.a3,
            self.log10_err,
            self.rel,
            self.rmse,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub mode: Aggregation,
    pub report: MetricsReport,
    pub std: MetricStd,
}

pub const CSV_HEADER: &str =
    "feature,a1,a2,a3,log10,rel,rmse,a1_std,a2_std,a3_std,log10_std,rel_std,rmse_std";

impl AggregateReport {
    /// One CSV line (no newline) in [`CSV_HEADER`] order.
    pub fn csv_row(&self, feature: &str) -> String {
        let mut fields = vec![feature.to_string()];
        fields.extend(self.report.values().iter().map(|v| format!("{v:.6}")));
        fields.extend(self.std.values().iter().map(|v| format!("{v:.6}")));
        fields.join(",")
    }
}

pub fn aggregate_reports(
    per_image: &[MetricsReport],
    mode: Aggregation,
) -> Result<AggregateReport> {
    if per_image.is_empty() {
        return Err(Error::EmptyInput("metrics reports"));
    }
    let n = per_image.len() as f64;
    let column = |k: usize| per_image.iter().map(move |r| r.values()[k]);
    let mean = |k: usize| column(k).sum::<f64>() / n;
    let std = |k: usize| {
        let m = mean(k);
        (column(k).map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt()
    };
    let mut pooled = MetricSums::default();
    per_image.iter().for_each(|r| pooled.add(&r.sums));
    let image_count = per_image.iter().map(|r| r.image_count).sum();

    let report = match mode {
        Aggregation::PixelPooled => pooled.report(image_count),
        Aggregation::ImageMean => MetricsReport {
            a1: mean(0),
            a2: mean(1),
            a3: mean(2),
            log10_err: mean(3),
            rel: mean(4),
            rmse: mean(5),
            pixel_count: pooled.pixels as usize,
            image_count,
            sums: pooled,
        },
    };
    Ok(AggregateReport {
        mode,
        report,
        std: MetricStd {
            a1: std(0),
            a2: std(1),
            a3: std(2),
            log10_err: std(3),
            rel: std(4),
            rmse: std(5),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum BaselineKind {
    GlobalMean,
    RowPrior,
    PatchKnn { patch: usize },
}

#[derive(Debug, Clone)]
enum Fitted {
    GlobalMean(f64),
    RowPrior(Vec<f64>),
    PatchKnn {
        patch: usize,
        features: Vec<f64>,
        depth_means: Vec<f64>,
    },
}

/// Non-learned depth predictor fitted on training pairs.
#[derive(Debug, Clone)]
pub struct Baseline {
    kind: BaselineKind,
    state: Option<Fitted>,
}

/// Top-left corners of `patch`-sized windows covering `len`; the last window
/// is pulled back to fit when `len` is not a multiple of `patch`.
fn window_starts(len: usize, patch: usize) -> Vec<usize> {
    let mut starts: Vec<usize> = (0..len / patch).map(|i| i * patch).collect();
    if !len.is_multiple_of(patch) {
        starts.push(len - patch);
    }
    starts
}

fn patch_feature(grey: &RasterImage, x0: usize, y0: usize, patch: usize, out: &mut Vec<f64>) {
    for y in y0..y0 + patch {
        for x in x0..x0 + patch {
            out.push(f64::from(grey.pixel(x, y)[0]));
        }
    }
}

fn grey_of(input: &RasterImage) -> Result<RasterImage> {
    match input.channels() {
        3 => to_greyscale(input),
        _ => Ok(input.clone()),
    }
}

impl Baseline {
    pub fn new(kind: BaselineKind) -> Self {
        Self { kind, state: None }
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    pub fn is_fitted(&self) -> bool {
        self.state.is_some()
    }

    pub fn fit(&mut self, train: &[SamplePair]) -> Result<()> {
        let first = train.first().ok_or(Error::EmptyInput("training pairs"))?;
        let state = match self.kind {
            BaselineKind::GlobalMean => {
                let (mut sum, mut n) = (0.0, 0usize);
                for p in train {
                    for &v in p.depth.to_unit().values().iter().filter(|&&v| v > 0.0) {
                        sum += v;
                        n += 1;
                    }
                }
                Fitted::GlobalMean(if n == 0 { 0.0 } else { sum / n as f64 })
            }
            BaselineKind::RowPrior => {
                let rows = first.depth.height();
                let mut sums = vec![0.0; rows];
                let mut counts = vec![0usize; rows];
                for p in train {
                    let d = p.depth.to_unit();
                    for y in 0..d.height() {
                        let r = y * rows / d.height();
                        for x in 0..d.width() {
                            sums[r] += d.get(x, y);
                            counts[r] += 1;
                        }
                    }
                }
                Fitted::RowPrior(
                    sums.iter()
                        .zip(&counts)
                        .map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
                        .collect(),
                )
            }
            BaselineKind::PatchKnn { patch } => {
                if patch == 0 {
                    return Err(Error::InvalidParams("patch size 0".into()));
                }
                let mut features = Vec::new();
                let mut depth_means = Vec::new();
                for p in train {
                    let (w, h) = p.dims();
                    if patch > w.min(h) {
                        return Err(Error::PatchTooLarge {
                            patch,
                            width: w,
                            height: h,
                        });
                    }
                    let grey = to_greyscale(&p.rgb)?;
                    let depth = p.depth.to_unit();
                    for &y0 in &window_starts(h, patch) {
                        for &x0 in &window_starts(w, patch) {
                            patch_feature(&grey, x0, y0, patch, &mut features);
                            let mut s = 0.0;
                            for y in y0..y0 + patch {
                                for x in x0..x0 + patch {
                                    s += depth.get(x, y);
                                }
                            }
                            depth_means.push(s / (patch * patch) as f64);
                        }
                    }
                }
                Fitted::PatchKnn {
                    patch,
                    features,
                    depth_means,
                }
            }
        };
        self.state = Some(state);
        Ok(())
    }

    /// Predicted depth in the [0,1] convention.
    pub fn predict(&self, input: &RasterImage) -> Result<DepthMap> {
        let state = self.state.as_ref().ok_or(Error::NotFitted)?;
        let (w, h) = (input.width(), input.height());
        match state {
            Fitted::GlobalMean(m) => DepthMap::from_fn(w, h, DepthConvention::UnitReal, |_, _| *m),
            Fitted::RowPrior(rows) => {
                let n = rows.len();
                DepthMap::from_fn(w, h, DepthConvention::UnitReal, |_, y| rows[y * n / h])
            }
            Fitted::PatchKnn {
                patch,
                features,
                depth_means,
            } => {
                let patch = *patch;
                if patch > w.min(h) {
                    return Err(Error::PatchTooLarge {
                        patch,
                        width: w,
                        height: h,
                    });
                }
                let grey = grey_of(input)?;
                let dim = patch * patch;
                let mut values = vec![0.0; w * h];
                let mut query = Vec::with_capacity(dim);
                for &y0 in &window_starts(h, patch) {
                    for &x0 in &window_starts(w, patch) {
                        query.clear();
                        patch_feature(&grey, x0, y0, patch, &mut query);
                        let mut best = (f64::INFINITY, 0usize);
                        for (k, f) in features.chunks_exact(dim).enumerate() {
                            let d: f64 = f.iter().zip(&query).map(|(a, b)| (a - b) * (a - b)).sum();
                            if d < best.0 {
                                best = (d, k);
                            }
                        }
                        let m = depth_means[best.1];
                        for y in y0..y0 + patch {
                            for x in x0..x0 + patch {
                                values[y * w + x] = m;
                            }
                        }
                    }
                }
                DepthMap::new(w, h, DepthConvention::UnitReal, values)
            }
        }
    }
}

/// Predicts with a fitted baseline.
pub fn baseline_predict(input: &RasterImage, model: &Baseline) -> Result<DepthMap> {
    model.predict(input)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(values: &[f64]) -> DepthMap {
        DepthMap::new(values.len(), 1, DepthConvention::UnitReal, values.to_vec()).unwrap()
    }

    fn report(pred: &[f64], gt: &[f64]) -> MetricsReport {
        let g = row(gt);
        compute_metrics(&row(pred), &g, &ValidMask::all(gt.len(), 1)).unwrap()
    }

    #[test]
    fn perfect_prediction() {
        let r = report(&[0.1, 0.5, 0.9], &[0.1, 0.5, 0.9]);
        assert_eq!((r.a1, r.a2, r.a3), (100.0, 100.0, 100.0));
        assert_eq!((r.rel, r.rmse, r.log10_err), (0.0, 0.0, 0.0));
    }

    #[test]
    fn hand_worked_example() {
        // Scaled into [0,1]; all reported values except rmse are scale free.
        let k = 0.1;
        let r = report(&[1.2 * k, 2.0 * k, 5.2 * k], &[1.0 * k, 2.0 * k, 4.0 * k]);
        assert!((r.a1 - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(r.a2, 100.0);
        assert!((r.rel - 0.5 / 3.0).abs() < 1e-12);
        assert!((r.rmse / k - (1.48f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((r.log10_err - (1.2f64.log10() + 1.3f64.log10()) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn one_pixel_off_by_1_3() {
        let gt = [0.2, 0.3, 0.4, 0.5, 0.5];
        let mut pred = gt;
        pred[2] *= 1.3;
        let r = report(&pred, &gt);
        assert!((r.a1 - 80.0).abs() < 1e-12);
        assert_eq!(r.a2, 100.0);
    }

    #[test]
    fn mask_and_errors() {
        let gt = row(&[0.0, 0.5]);
        let pred = row(&[0.3, 0.5]);
        let mask = ValidMask::from_gt(&gt);
        assert_eq!(mask.count(), 1);
        assert_eq!(compute_metrics(&pred, &gt, &mask).unwrap().pixel_count, 1);
        assert!(matches!(
            compute_metrics(&pred, &gt, &ValidMask::all(2, 1)),
            Err(Error::NonPositiveDepth { index: 0, .. })
        ));
        let none = ValidMask::new(2, 1, vec![false, false]).unwrap();
        assert!(matches!(
            compute_metrics(&pred, &gt, &none),
            Err(Error::EmptyMask)
        ));
        assert!(matches!(
            compute_metrics(&row(&[0.5]), &gt, &mask),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mixed_conventions_compare_on_unit_scale() {
        let gt = DepthMap::new(2, 1, DepthConvention::U8, vec![51.0, 102.0]).unwrap();
        let pred = row(&[0.2, 0.4]);
        let r = compute_metrics(&pred, &gt, &ValidMask::all(2, 1)).unwrap();
        assert!(r.rmse < 1e-12);
    }

    #[test]
    fn aggregation_examples() {
        let a = report(&[0.5], &[0.5]);
        let single = aggregate_reports(std::slice::from_ref(&a), Aggregation::ImageMean).unwrap();
        assert_eq!(single.report.values(), a.values());
        assert_eq!(single.std.values(), [0.0; 6]);

        let two = aggregate_reports(&[a.clone(), a.clone()], Aggregation::ImageMean).unwrap();
        assert_eq!(two.report.values(), a.values());
        assert_eq!(two.std.values(), [0.0; 6]);
        assert_eq!(two.report.image_count, 2);

        let mut r40 = a.clone();
        r40.a1 = 40.0;
        let mut r60 = a.clone();
        r60.a1 = 60.0;
        let agg = aggregate_reports(&[r40, r60], Aggregation::ImageMean).unwrap();
        assert_eq!(agg.report.a1, 50.0);
        assert_eq!(agg.std.a1, 10.0);

        assert!(matches!(
            aggregate_reports(&[], Aggregation::ImageMean),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn pooled_weights_by_pixel() {
        // image A: 1 pixel, off by 1.3; image B: 3 exact pixels
        let a = report(&[0.13], &[0.1]);
        let b = report(&[0.2, 0.3, 0.4], &[0.2, 0.3, 0.4]);
        let pooled = aggregate_reports(&[a.clone(), b.clone()], Aggregation::PixelPooled).unwrap();
        assert!((pooled.report.a1 - 75.0).abs() < 1e-12);
        let mean = aggregate_reports(&[a, b], Aggregation::ImageMean).unwrap();
        assert!((mean.report.a1 - 50.0).abs() < 1e-12);
        assert_eq!(pooled.report.pixel_count, 4);
    }

    #[test]
    fn csv_row_order() {
        let a = report(&[0.5], &[0.5]);
        let agg = aggregate_reports(&[a], Aggregation::ImageMean).unwrap();
        let line = agg.csv_row("rgb");
        assert_eq!(line.split(',').count(), CSV_HEADER.split(',').count());
        assert!(line.starts_with("rgb,100.000000,100.000000,100.000000,0.000000"));
    }

    fn pair(
        w: usize,
        h: usize,
        f: impl Fn(usize, usize) -> f64,
        img: impl FnMut(usize, usize) -> [u8; 3],
    ) -> SamplePair {
        SamplePair::new(
            "p",
            RasterImage::rgb_from_fn(w, h, img),
            DepthMap::from_fn(w, h, DepthConvention::UnitReal, f).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn global_mean_baseline() {
        let train = [pair(4, 4, |_, _| 0.5, |_, _| [1, 2, 3])];
        let mut b = Baseline::new(BaselineKind::GlobalMean);
        assert!(matches!(b.predict(&train[0].rgb), Err(Error::NotFitted)));
        b.fit(&train).unwrap();
        let d = baseline_predict(&train[0].rgb, &b).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn row_prior_recovers_row_law() {
        let h = 12;
        let law = move |_: usize, y: usize| (y + 1) as f64 / (h + 1) as f64;
        let train: Vec<_> = (0..3)
            .map(|i| pair(8, h, law, move |x, _| [(x * i) as u8, 0, 0]))
            .collect();
        let mut b = Baseline::new(BaselineKind::RowPrior);
        b.fit(&train).unwrap();
        let test = pair(8, h, law, |x, y| [(x + y) as u8, 9, 9]);
        let pred = b.predict(&test.rgb).unwrap();
        for (p, g) in pred.values().iter().zip(test.depth.values()) {
            assert!((p - g).abs() < 1e-12);
        }
    }

    #[test]
    fn patch_knn_with_duplicate_reconstructs_patch_means() {
        use rand::Rng;
        let mut rng = crate::seed::rng(4);
        let (w, h, p) = (16, 12, 4);
        let img: Vec<[u8; 3]> = (0..w * h)
            .map(|_| [rng.random(), rng.random(), rng.random()])
            .collect();
        let depth: Vec<f64> = (0..w * h).map(|_| rng.random_range(0.05..1.0)).collect();
        let test = pair(w, h, |x, y| depth[y * w + x], |x, y| img[y * w + x]);
        let other = pair(w, h, |_, _| 0.9, |x, y| [(x * 7) as u8, (y * 5) as u8, 1]);
        let mut b = Baseline::new(BaselineKind::PatchKnn { patch: p });
        b.fit(&[other, test.clone()]).unwrap();
        let pred = b.predict(&test.rgb).unwrap();
        for by in 0..h / p {
            for bx in 0..w / p {
                let mut mean = 0.0;
                for y in by * p..(by + 1) * p {
                    for x in bx * p..(bx + 1) * p {
                        mean += test.depth.get(x, y);
                    }
                }
                mean /= (p * p) as f64;
                for y in by * p..(by + 1) * p {
                    for x in bx * p..(bx + 1) * p {
                        assert!((pred.get(x, y) - mean).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn window_starts_cover() {
        assert_eq!(window_starts(12, 4), vec![0, 4, 8]);
        assert_eq!(window_starts(10, 4), vec![0, 4, 6]);
    }
}
