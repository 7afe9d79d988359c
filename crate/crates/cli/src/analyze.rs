//! `analyze`: saturation-vs-depth, row saturation, colour/depth heatmap and
//! the scramble/noise/restore experiment, each written as CSV plus JSON.

use std::path::Path;

use anyhow::Context;
use depthcue::analysis::{
    noise_experiment, rgb_depth_heatmap, row_saturation_profile, sample_ids, saturation_by_depth,
    BinnedProfile, HeatmapTable, NoiseRegion,
};
use depthcue::imgcore::{split_dataset, DatasetManifest};
use depthcue::spectral::make_record;
use depthcue::{io, seed, Error, SamplePair};
use rayon::prelude::*;
use serde::Serialize;

use crate::fsutil::{csv_bytes, json_bytes};
use crate::generate::SCRAMBLE_TAG;

pub const HEATMAP_TAG: &str = "heatmap";
pub const NOISE_TAG: &str = "noise";

/// Which manifest entries an analysis runs over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    #[default]
    All,
    Train,
    Test,
}

pub struct Dataset {
    manifest: DatasetManifest,
    subset: Subset,
    ids: Vec<String>,
}

impl Dataset {
    pub fn open(manifest_path: &Path, subset: Subset) -> anyhow::Result<Self> {
        let manifest = DatasetManifest::load(manifest_path)
            .with_context(|| format!("loading manifest {}", manifest_path.display()))?;
        let ids = match subset {
            Subset::All => manifest.entries.iter().map(|e| e.id.clone()).collect(),
            Subset::Train => split_dataset(&manifest)?.train,
            Subset::Test => split_dataset(&manifest)?.test,
        };
        if ids.is_empty() {
            return Err(Error::EmptyDataset(format!("no {subset:?} entries")).into());
        }
        Ok(Self {
            manifest,
            subset,
            ids,
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    fn load(&self, id: &str) -> depthcue::Result<SamplePair> {
        let entry = self
            .manifest
            .entry(id)
            .ok_or_else(|| Error::IdMismatch(format!("{id} not in manifest")))?;
        self.manifest.load_entry(entry)
    }

    /// Per-image results computed in parallel, returned in id order.
    fn map_images<T: Send>(
        &self,
        ids: &[String],
        jobs: usize,
        f: impl Fn(&SamplePair) -> depthcue::Result<T> + Sync,
    ) -> anyhow::Result<Vec<T>> {
        let results: Vec<depthcue::Result<T>> = crate::with_pool(jobs, || {
            ids.par_iter()
                .map(|id| self.load(id).and_then(|p| f(&p)))
                .collect()
        })?;
        ids.iter()
            .zip(results)
            .map(|(id, r)| r.with_context(|| format!("image {id}")))
            .collect()
    }
}

#[derive(Serialize)]
struct ProfileFile<'a> {
    kind: &'static str,
    seed: u64,
    subset: Subset,
    bins: usize,
    image_count: usize,
    profile: &'a BinnedProfile,
}

fn merge_all(profiles: Vec<BinnedProfile>) -> anyhow::Result<BinnedProfile> {
    let mut iter = profiles.into_iter();
    let first = iter.next().context("no profiles")?;
    iter.try_fold(first, |acc, p| acc.merge(&p).map_err(Into::into))
}

fn write_profile(out: &Path, stem: &str, label: &str, file: &ProfileFile) -> anyhow::Result<()> {
    io::write_atomic(
        &out.join(format!("{stem}.csv")),
        file.profile.to_csv(label).as_bytes(),
    )?;
    io::write_atomic(&out.join(format!("{stem}.json")), &json_bytes(file)?)?;
    Ok(())
}

/// Mean saturation per depth bin over the whole subset.
pub fn sat_depth(
    data: &Dataset,
    out: &Path,
    seed: u64,
    bins: usize,
    jobs: usize,
) -> anyhow::Result<BinnedProfile> {
    let profiles = data.map_images(data.ids(), jobs, |p| {
        saturation_by_depth(std::slice::from_ref(p), bins)
    })?;
    let profile = merge_all(profiles)?;
    let file = ProfileFile {
        kind: "sat_depth",
        seed,
        subset: data.subset,
        bins,
        image_count: data.ids().len(),
        profile: &profile,
    };
    write_profile(out, "sat_depth", "depth", &file)?;
    Ok(profile)
}

/// Mean saturation per horizontal band; every image must share one height.
pub fn row_sat(
    data: &Dataset,
    out: &Path,
    seed: u64,
    rows: usize,
    jobs: usize,
) -> anyhow::Result<BinnedProfile> {
    let profiles = data.map_images(data.ids(), jobs, |p| row_saturation_profile(&p.rgb, rows))?;
    let profile = merge_all(profiles).context("row profiles need images of equal height")?;
    let file = ProfileFile {
        kind: "row_sat",
        seed,
        subset: data.subset,
        bins: rows,
        image_count: data.ids().len(),
        profile: &profile,
    };
    write_profile(out, "row_sat", "row", &file)?;
    Ok(profile)
}

#[derive(Serialize)]
struct HeatmapFile<'a> {
    kind: &'static str,
    seed: u64,
    depth_bins: usize,
    value_bins: usize,
    image_count: usize,
    total_count: u64,
    images: &'a [String],
}

/// Colour/depth co-occurrence over a seeded sample of `sample` images.
pub fn heatmap(
    data: &Dataset,
    out: &Path,
    seed: u64,
    depth_bins: usize,
    value_bins: usize,
    sample: usize,
    jobs: usize,
) -> anyhow::Result<HeatmapTable> {
    let ids = sample_ids(
        data.ids(),
        sample,
        seed::derive_seed(seed, HEATMAP_TAG, "sample"),
    );
    let tables = data.map_images(&ids, jobs, |p| {
        rgb_depth_heatmap(std::slice::from_ref(p), depth_bins, value_bins)
    })?;
    let mut table = HeatmapTable::new(depth_bins, value_bins);
    tables.iter().for_each(|t| table.merge(t));
    io::write_atomic(&out.join("heatmap.csv"), table.to_csv().as_bytes())?;
    let file = HeatmapFile {
        kind: "heatmap",
        seed,
        depth_bins,
        value_bins,
        image_count: ids.len(),
        total_count: table.total(),
        images: &ids,
    };
    io::write_atomic(&out.join("heatmap.json"), &json_bytes(&file)?)?;
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseTrial {
    pub trial: usize,
    pub noise_seed: u64,
    pub rmse: f64,
    pub rmse_per_channel: [f64; 3],
    pub injected_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseReport {
    pub kind: &'static str,
    pub seed: u64,
    pub id: String,
    pub sigma: f64,
    pub region: NoiseRegion,
    pub record: String,
    pub noisy_pixels: usize,
    pub rmse_mean: f64,
    pub rmse_min: f64,
    pub rmse_max: f64,
    pub trials: Vec<NoiseTrial>,
}

/// Runs `trials` seeded noise draws on one image (the first of the subset
/// unless `id` is given). Images of the first trial go to `<out>/noise/`.
#[allow(clippy::too_many_arguments)]
pub fn noise(
    data: &Dataset,
    out: &Path,
    seed: u64,
    id: Option<&str>,
    sigma: f64,
    region: NoiseRegion,
    trials: usize,
    jobs: usize,
) -> anyhow::Result<NoiseReport> {
    if trials == 0 {
        return Err(crate::usage("--trials must be at least 1"));
    }
    let id = id.unwrap_or(&data.ids()[0]).to_string();
    let pair = data.load(&id)?;
    let (w, h) = pair.dims();
    let record = make_record(seed::derive_seed(seed, SCRAMBLE_TAG, &id), h, w)?;

    let outcomes = crate::with_pool(jobs, || {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let noise_seed = seed::derive_seed(seed, NOISE_TAG, &format!("{id}#{t}"));
                noise_experiment(&pair, &record, sigma, region, noise_seed).map(|o| (noise_seed, o))
            })
            .collect::<depthcue::Result<Vec<_>>>()
    })??;

    let dir = out.join("noise");
    let first = &outcomes[0].1;
    io::write_raster_png(&dir.join("scrambled.png"), &first.scrambled)?;
    io::write_raster_png(&dir.join("noisy.png"), &first.noisy)?;
    io::write_raster_png(&dir.join("restored.png"), &first.restored)?;

    let trials: Vec<NoiseTrial> = outcomes
        .iter()
        .enumerate()
        .map(|(trial, (noise_seed, o))| NoiseTrial {
            trial,
            noise_seed: *noise_seed,
            rmse: o.rmse,
            rmse_per_channel: o.rmse_per_channel,
            injected_norm: o.injected_norm,
        })
        .collect();
    let rmses = trials.iter().map(|t| t.rmse);
    let report = NoiseReport {
        kind: "noise",
        seed,
        id,
        sigma,
        region,
        record: record.id(),
        noisy_pixels: first.noisy_pixels,
        rmse_mean: rmses.clone().sum::<f64>() / trials.len() as f64,
        rmse_min: rmses.clone().fold(f64::INFINITY, f64::min),
        rmse_max: rmses.fold(f64::NEG_INFINITY, f64::max),
        trials,
    };
    let rows: Vec<Vec<String>> = report
        .trials
        .iter()
        .map(|t| {
            let mut row = vec![
                t.trial.to_string(),
                t.noise_seed.to_string(),
                format!("{:.6}", t.rmse),
            ];
            row.extend(t.rmse_per_channel.iter().map(|v| format!("{v:.6}")));
            row.push(format!("{:.6}", t.injected_norm));
            row
        })
        .collect();
    let csv = csv_bytes(
        &[
            "trial",
            "noise_seed",
            "rmse",
            "rmse_r",
            "rmse_g",
            "rmse_b",
            "injected_norm",
        ],
        &rows,
    )?;
    io::write_atomic(&dir.join("trials.csv"), &csv)?;
    io::write_atomic(&dir.join("report.json"), &json_bytes(&report)?)?;
    eprintln!(
        "noise: {} trials on {}, rmse mean {:.3}",
        report.trials.len(),
        report.id,
        report.rmse_mean
    );
    Ok(report)
}
