//! `generate`: applies one cue transform to every pair of a dataset and
//! lays the result out as `<out>/<feature>/<split>/{images,depths,sidecars}`.

use std::path::{Path, PathBuf};

use anyhow::Context;
use depthcue::edges::{shape_dataset, EdgeParams};
use depthcue::imgcore::{
    split_dataset, to_greyscale, DatasetManifest, ManifestEntry, Split, SplitUnit,
};
use depthcue::spectral::{make_record, scramble_pair, ScrambleMode};
use depthcue::texture::{make_shuffle, shuffle_patches};
use depthcue::{io, seed, DepthMap, RasterImage, SamplePair};
use rayon::prelude::*;
use serde::Serialize;

use crate::fsutil::{json_bytes, write_all_or_nothing};
use crate::sidecar::{
    sidecar_path, EdgeSidecar, IdentitySidecar, SidecarKind, EDGES_VERSION, IDENTITY_VERSION,
};

/// Seed tags mixed with the global seed and the image id.
pub const SCRAMBLE_TAG: &str = "scramble";
pub const SHUFFLE_TAG: &str = "shuffle";

pub const SEED_DERIVATION: &str =
    "first 8 bytes (little-endian) of SHA-256(global seed as u64 LE || ':' || tag || ':' || image id)";

/// The six input conditions, each carrying exactly the parameters it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Feature {
    Rgb,
    RgbScrambled,
    GreyScrambled,
    SaturationScrambled,
    /// Shuffled patches; greyscale unless `colour` is set.
    Texture {
        patch_size: usize,
        colour: bool,
    },
    Shape {
        edges: EdgeParams,
    },
}

impl Feature {
    /// Directory name under the output root.
    pub fn dir_name(&self) -> String {
        match self {
            Feature::Rgb => "rgb".into(),
            Feature::RgbScrambled => "rgb-scrambled".into(),
            Feature::GreyScrambled => "grey-scrambled".into(),
            Feature::SaturationScrambled => "saturation-scrambled".into(),
            Feature::Texture {
                patch_size,
                colour: false,
            } => format!("texture-p{patch_size}"),
            Feature::Texture {
                patch_size,
                colour: true,
            } => format!("texture-rgb-p{patch_size}"),
            Feature::Shape { .. } => "shape".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub manifest: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    /// Worker threads; 0 means one per core.
    pub jobs: usize,
    pub feature: Feature,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerateSummary {
    pub feature_dir: PathBuf,
    pub train: usize,
    pub test: usize,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    feature: &'a Feature,
    directory: String,
    seed: u64,
    seed_derivation: &'static str,
    sidecar_versions: SidecarVersions,
    split: SplitRecord<'a>,
    entries: &'a [ManifestEntry],
}

#[derive(Serialize)]
struct SidecarVersions {
    identity: u32,
    scramble: u32,
    shuffle: u32,
    edges: u32,
}

#[derive(Serialize)]
struct SplitRecord<'a> {
    split_seed: u64,
    test_fraction: f64,
    unit: SplitUnit,
    train: &'a [String],
    test: &'a [String],
}

/// Image, depth and sidecar for one pair under `feature`.
fn transform(
    pair: &SamplePair,
    feature: &Feature,
    global_seed: u64,
) -> depthcue::Result<(RasterImage, DepthMap, SidecarKind, Vec<u8>)> {
    let scrambled = |mode| -> depthcue::Result<_> {
        let (h, w) = (pair.rgb.height(), pair.rgb.width());
        let record = make_record(seed::derive_seed(global_seed, SCRAMBLE_TAG, &pair.id), h, w)?;
        let (image, depth) = scramble_pair(pair, &record, mode)?;
        Ok((
            image.image,
            depth.to_unit(),
            SidecarKind::Scramble,
            json_bytes(&record.sidecar())?,
        ))
    };
    match feature {
        Feature::Rgb => Ok((
            pair.rgb.clone(),
            pair.depth.to_unit(),
            SidecarKind::Identity,
            json_bytes(&IdentitySidecar {
                version: IDENTITY_VERSION,
            })?,
        )),
        Feature::RgbScrambled => scrambled(ScrambleMode::Rgb),
        Feature::GreyScrambled => scrambled(ScrambleMode::Greyscale),
        Feature::SaturationScrambled => scrambled(ScrambleMode::Saturation),
        Feature::Texture { patch_size, colour } => {
            let (h, w) = (pair.rgb.height(), pair.rgb.width());
            let record = make_shuffle(
                seed::derive_seed(global_seed, SHUFFLE_TAG, &pair.id),
                h,
                w,
                *patch_size,
            )?;
            let source = if *colour {
                pair.rgb.clone()
            } else {
                to_greyscale(&pair.rgb)?
            };
            Ok((
                shuffle_patches(&source, &record)?,
                shuffle_patches(&pair.depth.to_unit(), &record)?,
                SidecarKind::Shuffle,
                json_bytes(&record.sidecar())?,
            ))
        }
        Feature::Shape { edges } => {
            let (image, depth) = shape_dataset(pair, edges)?;
            Ok((
                image,
                depth.to_unit(),
                SidecarKind::Edges,
                json_bytes(&EdgeSidecar {
                    version: EDGES_VERSION,
                    params: *edges,
                })?,
            ))
        }
    }
}

fn process(
    manifest: &DatasetManifest,
    entry: &ManifestEntry,
    split_dir: &Path,
    config: &PipelineConfig,
) -> depthcue::Result<()> {
    let pair = manifest.load_entry(entry)?;
    let (image, depth, kind, sidecar) = transform(&pair, &config.feature, config.seed)?;
    let id = &entry.id;
    let files = vec![
        (
            split_dir.join("images").join(format!("{id}.png")),
            io::raster_png_bytes(&image)?,
        ),
        (
            split_dir.join("depths").join(format!("{id}.png")),
            io::depth_png_bytes(&depth)?,
        ),
        (sidecar_path(&split_dir.join("sidecars"), id, kind), sidecar),
    ];
    write_all_or_nothing(&files)
}

pub fn split_name(split: &Split, id: &str) -> &'static str {
    if split.contains_test(id) {
        "test"
    } else {
        "train"
    }
}

pub fn generate(config: &PipelineConfig) -> anyhow::Result<GenerateSummary> {
    if let Feature::Shape { edges } = &config.feature {
        edges.validate()?;
    }
    let manifest = DatasetManifest::load(&config.manifest)
        .with_context(|| format!("loading manifest {}", config.manifest.display()))?;
    manifest.check_files()?;
    let split = split_dataset(&manifest)?;
    let feature_dir = config.out.join(config.feature.dir_name());

    let results: Vec<depthcue::Result<()>> = crate::with_pool(config.jobs, || {
        manifest
            .entries
            .par_iter()
            .map(|entry| {
                process(
                    &manifest,
                    entry,
                    &feature_dir.join(split_name(&split, &entry.id)),
                    config,
                )
            })
            .collect()
    })?;
    for (entry, result) in manifest.entries.iter().zip(results) {
        result.with_context(|| format!("image {}", entry.id))?;
    }

    let run = RunManifest {
        tool: "depthcue",
        version: env!("CARGO_PKG_VERSION"),
        command: "generate",
        feature: &config.feature,
        directory: config.feature.dir_name(),
        seed: config.seed,
        seed_derivation: SEED_DERIVATION,
        sidecar_versions: SidecarVersions {
            identity: IDENTITY_VERSION,
            scramble: depthcue::spectral::SIDECAR_VERSION,
            shuffle: depthcue::texture::SIDECAR_VERSION,
            edges: EDGES_VERSION,
        },
        split: SplitRecord {
            split_seed: manifest.split_seed,
            test_fraction: manifest.test_fraction,
            unit: manifest.split_unit,
            train: &split.train,
            test: &split.test,
        },
        entries: &manifest.entries,
    };
    io::write_atomic(&feature_dir.join("run_manifest.json"), &json_bytes(&run)?)?;
    eprintln!(
        "generate: {} train + {} test images -> {}",
        split.train.len(),
        split.test.len(),
        feature_dir.display()
    );
    Ok(GenerateSummary {
        feature_dir,
        train: split.train.len(),
        test: split.test.len(),
    })
}
