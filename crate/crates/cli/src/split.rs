//! `split`: writes the deterministic train/test partition of a manifest.

use std::path::Path;

use depthcue::imgcore::{split_dataset, DatasetManifest, Split, SplitUnit};
use depthcue::io;
use serde::Serialize;

use crate::fsutil::json_bytes;

#[derive(Serialize)]
struct SplitFile<'a> {
    split_seed: u64,
    test_fraction: f64,
    unit: SplitUnit,
    train: &'a [String],
    test: &'a [String],
}

/// Splits by image, or by scene when `by_scene` is set, and writes
/// `<out>/split.json`.
pub fn split(manifest_path: &Path, out: &Path, by_scene: bool) -> anyhow::Result<Split> {
    let mut manifest = DatasetManifest::load(manifest_path)?;
    if by_scene {
        manifest.split_unit = SplitUnit::Scene;
    }
    let split = split_dataset(&manifest)?;
    let file = SplitFile {
        split_seed: manifest.split_seed,
        test_fraction: manifest.test_fraction,
        unit: manifest.split_unit,
        train: &split.train,
        test: &split.test,
    };
    io::write_atomic(&out.join("split.json"), &json_bytes(&file)?)?;
    eprintln!(
        "split: {} train / {} test",
        split.train.len(),
        split.test.len()
    );
    Ok(split)
}
