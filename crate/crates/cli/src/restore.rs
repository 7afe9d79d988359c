//! `restore`: inverts a generated feature directory using its sidecars.

use std::path::{Path, PathBuf};

use anyhow::Context;
use depthcue::imgcore::{load_depth, load_raster};
use depthcue::spectral::{unscramble_depth, unscramble_image};
use depthcue::texture::unshuffle_patches;
use depthcue::{io, ColourModel, Error};
use rayon::prelude::*;

use crate::fsutil::{list_pngs, write_all_or_nothing};
use crate::sidecar::{load_sidecar, Sidecar};

pub const SPLITS: [&str; 2] = ["train", "test"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RestoreSummary {
    pub restored: usize,
}

fn restore_one(
    split_dir: &Path,
    out_dir: &Path,
    id: &str,
    image_path: &Path,
) -> depthcue::Result<()> {
    let sidecar = load_sidecar(&split_dir.join("sidecars"), id)?;
    let image = load_raster(image_path, ColourModel::Grey)?;
    let depth = load_depth(&split_dir.join("depths").join(format!("{id}.png")))?;
    let (image, depth) = match sidecar {
        // edge maps have no inverse; the depth was passed through untouched
        Sidecar::Identity | Sidecar::Edges(_) => (image, depth),
        Sidecar::Scramble(record) => (
            unscramble_image(&image, &record)?,
            unscramble_depth(&depth, &record)?,
        ),
        Sidecar::Shuffle(record) => (
            unshuffle_patches(&image, &record)?,
            unshuffle_patches(&depth, &record)?,
        ),
    };
    write_all_or_nothing(&[
        (
            out_dir.join("images").join(format!("{id}.png")),
            io::raster_png_bytes(&image)?,
        ),
        (
            out_dir.join("depths").join(format!("{id}.png")),
            io::depth_png_bytes(&depth)?,
        ),
    ])
}

/// Restores every image of `feature_dir` into `out/<split>/{images,depths}`.
pub fn restore(feature_dir: &Path, out: &Path, jobs: usize) -> anyhow::Result<RestoreSummary> {
    let mut work: Vec<(PathBuf, PathBuf, String, PathBuf)> = Vec::new();
    for split in SPLITS {
        let split_dir = feature_dir.join(split);
        let images = split_dir.join("images");
        if !images.is_dir() {
            continue;
        }
        for (id, path) in list_pngs(&images)? {
            work.push((split_dir.clone(), out.join(split), id, path));
        }
    }
    if work.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no images under {}/{{train,test}}/images",
            feature_dir.display()
        ))
        .into());
    }
    let results: Vec<depthcue::Result<()>> = crate::with_pool(jobs, || {
        work.par_iter()
            .map(|(split_dir, out_dir, id, path)| restore_one(split_dir, out_dir, id, path))
            .collect()
    })?;
    for ((_, _, id, _), result) in work.iter().zip(results) {
        result.with_context(|| format!("image {id}"))?;
    }
    eprintln!("restore: {} images -> {}", work.len(), out.display());
    Ok(RestoreSummary {
        restored: work.len(),
    })
}
