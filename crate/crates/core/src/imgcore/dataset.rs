use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use image::DynamicImage;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ColourModel, DepthConvention, DepthMap, RasterImage, SamplePair};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub rgb: PathBuf,
    pub depth: PathBuf,
    /// Scene label, only consulted by scene-level splits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitUnit {
    #[default]
    Image,
    Scene,
}

/// Explicit list of RGB+depth files making up a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
    pub split_seed: u64,
    pub test_fraction: f64,
    #[serde(default)]
    pub split_unit: SplitUnit,
}

impl DatasetManifest {
    /// Reads a manifest; a relative `root` is resolved against the
    /// manifest's own directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: DatasetManifest = serde_json::from_str(&text)?;
        if manifest.root.is_relative() {
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            manifest.root = base.join(&manifest.root);
        }
        manifest.check_ids()?;
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn check_ids(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::DuplicateId(e.id.clone()));
            }
        }
        Ok(())
    }

    /// Verifies every referenced file exists.
    pub fn check_files(&self) -> Result<()> {
        for e in &self.entries {
            for p in [self.rgb_path(e), self.depth_path(e)] {
                if !p.is_file() {
                    return Err(Error::io(
                        p,
                        std::io::Error::new(
                            std::io::ErrorKind::NotFound,
                            "referenced file missing",
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn rgb_path(&self, entry: &ManifestEntry) -> PathBuf {
        self.root.join(&entry.rgb)
    }

    pub fn depth_path(&self, entry: &ManifestEntry) -> PathBuf {
        self.root.join(&entry.depth)
    }

    pub fn entry(&self, id: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn load_entry(&self, entry: &ManifestEntry) -> Result<SamplePair> {
        let mut pair = load_pair(&self.rgb_path(entry), &self.depth_path(entry))?;
        pair.id = entry.id.clone();
        Ok(pair)
    }
}

/// Result of a train/test split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
}

impl Split {
    pub fn contains_test(&self, id: &str) -> bool {
        self.test.iter().any(|t| t == id)
    }
}

/// Seeded random partition of the manifest ids into train and test sets.
///
/// Image-level splits hold out exactly `round(test_fraction * N)` ids.
/// Scene-level splits hold out whole scenes in shuffled order until that
/// count is reached, so the test set can overshoot by part of a scene.
/// Both lists keep manifest order.
pub fn split_dataset(manifest: &DatasetManifest) -> Result<Split> {
    let n = manifest.entries.len();
    if n < 2 {
        return Err(Error::EmptyDataset(format!("{n} entries, need at least 2")));
    }
    let frac = manifest.test_fraction;
    if !(frac > 0.0 && frac < 1.0) {
        return Err(Error::InvalidParams(format!(
            "test_fraction {frac} not in (0,1)"
        )));
    }
    manifest.check_ids()?;
    let target = (frac * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(manifest.split_seed);

    let held_out: HashSet<usize> = match manifest.split_unit {
        SplitUnit::Image => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            order.into_iter().take(target).collect()
        }
        SplitUnit::Scene => {
            let mut scenes: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for (i, e) in manifest.entries.iter().enumerate() {
                let key = e.scene.as_deref().unwrap_or(e.id.as_str());
                scenes.entry(key).or_default().push(i);
            }
            let mut groups: Vec<Vec<usize>> = scenes.into_values().collect();
            groups.shuffle(&mut rng);
            let mut out = HashSet::new();
            for g in groups {
                if out.len() >= target {
                    break;
                }
                out.extend(g);
            }
            out
        }
    };

    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (i, e) in manifest.entries.iter().enumerate() {
        if held_out.contains(&i) {
            test.push(e.id.clone());
        } else {
            train.push(e.id.clone());
        }
    }
    Ok(Split {
        train,
        test,
        seed: manifest.split_seed,
    })
}

fn decode(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Loads an RGB image and its depth map.
///
/// 8-bit depth keeps the [0,255] convention; 16-bit depth is scaled to
/// [0,1] by 1/65535.
pub fn load_pair(rgb_path: &Path, depth_path: &Path) -> Result<SamplePair> {
    let rgb = decode(rgb_path)?.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let rgb = RasterImage::new(w, h, 3, ColourModel::Rgb, rgb.into_raw())?;
    let depth = load_depth(depth_path)?;

    let id = rgb_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    SamplePair::new(id, rgb, depth)
}

/// Loads a single-channel depth PNG under the same conventions as [`load_pair`].
pub fn load_depth(path: &Path) -> Result<DepthMap> {
    match decode(path)? {
        DynamicImage::ImageLuma8(img) => {
            let (w, h) = (img.width() as usize, img.height() as usize);
            let values = img.into_raw().into_iter().map(f64::from).collect();
            DepthMap::new(w, h, DepthConvention::U8, values)
        }
        DynamicImage::ImageLuma16(img) => {
            let (w, h) = (img.width() as usize, img.height() as usize);
            let values = img
                .into_raw()
                .into_iter()
                .map(|v| f64::from(v) / 65535.0)
                .collect();
            DepthMap::new(w, h, DepthConvention::UnitReal, values)
        }
        other => Err(Error::Decode {
            path: path.to_path_buf(),
            reason: format!(
                "depth must be single-channel 8/16-bit, got {:?}",
                other.color()
            ),
        }),
    }
}

/// Loads an 8-bit image, keeping single-channel files single-channel
/// (tagged `model`) and converting everything else to RGB.
pub fn load_raster(path: &Path, grey_model: ColourModel) -> Result<RasterImage> {
    match decode(path)? {
        DynamicImage::ImageLuma8(img) => {
            let (w, h) = (img.width() as usize, img.height() as usize);
            RasterImage::new(w, h, 1, grey_model, img.into_raw())
        }
        other => {
            let img = other.to_rgb8();
            let (w, h) = (img.width() as usize, img.height() as usize);
            RasterImage::new(w, h, 3, ColourModel::Rgb, img.into_raw())
        }
    }
}
