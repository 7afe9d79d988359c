//! PNG encoding with pinned settings and atomic file writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};
use crate::imgcore::{DepthConvention, DepthMap, RasterImage};

/// Writes `bytes` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn encode_png(
    width: usize,
    height: usize,
    data: &[u8],
    color: ExtendedColorType,
) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let encoder =
        PngEncoder::new_with_quality(&mut out, CompressionType::Default, FilterType::Adaptive);
    encoder
        .write_image(data, width as u32, height as u32, color)
        .map_err(|e| Error::InvalidRaster(format!("png encode: {e}")))?;
    Ok(out)
}

pub fn raster_png_bytes(img: &RasterImage) -> Result<Vec<u8>> {
    let color = match img.channels() {
        3 => ExtendedColorType::Rgb8,
        _ => ExtendedColorType::L8,
    };
    encode_png(img.width(), img.height(), img.samples(), color)
}

pub fn write_raster_png(path: &Path, img: &RasterImage) -> Result<()> {
    write_atomic(path, &raster_png_bytes(img)?)
}

/// 8-bit depth maps are written as 8-bit PNG, normalized maps as 16-bit PNG
/// (value × 65535, rounded).
pub fn depth_png_bytes(depth: &DepthMap) -> Result<Vec<u8>> {
    match depth.convention() {
        DepthConvention::U8 => {
            let data: Vec<u8> = depth
                .values()
                .iter()
                .map(|v| v.round().clamp(0.0, 255.0) as u8)
                .collect();
            encode_png(depth.width(), depth.height(), &data, ExtendedColorType::L8)
        }
        DepthConvention::UnitReal => {
            // The encoder takes native-endian samples and swaps as needed.
            let data: Vec<u8> = depth
                .values()
                .iter()
                .flat_map(|v| ((v * 65535.0).round().clamp(0.0, 65535.0) as u16).to_ne_bytes())
                .collect();
            encode_png(depth.width(), depth.height(), &data, ExtendedColorType::L16)
        }
    }
}

pub fn write_depth_png(path: &Path, depth: &DepthMap) -> Result<()> {
    write_atomic(path, &depth_png_bytes(depth)?)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
