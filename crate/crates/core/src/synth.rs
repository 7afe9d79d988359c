//! Seeded procedural RGB+depth scenes for tests, demos and desk-scale runs.
//!
//! Scenes are ray-cast box rooms with a few furniture blocks standing on the
//! floor. Depth is the z distance of the first hit divided by
//! [`MAX_DEPTH`], so it is continuous along walls and jumps at furniture
//! silhouettes, and colours carry per-surface hue, distance shading and a
//! value-noise texture.

use std::path::Path;

use rand::Rng;

use crate::error::Result;
use crate::imgcore::{
    DatasetManifest, DepthConvention, DepthMap, ManifestEntry, RasterImage, SamplePair, SplitUnit,
};
use crate::io::{write_depth_png, write_raster_png};
use crate::seed;

/// Scene depth that maps to 1.0.
pub const MAX_DEPTH: f64 = 10.0;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Lattice hash in [-1, 1].
fn lattice(seed: u64, x: i64, y: i64) -> f64 {
    let h = splitmix(
        seed ^ splitmix((x as u64).wrapping_mul(0x1f1f_1f1f) ^ (y as u64).rotate_left(32)),
    );
    (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// Bilinear value noise with cell size `cell`.
fn value_noise(seed: u64, x: f64, y: f64, cell: f64) -> f64 {
    let (fx, fy) = (x / cell, y / cell);
    let (x0, y0) = (fx.floor(), fy.floor());
    let (tx, ty) = (fx - x0, fy - y0);
    let (x0, y0) = (x0 as i64, y0 as i64);
    let a = lattice(seed, x0, y0);
    let b = lattice(seed, x0 + 1, y0);
    let c = lattice(seed, x0, y0 + 1);
    let d = lattice(seed, x0 + 1, y0 + 1);
    let top = a + (b - a) * tx;
    let bottom = c + (d - c) * tx;
    top + (bottom - top) * ty
}

struct Block {
    x0: f64,
    x1: f64,
    top: f64,
    z: f64,
    colour: [f64; 3],
}

fn random_colour(rng: &mut impl Rng) -> [f64; 3] {
    let base: [f64; 3] = [
        rng.random_range(40.0..230.0),
        rng.random_range(40.0..230.0),
        rng.random_range(40.0..230.0),
    ];
    base
}

/// Renders one room scene.
pub fn room_scene(seed: u64, width: usize, height: usize) -> SamplePair {
    let mut rng = seed::rng(seed);
    let half_w = rng.random_range(1.6..2.6);
    let floor = rng.random_range(1.0..1.6);
    let ceiling = rng.random_range(1.0..1.8);
    let back = rng.random_range(4.5..8.5);
    // floor, ceiling, left, right, back
    let surfaces: Vec<[f64; 3]> = (0..5).map(|_| random_colour(&mut rng)).collect();
    let blocks: Vec<Block> = (0..rng.random_range(2..5))
        .map(|_| {
            let z = rng.random_range(1.8..back - 0.6);
            let cx = rng.random_range(-half_w * 0.7..half_w * 0.7);
            let bw = rng.random_range(0.3..1.0);
            Block {
                x0: cx - bw,
                x1: cx + bw,
                top: -floor + rng.random_range(0.4..1.6),
                z,
                colour: random_colour(&mut rng),
            }
        })
        .collect();
    let tex_seed = rng.random::<u64>();

    let focal = 0.8 * width as f64;
    let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
    let mut depth = vec![0.0; width * height];
    let mut rgb = vec![[0u8; 3]; width * height];
    for y in 0..height {
        for x in 0..width {
            let dx = (x as f64 + 0.5 - cx) / focal;
            let dy = (cy - y as f64 - 0.5) / focal;
            let mut hit = (back, 4usize);
            if dx != 0.0 {
                let t = half_w / dx.abs();
                if t < hit.0 {
                    hit = (t, if dx < 0.0 { 2 } else { 3 });
                }
            }
            if dy < 0.0 && floor / -dy < hit.0 {
                hit = (floor / -dy, 0);
            }
            if dy > 0.0 && ceiling / dy < hit.0 {
                hit = (ceiling / dy, 1);
            }
            let (mut z, mut colour) = (hit.0, surfaces[hit.1]);
            for b in &blocks {
                let (wx, wy) = (dx * b.z, dy * b.z);
                if b.z < z && wx >= b.x0 && wx <= b.x1 && wy >= -floor && wy <= b.top {
                    z = b.z;
                    colour = b.colour;
                }
            }
            let shade = 1.25 / (1.0 + 0.12 * z);
            let tex = 18.0 * value_noise(tex_seed, x as f64, y as f64, 9.0)
                + 6.0 * value_noise(tex_seed ^ 1, x as f64, y as f64, 2.5);
            let i = y * width + x;
            rgb[i] = colour.map(|c| (c * shade + tex).round().clamp(0.0, 255.0) as u8);
            depth[i] = (z / MAX_DEPTH).min(1.0);
        }
    }
    let rgb = RasterImage::rgb_from_fn(width, height, |x, y| rgb[y * width + x]);
    let depth =
        DepthMap::new(width, height, DepthConvention::UnitReal, depth).expect("depth within [0,1]");
    SamplePair::new(format!("room{seed:06}"), rgb, depth).expect("matching dims")
}

/// Image whose saturation falls linearly from bottom (0.9) to top (0.1),
/// the pattern aerial perspective produces in outdoor scenes.
pub fn haze_image(width: usize, height: usize) -> RasterImage {
    RasterImage::rgb_from_fn(width, height, |x, y| {
        let t = if height > 1 {
            y as f64 / (height - 1) as f64
        } else {
            1.0
        };
        let s = 0.1 + 0.8 * t;
        let v = 220.0;
        let min = (v * (1.0 - s)).round() as u8;
        // hue drifts across the row; saturation only depends on the row
        match x % 3 {
            0 => [220, min, min],
            1 => [min, 220, min],
            _ => [min, min, 220],
        }
    })
}

/// Uniform random RGB image.
pub fn noise_image(seed: u64, width: usize, height: usize) -> RasterImage {
    let mut rng = seed::rng(seed);
    RasterImage::rgb_from_fn(width, height, |_, _| {
        [rng.random(), rng.random(), rng.random()]
    })
}

/// Writes `count` room scenes as PNGs (RGB 8-bit, depth 16-bit) plus a
/// `manifest.json` under `dir`.
pub fn write_room_dataset(
    dir: &Path,
    count: usize,
    width: usize,
    height: usize,
    seed: u64,
) -> Result<DatasetManifest> {
    let mut entries = Vec::with_capacity(count);
    for i in 0..count {
        let pair = room_scene(
            seed::derive_seed(seed, "room", &i.to_string()),
            width,
            height,
        );
        let id = format!("scene{i:04}");
        let rgb = format!("rgb/{id}.png");
        let depth = format!("depth/{id}.png");
        write_raster_png(&dir.join(&rgb), &pair.rgb)?;
        write_depth_png(&dir.join(&depth), &pair.depth)?;
        entries.push(ManifestEntry {
            id,
            rgb: rgb.into(),
            depth: depth.into(),
            scene: None,
        });
    }
    let manifest = DatasetManifest {
        root: ".".into(),
        entries,
        split_seed: seed,
        test_fraction: 0.1,
        split_unit: SplitUnit::Image,
    };
    manifest.save(&dir.join("manifest.json"))?;
    Ok(manifest)
}
