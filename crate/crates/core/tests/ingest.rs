use std::path::Path;

use depthcue::imgcore::{load_pair, split_dataset, DatasetManifest, DepthConvention};
use depthcue::{io, synth, Error};
use image::{GrayImage, ImageBuffer, Luma, RgbImage};

fn write_rgb(path: &Path, w: u32, h: u32) {
    RgbImage::from_fn(w, h, |x, y| image::Rgb([x as u8, y as u8, 7]))
        .save(path)
        .unwrap();
}

#[test]
fn eight_bit_depth_keeps_u8_convention() {
    let dir = tempfile::tempdir().unwrap();
    let (rgb, depth) = (dir.path().join("a.png"), dir.path().join("a_d.png"));
    write_rgb(&rgb, 640, 480);
    GrayImage::from_fn(640, 480, |x, _| Luma([(x % 256) as u8]))
        .save(&depth)
        .unwrap();
    let pair = load_pair(&rgb, &depth).unwrap();
    assert_eq!(pair.dims(), (640, 480));
    assert_eq!(pair.rgb.channels(), 3);
    assert_eq!(pair.depth.convention(), DepthConvention::U8);
    assert_eq!(pair.depth.get(300, 10), 44.0);
    assert_eq!(pair.rgb.pixel(3, 5), [3, 5, 7]);
}

#[test]
fn sixteen_bit_depth_scales_to_unit() {
    let dir = tempfile::tempdir().unwrap();
    let (rgb, depth) = (dir.path().join("b.png"), dir.path().join("b_d.png"));
    write_rgb(&rgb, 8, 4);
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_fn(8, 4, |x, _| Luma([if x == 0 { 65535 } else { 0 }]));
    img.save(&depth).unwrap();
    let pair = load_pair(&rgb, &depth).unwrap();
    assert_eq!(pair.depth.convention(), DepthConvention::UnitReal);
    let max = pair.depth.values().iter().cloned().fold(0.0, f64::max);
    assert_eq!(max, 1.0);
}

#[test]
fn mismatched_sizes_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (rgb, depth) = (dir.path().join("c.png"), dir.path().join("c_d.png"));
    write_rgb(&rgb, 640, 480);
    GrayImage::new(320, 240).save(&depth).unwrap();
    assert!(matches!(
        load_pair(&rgb, &depth),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn corrupt_file_is_decode_error() {
    let dir = tempfile::tempdir().unwrap();
    let (rgb, depth) = (dir.path().join("d.png"), dir.path().join("d_d.png"));
    std::fs::write(&rgb, b"definitely not a png").unwrap();
    GrayImage::new(4, 4).save(&depth).unwrap();
    assert!(matches!(load_pair(&rgb, &depth), Err(Error::Decode { .. })));
    assert!(matches!(
        load_pair(&dir.path().join("missing.png"), &depth),
        Err(Error::Decode { .. })
    ));
}

#[test]
fn depth_png_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pair = synth::room_scene(3, 40, 30);
    io::write_raster_png(&dir.path().join("r.png"), &pair.rgb).unwrap();
    io::write_depth_png(&dir.path().join("d.png"), &pair.depth).unwrap();
    let back = load_pair(&dir.path().join("r.png"), &dir.path().join("d.png")).unwrap();
    assert_eq!(back.rgb, pair.rgb);
    for (a, b) in back.depth.values().iter().zip(pair.depth.values()) {
        assert!((a - b).abs() <= 0.5 / 65535.0 + 1e-12);
    }
}

#[test]
fn manifest_dataset_loads_and_splits() {
    let dir = tempfile::tempdir().unwrap();
    synth::write_room_dataset(dir.path(), 10, 32, 24, 7).unwrap();
    let manifest = DatasetManifest::load(&dir.path().join("manifest.json")).unwrap();
    manifest.check_files().unwrap();
    for entry in &manifest.entries {
        let pair = manifest.load_entry(entry).unwrap();
        assert_eq!(pair.id, entry.id);
        assert_eq!(pair.rgb.width(), pair.depth.width());
        assert_eq!(pair.rgb.height(), pair.depth.height());
    }
    let split = split_dataset(&manifest).unwrap();
    assert_eq!((split.train.len(), split.test.len()), (9, 1));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    for key in ["root", "entries", "split_seed", "test_fraction"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    let entry = &json["entries"][0];
    for key in ["id", "rgb", "depth"] {
        assert!(entry.get(key).is_some(), "{key}");
    }
}

#[test]
fn manifest_reports_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    synth::write_room_dataset(dir.path(), 2, 16, 16, 1).unwrap();
    std::fs::remove_file(dir.path().join("depth/scene0001.png")).unwrap();
    let manifest = DatasetManifest::load(&dir.path().join("manifest.json")).unwrap();
    assert!(matches!(manifest.check_files(), Err(Error::Io { .. })));
}
