//! RGB to HSV plane extraction.
//!
//! `V = max(R,G,B) / 255` and `S = (max - min) / max` (0 where `max = 0`),
//! both evaluated in real arithmetic straight from the 8-bit samples.

use crate::error::Result;
use crate::imgcore::{Plane, RasterImage, SampleRange};

#[derive(Debug, Clone, PartialEq)]
pub struct HsvPlanes {
    /// Hue in degrees, [0, 360); 0 where saturation is 0.
    pub h: Plane,
    pub s: Plane,
    pub v: Plane,
}

/// (h degrees, s, v) of one 8-bit RGB triple.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let v = f64::from(max) / 255.0;
    if max == 0 {
        return (0.0, 0.0, v);
    }
    let chroma = f64::from(max) - f64::from(min);
    let s = chroma / f64::from(max);
    if max == min {
        return (0.0, s, v);
    }
    let (r, g, b) = (f64::from(r), f64::from(g), f64::from(b));
    let sector = if max as f64 == r {
        ((g - b) / chroma).rem_euclid(6.0)
    } else if max as f64 == g {
        (b - r) / chroma + 2.0
    } else {
        (r - g) / chroma + 4.0
    };
    let h = (60.0 * sector) % 360.0;
    (h, s, v)
}

/// Inverse hexcone mapping, (h degrees, s, v in [0,1]) to real RGB in [0,255].
pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> (f64, f64, f64) {
    let c = v * s;
    let hp = h.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    ((r + m) * 255.0, (g + m) * 255.0, (b + m) * 255.0)
}

pub fn extract_hsv(img: &RasterImage) -> Result<HsvPlanes> {
    img.require_channels(3)?;
    let n = img.width() * img.height();
    let (mut h, mut s, mut v) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for p in img.samples().chunks_exact(3) {
        let (ph, ps, pv) = rgb_to_hsv(p[0], p[1], p[2]);
        h.push(ph);
        s.push(ps);
        v.push(pv);
    }
    let (w, ht) = (img.width(), img.height());
    Ok(HsvPlanes {
        // Hue is kept on its own degree scale; the range tag only matters for clamping.
        h: Plane::new(w, ht, SampleRange::Unit, h)?,
        s: Plane::new(w, ht, SampleRange::Unit, s)?,
        v: Plane::new(w, ht, SampleRange::Unit, v)?,
    })
}

/// The S plane of [`extract_hsv`].
pub fn saturation_plane(img: &RasterImage) -> Result<Plane> {
    img.require_channels(3)?;
    let s = img
        .samples()
        .chunks_exact(3)
        .map(|p| rgb_to_hsv(p[0], p[1], p[2]).1)
        .collect();
    Plane::new(img.width(), img.height(), SampleRange::Unit, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::imgcore::ColourModel;
    use proptest::prelude::*;

    fn solid(rgb: [u8; 3]) -> RasterImage {
        RasterImage::rgb_from_fn(3, 2, |_, _| rgb)
    }

    #[test]
    fn pure_red() {
        assert_eq!(rgb_to_hsv(255, 0, 0), (0.0, 1.0, 1.0));
    }

    #[test]
    fn grey_has_no_saturation() {
        let (h, s, _) = rgb_to_hsv(100, 100, 100);
        assert_eq!((h, s), (0.0, 0.0));
        assert_eq!(rgb_to_hsv(0, 0, 0), (0.0, 0.0, 0.0));
    }

    #[test]
    fn mixed_triple() {
        let (h, s, v) = rgb_to_hsv(200, 100, 50);
        assert!((v - 200.0 / 255.0).abs() < 1e-15);
        assert_eq!(s, 0.75);
        // (g - b) / chroma = 50 / 150
        assert!((h - 20.0).abs() < 1e-12);
    }

    #[test]
    fn hue_sectors() {
        assert!((rgb_to_hsv(0, 255, 0).0 - 120.0).abs() < 1e-12);
        assert!((rgb_to_hsv(0, 0, 255).0 - 240.0).abs() < 1e-12);
        assert!((rgb_to_hsv(255, 0, 255).0 - 300.0).abs() < 1e-12);
        assert!((rgb_to_hsv(255, 255, 0).0 - 60.0).abs() < 1e-12);
        let (h, _, _) = rgb_to_hsv(255, 0, 1);
        assert!(h > 359.0 && h < 360.0);
    }

    #[test]
    fn saturation_plane_examples() {
        let grey = saturation_plane(&solid([77, 77, 77])).unwrap();
        assert!(grey.data().iter().all(|&s| s == 0.0));
        let blue = saturation_plane(&solid([0, 0, 255])).unwrap();
        assert!(blue.data().iter().all(|&s| s == 1.0));
        let mixed = RasterImage::rgb_from_fn(5, 4, |x, y| [(x * 50) as u8, (y * 60) as u8, 90]);
        assert_eq!(
            saturation_plane(&mixed).unwrap(),
            extract_hsv(&mixed).unwrap().s
        );
    }

    #[test]
    fn wrong_channel_count() {
        let g = RasterImage::grey_from_fn(2, 2, |_, _| 0);
        assert!(matches!(
            extract_hsv(&g),
            Err(Error::WrongChannelCount { .. })
        ));
        let e = g.with_model(ColourModel::Edge).unwrap();
        assert!(saturation_plane(&e).is_err());
    }

    proptest! {
        #[test]
        fn planes_in_range(r: u8, g: u8, b: u8) {
            let (h, s, v) = rgb_to_hsv(r, g, b);
            prop_assert!((0.0..360.0).contains(&h));
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!((0.0..=1.0).contains(&v));
            if v == 0.0 { prop_assert_eq!(s, 0.0); }
        }

        #[test]
        fn saturation_is_scale_invariant(r in 0.0f64..=255.0, g in 0.0f64..=255.0, b in 0.0f64..=255.0, k in 0.001f64..=1.0) {
            let sat = |r: f64, g: f64, b: f64| {
                let max = r.max(g).max(b);
                let min = r.min(g).min(b);
                if max == 0.0 { 0.0 } else { (max - min) / max }
            };
            prop_assume!(r.max(g).max(b) > 0.0);
            prop_assert!((sat(r, g, b) - sat(k * r, k * g, k * b)).abs() < 1e-6);
        }

        #[test]
        fn hsv_rgb_round_trip(r: u8, g: u8, b: u8) {
            let (h, s, v) = rgb_to_hsv(r, g, b);
            let (r2, g2, b2) = hsv_to_rgb(h, s, v);
            let q = |x: f64| x.round().clamp(0.0, 255.0) as u8;
            let (_, s2, v2) = rgb_to_hsv(q(r2), q(g2), q(b2));
            prop_assert!((s - s2).abs() <= 1.0 / 255.0);
            prop_assert!((v - v2).abs() <= 1.0 / 255.0);
        }
    }
}
