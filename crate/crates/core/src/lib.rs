//! Depth-cue isolation toolkit.
//!
//! Builds cue-isolated datasets (colour and saturation via phase scrambling,
//! local texture via patch shuffling, shape via edge maps) from RGB+depth
//! pairs, restores them through their stored records, and evaluates depth
//! predictions with the standard threshold-accuracy and error metrics.

pub mod analysis;
pub mod colorspace;
pub mod edges;
pub mod error;
pub mod evaluate;
pub mod imgcore;
pub mod io;
pub mod seed;
pub mod spectral;
pub mod synth;
pub mod texture;

pub use error::{Error, Result};
pub use imgcore::{
    ColourModel, DepthConvention, DepthMap, Plane, RasterImage, SamplePair, SampleRange,
};
