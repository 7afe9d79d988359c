//! Per-image sidecar files: `<id>.<kind>.json` next to each generated image,
//! holding whatever is needed to invert (or re-derive) the transform.

use std::path::{Path, PathBuf};

use depthcue::edges::EdgeParams;
use depthcue::spectral::{ScrambleRecord, ScrambleSidecar};
use depthcue::texture::{ShuffleRecord, ShuffleSidecar};
use depthcue::{io, Error, Result};
use serde::{Deserialize, Serialize};

pub const IDENTITY_VERSION: u32 = 1;
pub const EDGES_VERSION: u32 = 1;

/// Marks an untransformed image (the RGB control condition).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentitySidecar {
    pub version: u32,
}

/// Edge maps are not invertible; the sidecar keeps the detector settings
/// so the map can be re-derived from the original.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSidecar {
    pub version: u32,
    pub params: EdgeParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SidecarKind {
    Identity,
    Scramble,
    Shuffle,
    Edges,
}

impl SidecarKind {
    pub const ALL: [SidecarKind; 4] = [Self::Identity, Self::Scramble, Self::Shuffle, Self::Edges];

    pub fn suffix(self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Scramble => "scramble",
            Self::Shuffle => "shuffle",
            Self::Edges => "edges",
        }
    }
}

pub fn sidecar_path(dir: &Path, id: &str, kind: SidecarKind) -> PathBuf {
    dir.join(format!("{id}.{}.json", kind.suffix()))
}

#[derive(Debug, Clone)]
pub enum Sidecar {
    Identity,
    Scramble(ScrambleRecord),
    Shuffle(ShuffleRecord),
    Edges(EdgeParams),
}

fn check_version(found: u32, expected: u32) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::VersionMismatch { found, expected })
    }
}

/// Finds and validates the sidecar for `id` in `dir`.
pub fn load_sidecar(dir: &Path, id: &str) -> Result<Sidecar> {
    let Some(kind) = SidecarKind::ALL
        .into_iter()
        .find(|&k| sidecar_path(dir, id, k).is_file())
    else {
        return Err(Error::MissingSidecar(dir.join(format!("{id}.*.json"))));
    };
    let path = sidecar_path(dir, id, kind);
    Ok(match kind {
        SidecarKind::Identity => {
            let s: IdentitySidecar = io::read_json(&path)?;
            check_version(s.version, IDENTITY_VERSION)?;
            Sidecar::Identity
        }
        SidecarKind::Scramble => {
            let s: ScrambleSidecar = io::read_json(&path)?;
            Sidecar::Scramble(ScrambleRecord::from_sidecar(&s)?)
        }
        SidecarKind::Shuffle => {
            let s: ShuffleSidecar = io::read_json(&path)?;
            Sidecar::Shuffle(ShuffleRecord::from_sidecar(&s)?)
        }
        SidecarKind::Edges => {
            let s: EdgeSidecar = io::read_json(&path)?;
            check_version(s.version, EDGES_VERSION)?;
            s.params.validate()?;
            Sidecar::Edges(s.params)
        }
    })
}
