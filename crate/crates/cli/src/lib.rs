//! Manifest-driven pipelines over the `depthcue` library: generating cue
//! datasets, restoring them from their sidecars, evaluating depth
//! predictions and running the saturation/colour analyses.
//!
//! Every command is also exposed as a plain function so the pipelines can be
//! driven from Rust without going through argument parsing.

use std::ffi::OsString;
use std::fmt;

use clap::Parser;

pub mod analyze;
mod args;
pub mod evaluate;
mod fsutil;
pub mod generate;
pub mod restore;
pub mod sidecar;
pub mod split;

pub use args::{AnalyzeCommand, Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Bad flag combinations that clap cannot express on its own.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Maps an error to the process exit code: usage problems are 1, anything
/// rooted in the data (decoding, dimensions, sidecars, ids) is 2, and
/// everything else is 3.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(|e| e.is::<UsageError>()) {
        EXIT_USAGE
    } else if err.chain().any(|e| e.is::<depthcue::Error>()) {
        EXIT_DATA
    } else {
        EXIT_INTERNAL
    }
}

/// Runs `jobs` worker threads (0 = one per core) for the duration of `f`.
pub(crate) fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    Ok(pool.install(f))
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    args::dispatch(cli)
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
