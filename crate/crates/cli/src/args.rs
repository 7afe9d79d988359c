use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use depthcue::analysis::{NoiseRegion, DEFAULT_HEATMAP_DEPTH_BINS, DEFAULT_HEATMAP_VALUE_BINS};
use depthcue::edges::{EdgeParams, ThresholdMode};
use depthcue::evaluate::{Aggregation, BaselineKind};

use crate::analyze::{self, Dataset, Subset};
use crate::evaluate::{self as eval, EvaluateConfig};
use crate::generate::{self, Feature, PipelineConfig};
use crate::{restore, split, usage};

#[derive(Debug, Parser)]
#[command(
    name = "depthcue",
    version,
    about = "Depth-cue dataset generation, restoration, evaluation and analysis"
)]
pub struct Cli {
    /// Global seed; every per-image seed is derived from it and the image id.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Dataset manifest (JSON).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply a cue transform to every pair of the manifest.
    Generate(GenerateArgs),
    /// Invert a generated feature directory using its sidecars.
    Restore { feature_dir: PathBuf },
    /// Score predicted depth maps against ground truth.
    Evaluate(EvaluateArgs),
    /// Run one of the saturation / colour / noise analyses.
    Analyze {
        /// Restrict to one side of the train/test split.
        #[arg(long, value_enum, default_value_t = SubsetArg::All, global = true)]
        subset: SubsetArg,
        #[command(subcommand)]
        kind: AnalyzeCommand,
    },
    /// Write the train/test partition of the manifest.
    Split {
        /// Hold out whole scenes instead of single images.
        #[arg(long)]
        scene: bool,
    },
    /// Fit a non-learned baseline on a feature directory and predict its test split.
    Predict {
        feature_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelArg::GlobalMean)]
        model: ModelArg,
        /// Patch size of the patch-knn model.
        #[arg(long, default_value_t = 8)]
        patch: usize,
    },
    /// Render a procedural indoor RGB+depth dataset with its manifest.
    Synth {
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 160)]
        width: usize,
        #[arg(long, default_value_t = 120)]
        height: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureArg {
    Rgb,
    RgbScrambled,
    GreyScrambled,
    SaturationScrambled,
    Texture,
    Shape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThresholdArg {
    Absolute,
    RatioOfMax,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub feature: FeatureArg,
    /// Patch size (texture only).
    #[arg(long)]
    pub patch_size: Option<usize>,
    /// Keep colour in texture patches instead of converting to greyscale.
    #[arg(long)]
    pub colour: bool,
    /// Canny Gaussian sigma (shape only).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Canny low threshold (shape only).
    #[arg(long)]
    pub low: Option<f64>,
    /// Canny high threshold (shape only).
    #[arg(long)]
    pub high: Option<f64>,
    /// How the Canny thresholds are read (shape only).
    #[arg(long, value_enum)]
    pub threshold_mode: Option<ThresholdArg>,
}

impl GenerateArgs {
    fn feature(&self) -> anyhow::Result<Feature> {
        let edge_flags = self.sigma.is_some()
            || self.low.is_some()
            || self.high.is_some()
            || self.threshold_mode.is_some();
        if edge_flags && self.feature != FeatureArg::Shape {
            return Err(usage(
                "--sigma/--low/--high/--threshold-mode only apply to --feature shape",
            ));
        }
        if (self.patch_size.is_some() || self.colour) && self.feature != FeatureArg::Texture {
            return Err(usage(
                "--patch-size/--colour only apply to --feature texture",
            ));
        }
        Ok(match self.feature {
            FeatureArg::Rgb => Feature::Rgb,
            FeatureArg::RgbScrambled => Feature::RgbScrambled,
            FeatureArg::GreyScrambled => Feature::GreyScrambled,
            FeatureArg::SaturationScrambled => Feature::SaturationScrambled,
            FeatureArg::Texture => Feature::Texture {
                patch_size: self
                    .patch_size
                    .ok_or_else(|| usage("--feature texture needs --patch-size"))?,
                colour: self.colour,
            },
            FeatureArg::Shape => {
                let d = EdgeParams::default();
                Feature::Shape {
                    edges: EdgeParams {
                        gaussian_sigma: self.sigma.unwrap_or(d.gaussian_sigma),
                        low_threshold: self.low.unwrap_or(d.low_threshold),
                        high_threshold: self.high.unwrap_or(d.high_threshold),
                        threshold_mode: match self.threshold_mode {
                            None => d.threshold_mode,
                            Some(ThresholdArg::Absolute) => ThresholdMode::Absolute,
                            Some(ThresholdArg::RatioOfMax) => ThresholdMode::RatioOfMax,
                        },
                    },
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AggregationArg {
    ImageMean,
    PixelPooled,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, value_enum, default_value_t = AggregationArg::ImageMean)]
    pub aggregation: AggregationArg,
    /// Row label in report.csv.
    #[arg(long, default_value = "prediction")]
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SubsetArg {
    All,
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionArg {
    Whole,
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    GlobalMean,
    RowPrior,
    PatchKnn,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Mean saturation per depth bin.
    SatDepth {
        #[arg(long, default_value_t = 8)]
        bins: usize,
    },
    /// Mean saturation per horizontal band, top to bottom.
    RowSat {
        #[arg(long, default_value_t = 10)]
        rows: usize,
    },
    /// Per-channel colour value against depth counts.
    Heatmap {
        #[arg(long, default_value_t = DEFAULT_HEATMAP_DEPTH_BINS)]
        depth_bins: usize,
        #[arg(long, default_value_t = DEFAULT_HEATMAP_VALUE_BINS)]
        value_bins: usize,
        /// Images sampled (seeded) from the subset.
        #[arg(long, default_value_t = 500)]
        sample: usize,
    },
    /// Scramble, add Gaussian noise, restore and measure.
    Noise {
        /// Noise standard deviation on the 0-255 scale.
        #[arg(long, default_value_t = 25.0)]
        sigma: f64,
        #[arg(long, value_enum, default_value_t = RegionArg::Whole)]
        region: RegionArg,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Image id (default: first of the subset).
        #[arg(long)]
        id: Option<String>,
    },
}

fn required(value: Option<PathBuf>, flag: &str, command: &str) -> anyhow::Result<PathBuf> {
    value.ok_or_else(|| usage(format!("{command} needs --{flag}")))
}

pub(crate) fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let Cli {
        seed,
        jobs,
        manifest,
        out,
        command,
    } = cli;
    match command {
        Command::Generate(args) => {
            let config = PipelineConfig {
                manifest: required(manifest, "manifest", "generate")?,
                out: required(out, "out", "generate")?,
                seed,
                jobs,
                feature: args.feature()?,
            };
            generate::generate(&config)?;
        }
        Command::Restore { feature_dir } => {
            restore::restore(&feature_dir, &required(out, "out", "restore")?, jobs)?;
        }
        Command::Evaluate(args) => {
            let out = required(out, "out", "evaluate")?;
            eval::evaluate(&EvaluateConfig {
                pred_dir: &args.pred,
                gt_dir: &args.gt,
                out: &out,
                aggregation: match args.aggregation {
                    AggregationArg::ImageMean => Aggregation::ImageMean,
                    AggregationArg::PixelPooled => Aggregation::PixelPooled,
                },
                label: &args.label,
                jobs,
            })?;
        }
        Command::Analyze { subset, kind } => {
            let subset = match subset {
                SubsetArg::All => Subset::All,
                SubsetArg::Train => Subset::Train,
                SubsetArg::Test => Subset::Test,
            };
            let data = Dataset::open(&required(manifest, "manifest", "analyze")?, subset)?;
            let out = required(out, "out", "analyze")?;
            match kind {
                AnalyzeCommand::SatDepth { bins } => {
                    analyze::sat_depth(&data, &out, seed, bins, jobs)?;
                }
                AnalyzeCommand::RowSat { rows } => {
                    analyze::row_sat(&data, &out, seed, rows, jobs)?;
                }
                AnalyzeCommand::Heatmap {
                    depth_bins,
                    value_bins,
                    sample,
                } => {
                    analyze::heatmap(&data, &out, seed, depth_bins, value_bins, sample, jobs)?;
                }
                AnalyzeCommand::Noise {
                    sigma,
                    region,
                    trials,
                    id,
                } => {
                    let region = match region {
                        RegionArg::Whole => NoiseRegion::Whole,
                        RegionArg::Central => NoiseRegion::Central,
                    };
                    analyze::noise(
                        &data,
                        &out,
                        seed,
                        id.as_deref(),
                        sigma,
                        region,
                        trials,
                        jobs,
                    )?;
                }
            }
        }
        Command::Split { scene } => {
            split::split(
                &required(manifest, "manifest", "split")?,
                &required(out, "out", "split")?,
                scene,
            )?;
        }
        Command::Predict {
            feature_dir,
            model,
            patch,
        } => {
            let kind = match model {
                ModelArg::GlobalMean => BaselineKind::GlobalMean,
                ModelArg::RowPrior => BaselineKind::RowPrior,
                ModelArg::PatchKnn => BaselineKind::PatchKnn { patch },
            };
            eval::predict(&feature_dir, &required(out, "out", "predict")?, kind, jobs)?;
        }
        Command::Synth {
            count,
            width,
            height,
        } => {
            let out = required(out, "out", "synth")?;
            depthcue::synth::write_room_dataset(&out, count, width, height, seed)?;
            eprintln!(
                "synth: {count} scenes of {width}x{height} -> {}",
                out.display()
            );
        }
    }
    Ok(())
}
