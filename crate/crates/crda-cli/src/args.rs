//! Command-line argument definitions.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crda::{RowNorm, SetupId};

#[derive(Debug, Parser)]
#[command(
    name = "crda",
    version,
    about = "Compressive regularized discriminant analysis: simulate, tune, train, predict, benchmark"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for parallel sections (default: CRDA_WORKERS env var,
    /// then all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one synthetic trial and write its splits to disk.
    Simulate(SimulateArgs),
    /// Tune the shrinkage weight and sparsity level on labeled data.
    Cv(CvArgs),
    /// Fit a classifier at fixed hyperparameters and save it.
    Train(TrainArgs),
    /// Classify new samples with a saved model.
    Predict(PredictArgs),
    /// Run the Monte Carlo benchmark and emit the result tables.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Which synthetic configuration to draw from: I, II, or III.
    #[arg(long)]
    pub setup: SetupId,

    /// Seed for this trial's random streams.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Size multiplier on the feature dimension (split sizes stay fixed).
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,

    /// Draw group labels multinomially instead of using exactly equal counts.
    #[arg(long)]
    pub multinomial: bool,

    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Shared flags for reading a labeled CSV.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// Data CSV: samples as rows with a label column, unless --transpose.
    #[arg(long)]
    pub data: PathBuf,

    /// Header name of the label column.
    #[arg(long, default_value = crda::DEFAULT_LABEL_COLUMN)]
    pub label_column: String,

    /// Read --data as features-as-rows (first column feature names, one
    /// column per sample); labels come from --labels.
    #[arg(long, requires = "labels")]
    pub transpose: bool,

    /// One-column label CSV for --transpose.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Row-norm exponent for feature ranking: 1, 2, or inf.
    #[arg(long, default_value = "inf")]
    pub q: RowNorm,

    /// Shrinkage weight strategy: "cv" (grid), "lw" (closed-form plug-in),
    /// or a fixed value in [0, 1).
    #[arg(long, default_value = "cv")]
    pub alpha: AlphaArg,

    /// Sparsity level strategy: "cv" (grid) or a fixed integer.
    #[arg(long, default_value = "cv")]
    pub k: KArg,

    /// Number of cross-validation folds.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Hold-out validation CSV; scores the grid on it instead of
    /// cross-validating.
    #[arg(long)]
    pub validation: Option<PathBuf>,

    /// Class prior probabilities.
    #[arg(long, value_enum, default_value_t = PriorsArg::Empirical)]
    pub priors: PriorsArg,

    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Shrinkage weight: a fixed value in [0, 1) or "lw" for the
    /// closed-form plug-in.
    #[arg(long)]
    pub alpha: AlphaArg,

    /// Keep the K best-ranked features (hard selection).
    #[arg(long, conflicts_with = "delta")]
    pub k: Option<usize>,

    /// Row-norm exponent for --k: 1, 2, or inf.
    #[arg(long, default_value = "inf")]
    pub q: RowNorm,

    /// Soft-threshold level instead of hard selection.
    #[arg(long)]
    pub delta: Option<f64>,

    /// Class prior probabilities.
    #[arg(long, value_enum, default_value_t = PriorsArg::Empirical)]
    pub priors: PriorsArg,

    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,

    /// Samples to classify; the label column is optional and only used to
    /// report the error count.
    #[arg(long)]
    pub data: PathBuf,

    /// Header name of the label column, if the data has one.
    #[arg(long, default_value = crda::DEFAULT_LABEL_COLUMN)]
    pub label_column: String,

    /// Read --data as features-as-rows; labels optionally from --labels.
    #[arg(long)]
    pub transpose: bool,

    /// One-column label CSV for --transpose.
    #[arg(long)]
    pub labels: Option<PathBuf>,

    /// Also write the per-group discriminant values.
    #[arg(long)]
    pub discriminants: bool,

    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Synthetic configuration to benchmark: I, II, or III.
    #[arg(long, conflicts_with = "data")]
    pub setup: Option<SetupId>,

    /// Benchmark a real dataset instead: repeated random 75/25 splits of
    /// this labeled CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,

    /// Header name of the label column for --data.
    #[arg(long, default_value = crda::DEFAULT_LABEL_COLUMN)]
    pub label_column: String,

    /// Read --data as features-as-rows; labels come from --labels.
    #[arg(long, requires = "labels")]
    pub transpose: bool,

    /// One-column label CSV for --transpose.
    #[arg(long)]
    pub labels: Option<PathBuf>,

    /// Monte Carlo trials (default: 10 for setup III and --data, else 25).
    #[arg(long)]
    pub trials: Option<usize>,

    /// Cross-validation folds (default: 10 for setup III, else 5).
    #[arg(long)]
    pub folds: Option<usize>,

    /// Master seed; per-trial streams derive from it.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Size multiplier on the feature dimension (split sizes stay fixed).
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,

    /// Draw group labels multinomially instead of using exactly equal counts.
    #[arg(long)]
    pub multinomial: bool,

    /// Hyperparameter tuning source: cross-validation on the training split
    /// or the generated hold-out validation split.
    #[arg(long, value_enum, default_value_t = TuningArg::Cv)]
    pub tuning: TuningArg,

    /// Class prior probabilities.
    #[arg(long, value_enum, default_value_t = PriorsArg::Equal)]
    pub priors: PriorsArg,

    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorsArg {
    /// Uniform 1/G priors.
    Equal,
    /// Group proportions of the training data.
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TuningArg {
    Cv,
    Holdout,
}

/// Shrinkage weight: tuned on a grid, plugged in from the closed form, or
/// fixed by the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaArg {
    Cv,
    Lw,
    Fixed(f64),
}

impl FromStr for AlphaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cv" => Ok(AlphaArg::Cv),
            "lw" => Ok(AlphaArg::Lw),
            other => match other.parse::<f64>() {
                Ok(v) if (0.0..1.0).contains(&v) => Ok(AlphaArg::Fixed(v)),
                _ => Err(format!(
                    "expected \"cv\", \"lw\", or a value in [0, 1), got {s:?}"
                )),
            },
        }
    }
}

impl std::fmt::Display for AlphaArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlphaArg::Cv => f.write_str("cv"),
            AlphaArg::Lw => f.write_str("lw"),
            AlphaArg::Fixed(v) => write!(f, "{v}"),
        }
    }
}

/// Sparsity level: tuned on a grid or fixed by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KArg {
    Cv,
    Fixed(usize),
}

impl FromStr for KArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cv" => Ok(KArg::Cv),
            other => match other.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(KArg::Fixed(v)),
                _ => Err(format!("expected \"cv\" or a positive integer, got {s:?}")),
            },
        }
    }
}

impl std::fmt::Display for KArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KArg::Cv => f.write_str("cv"),
            KArg::Fixed(v) => write!(f, "{v}"),
        }
    }
}
