// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "autoknot", version, about = "Free-knot spline regression with automatic knot selection")]
pub struct Cli {
    /// Maximum worker threads (default: available parallelism).
    #[arg(long, global = true, env = "AUTOKNOT_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a spline to (x, y) data or to daily count series.
    Fit(FitArgs),
    /// Run Monte Carlo knot-recovery scenarios.
    Simulate(SimulateArgs),
    /// Evaluate a fitted model from `fit` JSON at new x values.
    Predict(PredictArgs),
    /// Three-knot illustration: truth, a crowded 11-knot fit, and the automatic fit.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    #[value(alias = "truncated-power")]
    Tp,
    Bspline,
    Natural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BandArg {
    Confidence,
    Prediction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlignArg {
    End,
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
    Svg,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, value_enum)]
    pub basis: Option<BasisArg>,
    /// Polynomial degree (natural splines are always cubic).
    #[arg(long)]
    pub degree: Option<usize>,
    /// Fixed penalty weight per knot.
    #[arg(long, conflicts_with = "cv_grid")]
    pub lambda: Option<f64>,
    /// Choose lambda by cross-validation over these values.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub cv_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 5, requires = "cv_grid")]
    pub cv_folds: usize,
    #[arg(long, default_value_t = 0, requires = "cv_grid")]
    pub cv_seed: u64,
    /// Minimum knot spacing, bounds included (default 15, or 7 days for series).
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub k_max: usize,
    #[arg(long, default_value_t = 2)]
    pub patience: usize,
    /// Uniform knot grid spacing instead of the observed x values.
    #[arg(long)]
    pub grid_resolution: Option<f64>,
    /// Leading fraction of the domain closed to knots (default 0, or 0.1 for series).
    #[arg(long)]
    pub exclude_left_frac: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file with a header row.
    pub input: PathBuf,

    #[command(flatten)]
    pub search: SearchArgs,

    #[arg(long, default_value = "x")]
    pub x_column: String,
    #[arg(long, default_value = "y")]
    pub y_column: String,

    /// Treat the input as daily counts on this scale (implied by the other
    /// series options).
    #[arg(long, value_enum)]
    pub scale: Option<ScaleArg>,
    /// Series to fit; repeatable (default: every series in the file).
    #[arg(long)]
    pub country: Vec<String>,
    #[arg(long)]
    pub ma_window: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long, value_enum)]
    pub band: Option<BandArg>,
    #[arg(long, value_enum)]
    pub align: Option<AlignArg>,
    /// Also fit the first window-1 shorter-window averages.
    #[arg(long)]
    pub fit_warmup: bool,
    #[arg(long)]
    pub date_column: Option<String>,
    #[arg(long)]
    pub count_column: Option<String>,
    #[arg(long)]
    pub label_column: Option<String>,
    /// chrono format string for dates (default day-first, %d/%m/%Y).
    #[arg(long)]
    pub date_format: Option<String>,

    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

impl FitArgs {
    pub fn is_series(&self) -> bool {
        self.scale.is_some()
            || !self.country.is_empty()
            || self.ma_window.is_some()
            || self.horizon.is_some()
            || self.date_column.is_some()
            || self.count_column.is_some()
            || self.label_column.is_some()
            || self.date_format.is_some()
            || self.align.is_some()
            || self.fit_warmup
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML scenario file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Bundled scenario name, e.g. three-knots-snr9-n100; repeatable.
    #[arg(long)]
    pub scenario: Vec<String>,
    /// List bundled scenario names and exit.
    #[arg(long)]
    pub list: bool,
    #[arg(long)]
    pub replications: Option<usize>,
    /// Base seed; drawn at random and recorded when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Include wall-clock timings (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// JSON written by `fit` for (x, y) data.
    #[arg(long)]
    pub model: PathBuf,
    /// Points at which to evaluate.
    #[arg(long, value_delimiter = ',', num_args = 1.., required_unless_present = "input")]
    pub x: Vec<f64>,
    /// CSV with the evaluation points.
    #[arg(long, conflicts_with = "x")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "x")]
    pub x_column: String,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value_t = autoknot::sim::DEMO_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = autoknot::sim::DEMO_N)]
    pub n: usize,
    #[arg(long, default_value_t = autoknot::sim::DEMO_SNR)]
    pub snr: f64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
