use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "debtlab", version, about = "Regression model laboratory for unsecured-debt data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset and write the four variants A-D.
    Gen(Common),
    /// Cross-validate every model family on every dataset variant.
    Compare(CompareArgs),
    /// Plan factor/class-defined networks and cross-validate them.
    Topdnn(TopDnnArgs),
    /// Fit OLS on one variant and write residual diagnostics.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Rows to generate (ignored with --data).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub rows: Option<u64>,
    /// Run seed; every random draw derives from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default: runs/<command>-<seed>).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// TOML or JSON config file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Transformed dataset CSV with `udebt` and `class` columns, instead of
    /// generating one.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// Cross-validation folds.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub folds: Option<u64>,
    /// Comma-separated model families: linreg, forest, backprop, rprop.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,
    /// Comma-separated dataset variants (A, B, C, D).
    #[arg(long, value_delimiter = ',')]
    pub variant: Option<Vec<String>>,
}

#[derive(Debug, Clone, Args)]
pub struct TopDnnArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub folds: Option<u64>,
    /// Only the factor-layer network.
    #[arg(long)]
    pub no_class_layer: bool,
    /// Start the first weight layer at the factor loadings.
    #[arg(long)]
    pub loading_init: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub common: Common,
    /// Dataset variant to fit (default D).
    #[arg(long)]
    pub variant: Option<String>,
    /// Predictor for the partial-residual series (default housingfactor).
    #[arg(long)]
    pub partial: Option<String>,
}
