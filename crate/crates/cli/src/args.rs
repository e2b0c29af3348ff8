use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Form-parse evaluation, prediction cleanup and synthetic form generation.
#[derive(Debug, Parser)]
#[command(name = "formkit", version)]
pub struct Cli {
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score a directory of predicted parses against ground truth.
    Eval(EvalArgs),
    /// Generate a synthetic form corpus.
    Gen(GenArgs),
    /// Collapse repeats in and repair one predicted parse.
    Clean(CleanArgs),
    /// Print TED, nTED and GAnTED between two parse files.
    Ted(TedArgs),
}

#[derive(Debug, Args, Clone)]
pub struct ScoreArgs {
    /// Sibling displacement window of the alignment pass.
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    /// Number of alignment passes.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub passes: u64,
    /// Cap on table-orientation combinations tried per document.
    #[arg(long, default_value_t = 1024)]
    pub max_combos: usize,
    /// Accept tables without cells.
    #[arg(long)]
    pub lenient_tables: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub pred_dir: PathBuf,
    pub gt_dir: PathBuf,
    #[command(flatten)]
    pub score: ScoreArgs,
    /// Largest normalized edit distance an entity match may have.
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    /// Match entities only within their class.
    #[arg(long)]
    pub per_class: bool,
    /// Collapse degenerate repeats in predictions first.
    #[arg(long)]
    pub collapse: bool,
    /// Repair predictions that do not parse.
    #[arg(long)]
    pub repair: bool,
    /// Report file.
    #[arg(long, short, default_value = "report.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also write an SVG per page.
    #[arg(long)]
    pub svg: bool,
    /// Directory with content pool files.
    #[arg(long, env = "FORMKIT_POOLS")]
    pub pools: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    pub table_probability: f64,
    #[arg(long, default_value_t = 768.0)]
    pub width: f64,
    #[arg(long, default_value_t = 1152.0)]
    pub height: f64,
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    pub input: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_collapse: bool,
    #[arg(long)]
    pub no_repair: bool,
    #[arg(long, default_value_t = 8)]
    pub min_period: usize,
    #[arg(long, default_value_t = 5)]
    pub min_reps: usize,
    #[arg(long)]
    pub lenient_tables: bool,
}

#[derive(Debug, Args)]
pub struct TedArgs {
    pub pred: PathBuf,
    pub gt: PathBuf,
    #[command(flatten)]
    pub score: ScoreArgs,
}
