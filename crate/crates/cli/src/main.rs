mod commands;
mod output;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use dendro_evo::clustering::{Method, Metric};
use dendro_evo::render::{Colormap, Orientation};

#[derive(Parser, Debug)]
#[command(name = "dendro-evo", version, about = "Score, explain and draw hierarchical clusterings with evolutionary models")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "DENDRO_EVO_THREADS")]
    threads: Option<usize>,

    /// More log output (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score clustering recipes: CVL, FOM, COPH, ARI, F1 and per-feature losses.
    Score(ScoreArgs),
    /// Feature importance on one dendrogram, as a table and a bar chart.
    Importance(ImportanceArgs),
    /// Draw evolutionary dendrograms for selected features.
    Render(RenderArgs),
    /// Generate synthetic datasets.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Rank correlation of each score with F1 over the 33-recipe grid.
    Benchmark(BenchmarkArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct InputArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Column holding reference classes.
    #[arg(long)]
    pub label: Option<String>,
    /// Columns to treat as categorical.
    #[arg(long, value_delimiter = ',')]
    pub categorical: Vec<String>,
    /// Columns to treat as continuous.
    #[arg(long, value_delimiter = ',')]
    pub continuous: Vec<String>,
    /// Columns to drop.
    #[arg(long, value_delimiter = ',')]
    pub ignore: Vec<String>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RecipeArgs {
    /// Skip z-scoring continuous columns before computing distances.
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Linkage methods (default: the 11-method grid).
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "euclidean")]
    pub metrics: Vec<Metric>,
    /// Clusters for FOM and ARI (default: number of labels).
    #[arg(long)]
    pub k: Option<usize>,
    /// Match clusters to labels one-to-one instead of by majority.
    #[arg(long)]
    pub hungarian: bool,
    #[command(flatten)]
    pub recipe: RecipeArgs,
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct ImportanceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "ward.D2")]
    pub method: Method,
    #[arg(long, default_value = "euclidean")]
    pub metric: Metric,
    #[command(flatten)]
    pub recipe: RecipeArgs,
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct RenderArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "ward.D2")]
    pub method: Method,
    #[arg(long, default_value = "euclidean")]
    pub metric: Metric,
    /// Features to draw (default: all).
    #[arg(long, value_delimiter = ',')]
    pub features: Vec<String>,
    /// Dataset name used in file names (default: input file stem).
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long, default_value = "viridis")]
    pub colormap: Colormap,
    #[arg(long, default_value = "horizontal")]
    pub orientation: Orientation,
    #[arg(long, default_value_t = 800.0)]
    pub width: f64,
    #[arg(long, default_value_t = 600.0)]
    pub height: f64,
    #[arg(long, default_value_t = 16)]
    pub samples_per_edge: usize,
    #[arg(long)]
    pub no_legend: bool,
    #[arg(long, default_value_t = 10.0)]
    pub font_size: f64,
    #[command(flatten)]
    pub recipe: RecipeArgs,
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum SimulateCommand {
    /// Features evolving down a complete binary tree.
    Tree(SimTreeArgs),
    /// Two labeled Gaussian clusters in the plane.
    Gaussians(SimGaussiansArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SimTreeArgs {
    #[arg(long, default_value_t = 7)]
    pub depth: u32,
    /// Per-feature noise bases (default: 0.25, 0.5, 1, 2, 4, 8).
    #[arg(long, value_delimiter = ',')]
    pub sigma: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Read sigma^k as a standard deviation instead of a variance.
    #[arg(long)]
    pub sd_noise: bool,
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SimGaussiansArgs {
    #[arg(long, default_value_t = 250)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct BenchmarkArgs {
    /// Labeled CSV files, one dataset each. Write `path:COLUMN` to name the
    /// label column of a single file.
    #[arg(long, value_delimiter = ',')]
    pub inputs: Vec<String>,
    /// Label column for inputs without an explicit `:COLUMN`.
    #[arg(long)]
    pub label: Option<String>,
    /// Also benchmark a simulated two-Gaussian dataset of this size.
    #[arg(long)]
    pub simulated: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub hungarian: bool,
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().context("starting worker pool")?;
    pool.install(|| match &cli.command {
        Command::Score(a) => commands::score(a),
        Command::Importance(a) => commands::importance(a),
        Command::Render(a) => commands::render(a),
        Command::Simulate(SimulateCommand::Tree(a)) => commands::simulate_tree(a),
        Command::Simulate(SimulateCommand::Gaussians(a)) => commands::simulate_gaussians(a),
        Command::Benchmark(a) => commands::benchmark(a),
    })
}
