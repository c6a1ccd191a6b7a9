use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

mod commands;
mod output;

/// Euler characteristic surfaces of time series: extraction, distances,
/// interpretable classification and the Rössler regime experiment.
#[derive(Debug, Parser)]
#[command(name = "ecs-tda", version)]
struct Cli {
    /// Re-run the command recorded in a manifest.json
    #[arg(long)]
    manifest: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads (does not change any output)
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Write one ECS dump per sample
    Ecs(EcsArgs),
    /// Train a stump or AdaBoost model and evaluate it on the test split
    Classify(ClassifyArgs),
    /// Periodic-versus-chaotic Rössler distance experiment
    Rossler(RosslerArgs),
    /// Pairwise Euler distances between the surfaces of one split
    Distances(DistancesArgs),
    /// Cross-validated scan over square grids
    GridSearch(GridSearchArgs),
    /// Tabulate report.json files from earlier classify runs
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SourceArgs {
    /// Dataset name in the registry
    #[arg(long, conflicts_with_all = ["train", "test"])]
    pub dataset: Option<String>,
    /// Registry JSON (defaults to the built-in one)
    #[arg(long)]
    pub registry: Option<PathBuf>,
    /// Root for registry paths
    #[arg(long, env = "ECS_TDA_DATA_DIR", default_value = ".")]
    pub data_dir: PathBuf,
    /// UCR training file
    #[arg(long, requires = "test")]
    pub train: Option<PathBuf>,
    /// UCR test file
    #[arg(long, requires = "train")]
    pub test: Option<PathBuf>,
    /// Original label treated as class 1 when reading --train/--test
    #[arg(long, allow_hyphen_values = true)]
    pub positive: Option<i64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EmbedArgs {
    /// Embedding dimension (default: false nearest neighbours)
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=4))]
    pub m: Option<u32>,
    /// Time delay
    #[arg(long)]
    pub tau: Option<usize>,
    /// Largest filtration radius (default: half the median cloud diameter)
    #[arg(long)]
    pub rmax: Option<f64>,
    /// z-normalize each series before embedding
    #[arg(long)]
    pub znorm: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Stump,
    Adaboost,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EcsArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub embed: EmbedArgs,
    /// Clean Rössler series with this c (`2.3` or `c=2.3`) instead of a dataset
    #[arg(long, conflicts_with_all = ["dataset", "train"], value_parser = parse_rossler_c)]
    pub rossler: Option<f64>,
    /// Number of windows
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Number of radii
    #[arg(long, default_value_t = 10)]
    pub r: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub embed: EmbedArgs,
    #[arg(long, value_enum, default_value_t = ModelArg::Stump)]
    pub model: ModelArg,
    /// Number of windows (fixed grid)
    #[arg(long, conflicts_with = "scan")]
    pub k: Option<usize>,
    /// Number of radii (fixed grid)
    #[arg(long, conflicts_with = "scan")]
    pub r: Option<usize>,
    /// Pick a square grid by stratified cross-validation
    #[arg(long)]
    pub scan: bool,
    #[arg(long, default_value_t = 2)]
    pub scan_min: usize,
    #[arg(long, default_value_t = 10)]
    pub scan_max: usize,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// AdaBoost rounds (default K·R)
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RosslerArgs {
    /// Noisy realizations per regime
    #[arg(long, default_value_t = 100)]
    pub realizations: usize,
    /// Largest noise level as a fraction of the amplitude
    #[arg(long, default_value_t = 0.10)]
    pub noise_max: f64,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub r: usize,
    #[arg(long)]
    pub rmax: Option<f64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub p: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitArg {
    Train,
    Test,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DistancesArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub embed: EmbedArgs,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub r: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub p: u32,
    #[arg(long, value_enum, default_value_t = SplitArg::Train)]
    pub split: SplitArg,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GridSearchArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub embed: EmbedArgs,
    #[arg(long, value_enum, default_value_t = ModelArg::Stump)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 2)]
    pub scan_min: usize,
    #[arg(long, default_value_t = 10)]
    pub scan_max: usize,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReportArgs {
    /// Output directories of classify runs
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
}

fn parse_rossler_c(s: &str) -> Result<f64, String> {
    let v = s.strip_prefix("c=").unwrap_or(s);
    v.parse::<f64>().map_err(|e| format!("{v}: {e}"))
}

/// Bad flags or inputs; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use ecs_tda::{classify, data, dynamics, ecs, embedding, geometry};
    for cause in err.chain() {
        if cause.is::<UsageError>()
            || cause.is::<data::DataError>()
            || cause.is::<embedding::EmbeddingError>()
            || cause.is::<classify::ClassifyError>()
            || cause.is::<dynamics::DynamicsError>()
            || cause.is::<serde_json::Error>()
        {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<ecs_tda::Error>() {
            return if e.is_user_error() { 2 } else { 1 };
        }
        if let Some(e) = cause.downcast_ref::<ecs::EcsError>() {
            return if matches!(e, ecs::EcsError::Geometry(_)) { 1 } else { 2 };
        }
        if cause.is::<geometry::GeometryError>() {
            return 1;
        }
    }
    1
}

fn run(cli: Cli) -> Result<()> {
    let command = match (cli.manifest, cli.command) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| UsageError(format!("cannot read manifest {}: {e}", path.display())))?;
            output::Manifest::parse(&text)
                .with_context(|| format!("invalid manifest {}", path.display()))?
                .invocation
        }
        (None, Some(c)) => c,
        (Some(_), Some(_)) => bail!(UsageError("--manifest replaces the subcommand; give one or the other".into())),
        (None, None) => bail!(UsageError("a subcommand or --manifest is required".into())),
    };
    let pool = match cli.workers {
        Some(0) => bail!(UsageError("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?,
        None => rayon::ThreadPoolBuilder::new().build()?,
    };
    pool.install(|| commands::dispatch(&command, &cli.out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn invocation_round_trips_through_json() {
        let cli = Cli::parse_from(["ecs-tda", "classify", "--dataset", "ECG200", "--model", "adaboost", "--k", "6", "--r", "6"]);
        let cmd = cli.command.unwrap();
        let text = serde_json::to_string(&cmd).unwrap();
        let back: Command = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        assert!(text.starts_with(r#"{"command":"classify""#));
    }

    #[test]
    fn rossler_flag_accepts_both_spellings() {
        for arg in ["c=2.3", "2.3"] {
            let cli = Cli::parse_from(["ecs-tda", "ecs", "--rossler", arg]);
            let Some(Command::Ecs(a)) = cli.command else { panic!() };
            assert_eq!(a.rossler, Some(2.3));
        }
    }
}
