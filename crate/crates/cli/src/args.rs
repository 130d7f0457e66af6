use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use unitroot_core::experiments::McMethod;

#[derive(Debug, Parser)]
#[command(
    name = "unitroot",
    version,
    about = "Bayesian and Dickey-Fuller unit root tests for AR(1) series"
)]
pub struct Cli {
    /// Master seed for every random draw [default: 20201130]
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads, 0 for one per core
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,

    /// Write the result here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Repeat for more logging on standard error
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Markdown,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one AR(1) path
    Simulate(SimulateArgs),
    /// Run the tests on one series
    Test(TestArgs),
    /// Monte Carlo grid over rho and T
    Montecarlo(MonteCarloArgs),
    /// Run the test battery over a panel of series
    Empirical(EmpiricalArgs),
    /// Tabulate the Dickey-Fuller null distribution for one T
    BuildNullTable(NullTableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Start {
    Zero,
    Stationary,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,

    #[arg(long = "T", alias = "t")]
    pub t: usize,

    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,

    /// Fixed starting value; overrides --start
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,

    #[arg(long, value_enum, default_value_t = Start::Zero)]
    pub start: Start,
}

#[derive(Debug, Args)]
pub struct NullTableOptions {
    /// Replications per Dickey-Fuller null table [default: 100000]
    #[arg(long)]
    pub null_reps: Option<usize>,

    /// Directory for cached null tables
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SeriesOptions {
    /// Take logs of the levels first
    #[arg(long)]
    pub log_levels: bool,

    /// Subtract the sample mean first
    #[arg(long)]
    pub demean: bool,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["data", "series"]))]
pub struct TestArgs {
    /// CSV file holding the series
    #[arg(long)]
    pub data: Option<PathBuf>,

    /// Column or id to use when the file holds several series
    #[arg(long)]
    pub id: Option<String>,

    /// Inline series, first value is x0: "1.0,0.8,..."
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub series: Option<Vec<f64>>,

    #[arg(long, value_delimiter = ',', default_value = "svd,svd-star,bic,df,pr-ge1")]
    pub methods: Vec<McMethod>,

    /// Tail constant of the data-driven SVD bound
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    #[arg(long, default_value_t = 1.0)]
    pub prior_odds: f64,

    /// Lower bound of the fixed SVD prior
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub a: f64,

    #[command(flatten)]
    pub transform: SeriesOptions,

    #[command(flatten)]
    pub tables: NullTableOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableLayout {
    Probs,
    LogBf,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9,0.95,0.99,1.0")]
    pub rhos: Vec<f64>,

    #[arg(long = "Ts", alias = "ts", value_delimiter = ',', default_value = "50,100,500")]
    pub ts: Vec<usize>,

    #[arg(long, default_value_t = 2000)]
    pub reps: usize,

    #[arg(long, value_delimiter = ',', default_value = "svd,svd-star,bic,df,pr-ge1")]
    pub methods: Vec<McMethod>,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub a: f64,

    /// Largest T for the posterior tail probability column
    #[arg(long, default_value_t = 200)]
    pub pr_max_t: usize,

    #[arg(long, value_enum, default_value_t = Start::Stationary)]
    pub start: Start,

    #[arg(long, value_enum, default_value_t = TableLayout::Probs)]
    pub layout: TableLayout,

    #[command(flatten)]
    pub tables: NullTableOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Schema {
    Auto,
    Wide,
    Long,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["data", "fetch"]))]
pub struct EmpiricalArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,

    /// Remote series keys to download instead of reading a file
    #[arg(long, value_delimiter = ',')]
    pub fetch: Option<Vec<String>>,

    #[arg(long, value_enum, default_value_t = Schema::Auto)]
    pub schema: Schema,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    #[arg(long, default_value_t = 1.0)]
    pub prior_odds: f64,

    #[command(flatten)]
    pub transform: SeriesOptions,

    #[command(flatten)]
    pub tables: NullTableOptions,

    /// Remote endpoint [default: the ECB data service]
    #[arg(long)]
    pub endpoint: Option<String>,

    /// Remote timeout in seconds [default: 30]
    #[arg(long)]
    pub timeout: Option<f64>,
}

#[derive(Debug, Args)]
pub struct NullTableArgs {
    #[arg(long = "T", alias = "t")]
    pub t: usize,

    #[command(flatten)]
    pub tables: NullTableOptions,
}
