use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tmes_core::{CiMethod, TmesError};

mod commands;
mod config;
mod model;

/// Time-lagged marginal expected shortfall: simulation, estimation,
/// stationary-bootstrap bands, oracles and rolling windows.
#[derive(Parser, Debug)]
#[command(name = "tmes", version)]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate an (x, y) path from one of the model classes.
    Simulate(SimulateArgs),
    /// Empirical TMES curve of a CSV pair.
    Estimate(EstimateArgs),
    /// TMES curve with stationary-bootstrap bands.
    Bootstrap(BootstrapArgs),
    /// Closed-form, numerical and Monte-Carlo reference values (JSON).
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Moving-window centered TMES with bootstrap bands.
    Window(WindowArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// JSON config, or a previous output file whose embedded config is reused.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Mma,
    #[value(alias = "arma-copula")]
    Arma,
    #[value(alias = "garch-copula")]
    Garch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CopulaName {
    Gaussian,
    #[value(alias = "t")]
    StudentT,
}

#[derive(Args, Debug, Default)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    /// Tail index of the Fréchet innovations (mma, arma).
    #[arg(long)]
    pub xi: Option<f64>,
    /// MMA weight base, or ARMA autoregressive coefficient.
    #[arg(long)]
    pub phi: Option<f64>,
    /// MMA truncation radius (default: where weights fall below 1e-6).
    #[arg(long)]
    pub trunc: Option<usize>,
    /// ARMA moving-average coefficient.
    #[arg(long)]
    pub theta_ma: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Copula family coupling x to y (arma, garch).
    #[arg(long, value_enum)]
    pub copula: Option<CopulaName>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Student-t copula degrees of freedom.
    #[arg(long)]
    pub df: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct PairArgs {
    /// CSV file with the two series as columns.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub x_col: Option<String>,
    #[arg(long)]
    pub y_col: Option<String>,
    #[arg(long)]
    pub m_n: Option<usize>,
    /// Comma-separated lags.
    #[arg(long, value_delimiter = ',', conflicts_with = "h_max")]
    pub lags: Option<Vec<usize>>,
    /// Shorthand for lags 0..=H.
    #[arg(long)]
    pub h_max: Option<usize>,
    /// Subtract the sample mean of x.
    #[arg(long)]
    pub centered: bool,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ResampleArgs {
    /// Geometric block parameter; mean block length is 1/theta.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Number of bootstrap replicates.
    #[arg(long = "B", alias = "b")]
    pub b: Option<usize>,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long, value_parser = parse_ci)]
    pub ci: Option<CiMethod>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_ci(s: &str) -> Result<CiMethod, String> {
    s.parse()
}

#[derive(Args, Debug)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[command(flatten)]
    pub resample: ResampleArgs,
    /// Also write all replicates as CSV.
    #[arg(long)]
    pub replicates: Option<PathBuf>,
    /// Also write normal QQ pairs as CSV.
    #[arg(long)]
    pub qq: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct WindowArgs {
    /// One CSV holding the date, x and y columns.
    #[arg(long, short, conflicts_with_all = ["x_file", "y_file"])]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub x_file: Option<PathBuf>,
    #[arg(long)]
    pub y_file: Option<PathBuf>,
    #[arg(long)]
    pub date_col: Option<String>,
    #[arg(long)]
    pub x_col: Option<String>,
    #[arg(long)]
    pub y_col: Option<String>,
    /// How to reconcile the two calendars: intersect | error-on-gap.
    #[arg(long)]
    pub align: Option<String>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub lags: Option<Vec<usize>>,
    #[arg(long)]
    pub m_n: Option<usize>,
    #[command(flatten)]
    pub resample: ResampleArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct OracleOut {
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// JSON parameters, or a previous oracle output whose params are reused.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// Closed-form extremogram of the Fréchet ARMA(1,1).
    ArmaExtremogram {
        #[arg(long)]
        h: Option<usize>,
        #[arg(long)]
        phi: Option<f64>,
        #[arg(long)]
        theta_ma: Option<f64>,
        #[arg(long)]
        xi: Option<f64>,
        #[command(flatten)]
        out: OracleOut,
    },
    /// TMES of the max-moving average by numerical integration.
    MmaDelta {
        #[arg(long)]
        h: Option<usize>,
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long)]
        phi: Option<f64>,
        #[arg(long)]
        m_n: Option<usize>,
        /// Trapezoid step (default 1e-3 times the threshold).
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        cutoff: Option<f64>,
        #[arg(long)]
        trunc: Option<usize>,
        #[command(flatten)]
        out: OracleOut,
    },
    /// MMA marginal CDF, or the joint CDF of (X_t, Y_{t-h}) when --y is set.
    MmaCdf {
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        y: Option<f64>,
        #[arg(long)]
        h: Option<usize>,
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long)]
        phi: Option<f64>,
        #[arg(long)]
        trunc: Option<usize>,
        #[command(flatten)]
        out: OracleOut,
    },
    /// (1 - rho(h)) E[X] + rho(h) delta(0).
    CopulaDelta {
        #[arg(long)]
        rho_h: Option<f64>,
        #[arg(long)]
        mean_x: Option<f64>,
        #[arg(long)]
        delta0: Option<f64>,
        #[command(flatten)]
        out: OracleOut,
    },
    /// Monte-Carlo E[X_{t+h} | Y_t > a] at level 1 - 1/m_n.
    McDelta0 {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        m_n: Option<usize>,
        #[arg(long)]
        h: Option<usize>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        path_len: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OracleOut,
    },
}

/// A failure and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, parameters or inputs (exit 2).
    Usage(String),
    /// IO and numerical failures (exit 1).
    Runtime(String),
}

impl From<TmesError> for Failure {
    fn from(e: TmesError) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Bootstrap(a) => commands::bootstrap(a),
        Command::Oracle(o) => commands::oracle(o),
        Command::Window(a) => commands::window(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
