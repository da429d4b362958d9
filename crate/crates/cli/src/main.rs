mod commands;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::CliError;
use crate::table::Table;

#[derive(Debug, Parser)]
#[command(name = "sld-correl", version, about = "Sharp large-deviation tails of the correlation coefficient")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    #[value(name = "spherical-centered")]
    SphericalCentered,
    #[value(name = "spherical-known")]
    SphericalKnown,
    #[value(name = "gaussian")]
    Gaussian,
    #[value(name = "gaussian-known-rho0")]
    GaussianKnownRho0,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ScenarioArg::SphericalCentered)]
    pub scenario: ScenarioArg,
    /// Population correlation (gaussian scenario only).
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    /// Monte Carlo sample count (0 disables simulation where optional).
    #[arg(long, default_value_t = 0)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of independent random streams, also the worker count.
    #[arg(long, default_value_t = sld_correl::montecarlo::DEFAULT_PARTITIONS)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// rho = rho0 - 0.1 (convex rate function).
    Below,
    /// rho = rho0 + 0.1 (convexity lost).
    Above,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sharp large-deviation approximation of P(R_n >= c).
    Approx {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
    },
    /// SLD against quadrature (and optionally simulation) over several sizes.
    Compare {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', default_value = "20,40,80,160")]
        n_list: Vec<usize>,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Gaussian rate function and its second derivative on a grid.
    Rate {
        #[arg(long, allow_hyphen_values = true, conflicts_with = "figure")]
        rho: Option<f64>,
        /// Use rho0 -/+ 0.1.
        #[arg(long, value_enum)]
        figure: Option<Figure>,
        #[arg(long, default_value_t = 2001)]
        points: usize,
    },
    /// Bahadur slope, KL infimum and optionally a p-value.
    Bahadur {
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        /// Sample size for the p-value.
        #[arg(long, requires = "r_obs")]
        n: Option<usize>,
        /// Observed coefficient for the p-value.
        #[arg(long, requires = "n")]
        r_obs: Option<f64>,
        /// Use the known-mean null instead of the centred one.
        #[arg(long)]
        known_mean: bool,
    },
    /// Monte Carlo estimate of P(R_n >= c).
    Mc {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[command(flatten)]
        mc: McArgs,
    },
    /// P(R_n >= c) by quadrature of the exact density.
    Exact {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        /// Also report (1/n) log E exp(n lambda R_n).
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
    },
    /// Laplace coefficients on Gaussian moments against their exact values.
    LaplaceDemo {
        #[arg(long, default_value_t = 1)]
        order: usize,
    },
}

fn run(cli: &Cli) -> Result<Table, CliError> {
    match &cli.command {
        Command::Approx { model, n, c } => commands::approx(model, *n, *c),
        Command::Compare { model, n_list, c, mc } => commands::compare(model, n_list, *c, mc),
        Command::Rate { rho, figure, points } => commands::rate(*rho, *figure, *points),
        Command::Bahadur { rho, n, r_obs, known_mean } => commands::bahadur(*rho, *n, *r_obs, *known_mean),
        Command::Mc { model, n, c, mc } => commands::mc(model, *n, *c, mc),
        Command::Exact { model, n, c, lambda } => commands::exact(model, *n, *c, *lambda),
        Command::LaplaceDemo { order } => commands::laplace_demo(*order),
    }
}

fn emit(cli: &Cli, table: &Table) -> io::Result<()> {
    let sink: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match cli.format {
        Format::Csv => table.write_csv(&mut sink).map_err(io::Error::other)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, &table.to_json())?;
            writeln!(sink)?;
        }
    }
    sink.flush()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SLD_CORREL_LOG", "warn")).init();
    let cli = Cli::parse();
    let table = match run(&cli) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    if let Err(e) = emit(&cli, &table) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
