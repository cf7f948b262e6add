//! Batch command-line front end for the irradiance model.

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "irradiance", version, about = "Fit, simulate and validate stochastic daily irradiance models")]
pub struct Cli {
    /// TOML configuration file; command-line flags override its values.
    #[arg(long, global = true, env = config::CONFIG_ENV)]
    pub config: Option<PathBuf>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model from measured GHI series.
    Fit(FitArgs),
    /// Simulate irradiance curves and daily exposures from a model.
    Simulate(SimulateArgs),
    /// Compare measured PV charge with simulated charge statistics.
    Validate(ValidateArgs),
    /// Render SVG plots and their data from pipeline outputs.
    Plot(PlotArgs),
    /// Write a synthetic dataset and PV charges drawn from a model.
    Generate(GenerateArgs),
}

#[derive(Debug, Args, Default)]
pub struct FitArgs {
    /// Input CSV files (`t_min,irradiance_wm2` or `day,minute,irradiance_wm2`).
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Characteristic time in minutes.
    #[arg(long)]
    pub m_c: Option<f64>,
    /// Half-width N of the trimmed moving average.
    #[arg(long)]
    pub tma_n: Option<usize>,
    /// Number L of lowest-aggregate days removed from each window.
    #[arg(long)]
    pub tma_l: Option<usize>,
    /// Nominal sampling cadence in minutes.
    #[arg(long)]
    pub cadence_min: Option<u32>,
    /// Added to every day index read from the input.
    #[arg(long)]
    pub day_offset: Option<u32>,
}

#[derive(Debug, Args, Default)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Day `D` or inclusive range `A-B`; repeatable. Defaults to 0-364.
    #[arg(long = "day")]
    pub days: Vec<String>,
    #[arg(long)]
    pub replicates: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub cadence_min: Option<u32>,
    /// Fix every stochastic term at zero.
    #[arg(long)]
    pub deterministic: bool,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct ValidateArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Measured charges, CSV `day,charge_ah`.
    #[arg(long)]
    pub measured: PathBuf,
    /// Panel datasheet (TOML). Defaults to the Solartec S60PC-250.
    #[arg(long)]
    pub panel: Option<PathBuf>,
    /// Panels in series.
    #[arg(long)]
    pub series: Option<u32>,
    /// Ambient temperature for the NOCT cell-temperature rule; 25 °C cells if absent.
    #[arg(long)]
    pub ambient_c: Option<f64>,
    /// Restrict to these days (`D` or `A-B`); must match the measured days.
    #[arg(long = "day")]
    pub days: Vec<String>,
    #[arg(long)]
    pub replicates: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub cadence_min: Option<u32>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    /// Scaled KDE probability map per season (model file).
    Pdm,
    /// Discrete probability map per season (model file).
    Discrete,
    /// Daily exposure line chart (`day,exposure_whm2`).
    Exposure,
    /// Box-and-whisker charge statistics (statistics or comparison CSV).
    Boxes,
    /// Fitted daily parameters (`day,A,B,C`).
    Params,
    /// Residual histogram (`bin_left,bin_right,count,pdf_scaled`).
    Histogram,
    /// Irradiance curves (`day,minute,irradiance_wm2`).
    Curves,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Model file or CSV produced by another command.
    pub artifact: PathBuf,
    #[arg(long, value_enum)]
    pub kind: PlotKind,
    /// Season id for map plots; all seasons if absent.
    #[arg(long)]
    pub season: Option<u8>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct GenerateArgs {
    /// Generator model; the built-in reference model if absent.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Replace the model's maps by narrow rate columns of this spread.
    #[arg(long)]
    pub concentrated: Option<f64>,
    #[arg(long = "day")]
    pub days: Vec<String>,
    #[arg(long)]
    pub cadence_min: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replicates per day behind `median_charges.csv`; 0 skips it.
    #[arg(long)]
    pub replicates: Option<u32>,
    #[arg(long)]
    pub panel: Option<PathBuf>,
    #[arg(long)]
    pub series: Option<u32>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

pub fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
}

pub fn run(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => config::PipelineConfig::load(p)?,
        None => config::PipelineConfig::default(),
    };
    match cli.command {
        Command::Fit(a) => commands::fit(&a, &cfg),
        Command::Simulate(a) => commands::simulate(&a, &cfg),
        Command::Validate(a) => commands::validate(&a, &cfg),
        Command::Plot(a) => commands::plot(&a, &cfg),
        Command::Generate(a) => commands::generate(&a, &cfg),
    }
}
