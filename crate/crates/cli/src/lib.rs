//! Command-line front end: ingestion, analysis, and reporting over the
//! publication-count panel formats.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 numerical failure. Every subcommand writes only to its declared
//! output paths, and identical inputs produce identical output bytes.

pub mod commands;
pub mod report;

use clap::{Parser, Subcommand, ValueEnum};
use pubtrends_core::io::IngestError;
use pubtrends_core::panel::Year;
use pubtrends_core::synth::SynthError;
use pubtrends_core::{HcVariant, RegressError};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<RegressError> for CliError {
    fn from(e: RegressError) -> Self {
        match e {
            RegressError::Tdist(_) => CliError::Numeric(e.to_string()),
            RegressError::InvalidLevel(_) | RegressError::InvalidTopK => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::InvalidSpec(_) => CliError::Usage(e.to_string()),
            SynthError::Regress(inner) => inner.into(),
        }
    }
}

impl From<pubtrends_core::StatsError> for CliError {
    fn from(e: pubtrends_core::StatsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<pubtrends_core::chart::ChartError> for CliError {
    fn from(e: pubtrends_core::chart::ChartError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum HcArg {
    Hc0,
    #[default]
    Hc1,
}

impl From<HcArg> for HcVariant {
    fn from(v: HcArg) -> Self {
        match v {
            HcArg::Hc0 => HcVariant::Hc0,
            HcArg::Hc1 => HcVariant::Hc1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKindArg {
    Spaghetti,
    Hist,
    Box,
    Ci,
    Scatter,
}

/// Shared fitting flags.
#[derive(Debug, Clone, clap::Args)]
pub struct FitFlags {
    /// Year mapped to T = 0 (default: first year in the data).
    #[arg(long)]
    pub baseline_year: Option<Year>,
    /// Robust variance flavor.
    #[arg(long, value_enum, default_value_t)]
    pub hc: HcArg,
    /// Confidence level for slope intervals.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Debug, Parser)]
#[command(
    name = "pubtrends",
    version,
    about = "Trend analytics for balanced panels of annual publication counts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-year key figures of the counts across fields.
    Describe {
        /// Counts CSV (`-` for stdin).
        #[arg(long)]
        input: String,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Key figures of the year-over-year differences.
    Diffs {
        #[arg(long)]
        input: String,
        /// Also list one field's counts and differences.
        #[arg(long)]
        field: Option<String>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Growth fits per field with robust standard errors.
    Fit {
        #[arg(long)]
        input: String,
        #[command(flatten)]
        fit: FitFlags,
        /// Years of slope behind the projected-change column
        /// (default: the fitted range's interval count).
        #[arg(long, allow_hyphen_values = true)]
        multiplier: Option<f64>,
        /// Write the full fit records as JSON.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Fields ranked by slope with confidence intervals.
    Rank {
        #[arg(long)]
        input: String,
        #[command(flatten)]
        fit: FitFlags,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Controlled-term frequencies and fits within one field.
    Drilldown {
        #[arg(long)]
        input: String,
        /// Controlled-term CSV.
        #[arg(long)]
        ct: PathBuf,
        #[arg(long)]
        field: String,
        /// Focus year for the frequency table.
        #[arg(long)]
        year: Year,
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[command(flatten)]
        fit: FitFlags,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Render one chart as SVG.
    Plot {
        #[arg(long, value_enum)]
        kind: PlotKindArg,
        #[arg(long)]
        input: String,
        #[arg(long)]
        out: PathBuf,
        /// Controlled-term CSV; with --field, plots term series instead
        /// of fields.
        #[arg(long)]
        ct: Option<PathBuf>,
        #[arg(long)]
        field: Option<String>,
        /// Histogram: restrict to this year's differences. Drill-down:
        /// focus year (default: last year).
        #[arg(long)]
        year: Option<Year>,
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Histogram bin count (default: Sturges).
        #[arg(long)]
        bins: Option<usize>,
        /// Spaghetti: include the aggregate TOTAL series.
        #[arg(long, default_value_t = false)]
        total: bool,
        #[arg(long, default_value_t = 900)]
        width: u32,
        #[arg(long, default_value_t = 540)]
        height: u32,
        #[command(flatten)]
        fit: FitFlags,
    },
    /// Generate a synthetic panel with known ground truth.
    Simulate {
        #[arg(long)]
        fields: usize,
        #[arg(long)]
        years: usize,
        #[arg(long, default_value_t = 2014)]
        first_year: Year,
        /// Intercept range, e.g. `500,110000`.
        #[arg(long, allow_hyphen_values = true)]
        intercepts: String,
        /// Slope range, e.g. `-1700,5300`.
        #[arg(long, allow_hyphen_values = true)]
        slopes: String,
        #[arg(long)]
        noise: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Run a confidence-interval coverage experiment.
        #[arg(long)]
        coverage_trials: Option<usize>,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, value_enum, default_value_t)]
        hc: HcArg,
    },
    /// Uniformly sample titles for one field, term, and year.
    SampleTitles {
        #[arg(long)]
        titles: String,
        #[arg(long)]
        field: String,
        #[arg(long)]
        ct: String,
        #[arg(long)]
        year: Year,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Write the full table/chart bundle into a directory.
    Report {
        #[arg(long)]
        input: String,
        #[arg(long)]
        out: PathBuf,
        /// Controlled-term CSV for a drill-down section.
        #[arg(long)]
        ct: Option<PathBuf>,
        #[arg(long)]
        field: Option<String>,
        /// Drill-down focus year (default: last year).
        #[arg(long)]
        year: Option<Year>,
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Comma-separated chart list (default: all feasible).
        #[arg(long)]
        charts: Option<String>,
        #[arg(long)]
        bins: Option<usize>,
        #[command(flatten)]
        fit: FitFlags,
    },
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    commands::dispatch(cli.command)
}
