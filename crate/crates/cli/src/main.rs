//! `tcolor`: build, inspect and attack periodic red/blue colorings of E^n.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use torus_coloring::separated::{Strategy, DEFAULT_REFINE_DEPTH, SITE_SEPARATION};

use crate::report::{render, Format, Record};

#[derive(Parser, Debug, Serialize)]
#[command(name = "tcolor", version, about = "Randomized periodic two-colorings with no red unit pair")]
pub struct Cli {
    /// Report format written to standard output.
    #[arg(long, value_enum, default_value = "text", global = true)]
    pub format: Format,

    /// Worker threads; results do not depend on it.
    #[arg(long, env = "TCOLOR_THREADS", global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Build a certified site set, sample the coloring and write it to a file.
    Build(BuildArgs),
    /// Print the color of a point of E^n.
    Color(ColorArgs),
    /// Re-check every certificate of a coloring file.
    Verify(VerifyArgs),
    /// Look for two red points at distance one.
    SearchRed(SearchRedArgs),
    /// Look for an all-blue copy of l_m or of a target set.
    SearchBlue(SearchBlueArgs),
    /// Exact red arcs and longest blue run of a one-dimensional coloring.
    #[command(name = "exact-1d")]
    #[serde(rename = "exact-1d")]
    Exact1d(Exact1dArgs),
    /// Evaluate the counting bounds behind the existence argument.
    Bounds(BoundsArgs),
    /// Build and measure a grid of colorings.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct BuildArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub period: f64,
    #[arg(long, default_value_t = SITE_SEPARATION)]
    pub t: f64,
    /// Sampling probability; defaults to 20^-n.
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "random-darts")]
    pub strategy: Strategy,
    #[arg(long)]
    pub out: PathBuf,
    /// Accept 5/3 < R <= 2.
    #[arg(long = "allow-small-R")]
    #[serde(rename = "allow_small_R")]
    pub allow_small_r: bool,
    /// Uniform samples for the red-density estimate.
    #[arg(long, default_value_t = 100_000)]
    pub density_samples: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct ColorArgs {
    #[arg(long)]
    pub coloring: PathBuf,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub at: String,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub coloring: PathBuf,
    /// Certification grid pitch; defaults to t / (4 sqrt(n)).
    #[arg(long)]
    pub pitch: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_REFINE_DEPTH)]
    pub refine_depth: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchRedArgs {
    #[arg(long)]
    pub coloring: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchBlueArgs {
    #[arg(long)]
    pub coloring: PathBuf,
    /// Length of the line l_m (ignored with --k).
    #[arg(long, required_unless_present_any = ["k", "longest"])]
    pub m: Option<usize>,
    /// File with a 1-separated target set, one point per line.
    #[arg(long, conflicts_with = "longest")]
    pub k: Option<PathBuf>,
    /// Report the longest blue l_m found instead of testing one m.
    #[arg(long)]
    pub longest: bool,
    #[arg(long, default_value_t = 4096)]
    pub m_max: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct Exact1dArgs {
    #[arg(long)]
    pub coloring: PathBuf,
    /// Stop looking for longer runs here.
    #[arg(long, default_value_t = 1_000_000)]
    pub m_cap: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "R", required_unless_present = "ell_m")]
    #[serde(rename = "R")]
    pub period: Option<f64>,
    /// Size of the target set.
    #[arg(long = "K", conflicts_with_all = ["min_k", "ell_m"])]
    #[serde(rename = "K")]
    pub k_size: Option<f64>,
    /// Dimension spanned by the reduced target set; defaults to n.
    #[arg(long)]
    pub d: Option<usize>,
    /// Smallest |K| for which the union bound closes.
    #[arg(long, conflicts_with = "ell_m")]
    pub min_k: bool,
    /// Evaluate K = l_m with R = m.
    #[arg(long)]
    pub ell_m: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long = "R", value_delimiter = ',', required = true)]
    #[serde(rename = "R")]
    pub period: Vec<f64>,
    /// Sampling probabilities, or `default` for 20^-n.
    #[arg(long, value_delimiter = ',', default_value = "default")]
    pub x: Vec<XChoice>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seed: Vec<u64>,
    #[arg(long, default_value = "random-darts")]
    pub strategy: Strategy,
    /// Monte Carlo trials for blue-run searches.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Resamples for the S-inclusion frequency of site 0.
    #[arg(long, default_value_t = 10_000)]
    pub resample_trials: u64,
    #[arg(long, default_value_t = 100_000)]
    pub density_samples: u64,
    #[arg(long, default_value_t = 1024)]
    pub m_max: usize,
    /// Also write the cell rows as CSV to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum XChoice {
    #[serde(serialize_with = "default_label")]
    Default,
    Value(f64),
}

fn default_label<S: serde::Serializer>(s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str("default")
}

impl FromStr for XChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "default" {
            return Ok(XChoice::Default);
        }
        s.parse::<f64>()
            .map(XChoice::Value)
            .map_err(|_| format!("expected a number or `default`, got {s:?}"))
    }
}

/// Failure of a command together with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<torus_coloring::Error> for Failure {
    fn from(e: torus_coloring::Error) -> Self {
        use torus_coloring::Error as E;
        let code = match e {
            E::Io(_) | E::Parse { .. } => 3,
            E::CertificationFailed { .. } => 1,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: 3,
            message: e.to_string(),
        }
    }
}

/// Records to print and whether every check passed.
pub struct Outcome {
    pub records: Vec<Record>,
    pub passed: bool,
}

fn config_record(cli: &Cli) -> Record {
    Record::new("config").extend_with(cli)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let started = std::time::Instant::now();
    let result = commands::run(&cli.command);
    eprintln!("wall time: {:.3}s", started.elapsed().as_secs_f64());
    match result {
        Ok(outcome) => {
            let mut records = vec![config_record(&cli)];
            records.extend(outcome.records);
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let written = if let (Format::Text, Some(plain)) = (cli.format, commands::plain_text(&cli.command, &records)) {
                writeln!(lock, "{plain}")
            } else {
                render(&records, cli.format, &mut lock)
            };
            if let Err(e) = written.and_then(|_| lock.flush()) {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
            ExitCode::from(if outcome.passed { 0 } else { 1 })
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
