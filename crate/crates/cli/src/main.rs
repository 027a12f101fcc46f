//! `qnb`: batch front end for waiting-time and run-count distributions.
//!
//! Exit codes: 0 on success, 1 when a verification check fails (or output
//! cannot be written), 2 on usage and validation errors. Every error is a
//! single stderr line of the form `error[CODE]: message`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qnb_core::dist::{ModelParams, RunSpec};
use qnb_core::runcount::Scheme;

mod commands;
mod verify;

/// Environment variable holding the default worker thread count.
pub const THREADS_ENV: &str = "QNB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "qnb", version, about = "Waiting-time and run-count distributions of order k")]
struct Cli {
    /// Worker threads (default: $QNB_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Waiting-time PMF/CDF table.
    Pmf(PmfArgs),
    /// Distribution of the run count in n trials.
    Counts(CountsArgs),
    /// Run the verification suites and print a JSON report.
    Verify(verify::VerifyArgs),
    /// Monte Carlo waiting-time histogram with standard errors.
    Simulate(SimulateArgs),
    /// Dump kernel values over an (r, s, t) grid.
    Kernels(KernelArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Type1,
    Type2,
    Type3,
    Type4,
    Loverlap,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Default)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SchemeArgs {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// Overlap allowance for `loverlap`.
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    k: usize,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
}

#[derive(Args, Debug)]
struct PmfArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long)]
    r: usize,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1e-8)]
    tail_eps: f64,
    #[arg(long, default_value_t = 10_000)]
    n_cap: usize,
    /// Force the count-distribution route.
    #[arg(long, conflicts_with = "direct")]
    dual: bool,
    /// Force the direct route.
    #[arg(long)]
    direct: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct CountsArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long)]
    r: usize,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 100_000)]
    replications: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials per replication before it counts as not reached.
    #[arg(long, default_value_t = 200)]
    n_cap: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct KernelArgs {
    /// One of A, B, C, D, E, G.
    #[arg(long)]
    family: String,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    ell: usize,
    /// Single value or inclusive range `lo:hi`.
    #[arg(long)]
    r: String,
    #[arg(long)]
    s: String,
    /// Defaults to `0:s`.
    #[arg(long)]
    t: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[command(flatten)]
    out: OutputArgs,
}

/// A failure with its exit status and reason code.
#[derive(Debug)]
pub struct Failure {
    pub status: u8,
    pub code: &'static str,
    pub message: String,
}

impl Failure {
    pub fn usage(code: &'static str, message: impl Into<String>) -> Self {
        Failure { status: 2, code, message: message.into() }
    }

    pub fn check(message: impl Into<String>) -> Self {
        Failure { status: 1, code: "E_CHECK", message: message.into() }
    }
}

impl From<qnb_core::Error> for Failure {
    fn from(e: qnb_core::Error) -> Self {
        Failure::usage(e.code(), e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { status: 1, code: "E_IO", message: e.to_string() }
    }
}

impl SchemeArgs {
    fn scheme(&self) -> Result<Scheme, Failure> {
        let name = match self.scheme {
            SchemeArg::Type1 => "type1",
            SchemeArg::Type2 => "type2",
            SchemeArg::Type3 => "type3",
            SchemeArg::Type4 => "type4",
            SchemeArg::Loverlap => "loverlap",
        };
        let scheme = Scheme::from_name(name, self.ell)?;
        scheme.validate(self.k)?;
        Ok(scheme)
    }

    fn spec(&self, r: usize) -> Result<RunSpec, Failure> {
        Ok(RunSpec::new(self.k, r, self.scheme()?)?)
    }
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams, Failure> {
        Ok(ModelParams::new(self.theta, self.q)?)
    }
}

impl OutputArgs {
    fn writer(&self) -> Result<Box<dyn Write>, Failure> {
        Ok(match &self.output {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), Failure> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                Failure::usage("E_PARAM", format!("{THREADS_ENV} must be a non-negative integer, got {v:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        // A second initialization only happens in tests; ignore it.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Pmf(a) => commands::pmf(&a),
        Command::Counts(a) => commands::counts(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Kernels(a) => commands::kernels(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let summary: Vec<&str> = text
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("error[E_USAGE]: {}", summary.join(" ").trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error[{}]: {}", f.code, f.message.replace('\n', " "));
            ExitCode::from(f.status)
        }
    }
}
