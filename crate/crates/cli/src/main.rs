//! `rqcm`: batch front end for sampling, spectra, limit laws, entanglement
//! decisions and Monte Carlo sweeps. Output is CSV on stdout unless
//! `--format json` or `--out` say otherwise.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod run;

#[derive(Parser, Debug)]
#[command(name = "rqcm", version, about = "Random quantum covariance matrices", arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw RQCM samples and print the matrices.
    Sample(Common),
    /// Eigenvalues of sampled matrices (histogram, or raw values with --raw).
    Spectrum(SpectrumArgs),
    /// Symplectic eigenvalues of sampled matrices.
    Symplectic(SpectrumArgs),
    /// PPT defect per sample.
    Ppt(Common),
    /// Separability, PPT and maximal k-extendability per sample.
    Extend(Common),
    /// Aggregate fractions and histograms over many samples.
    Sweep(SweepArgs),
    /// Limit-law density curves and scalar tables.
    Theory(TheoryArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Number of modes n (matrices are 2n x 2n).
    #[arg(long = "modes", default_value_t = 2)]
    pub modes: usize,
    /// GOE scale; `theory` accepts a comma-separated list for scalar tables.
    #[arg(long, default_value = "1")]
    pub sigma: String,
    /// Use sigma/sqrt(2n) as the entry scale.
    #[arg(long)]
    pub normalized: bool,
    /// Mode split m:l; defaults to an even split.
    #[arg(long)]
    pub partition: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    /// Base seed; sample i uses random stream i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Histogram bins, or grid resolution for theory curves.
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    /// Largest k probed by the extendability search.
    #[arg(long = "k-cap", default_value_t = 64)]
    pub k_cap: usize,
    /// Feasibility tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; inferred from the --out extension when absent, else csv.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    /// Emit the pooled values instead of a histogram.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Observables to compute: spectrum, symplectic, ppt, separability, max_k, purity.
    #[arg(long, value_delimiter = ',', default_value = "ppt,separability,max_k,purity")]
    pub what: Vec<String>,
    /// Also write one JSON line per sample to this file.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Curve {
    Mu,
    Eigen,
    Symplectic,
    Marginal,
    Edges,
    Ld,
    Energy,
}

#[derive(Args, Debug, Clone)]
pub struct TheoryArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub curve: Curve,
    /// Marginal fraction t in (0, 1], for --curve marginal.
    #[arg(long)]
    pub t: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let invocation = std::env::args().collect::<Vec<_>>().join(" ");
    match run::dispatch(&cli.command, &invocation) {
        Ok(()) => ExitCode::SUCCESS,
        Err(run::Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(run::Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(1)
        }
    }
}
