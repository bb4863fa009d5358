//! `umeb`: build equiangular projection families and unextendible maximally
//! entangled bases, and emit machine-checkable JSON certificates.
//!
//! Exit status: 0 when every verdict passes, 2 when a verdict fails, 1 for
//! usage or I/O errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use umeb_core::Tolerance;

#[derive(Debug, Parser)]
#[command(name = "umeb", version, about = "Unextendible maximally entangled bases from equiangular projections")]
pub struct Cli {
    /// Absolute tolerance for deviations from exact identities.
    #[arg(long, global = true, env = "UMEB_TOL", default_value_t = 1e-9)]
    pub eps: f64,

    /// Relative eigenvalue cutoff for numerical ranks.
    #[arg(long, global = true, default_value_t = 1e-7)]
    pub rank_eps: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Omit the timestamp from JSON reports, for reproducible output.
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct PrimeArgs {
    /// Prime dimension: 3 or p ≡ 7 (mod 8).
    #[arg(long)]
    pub p: u64,

    /// Quadratic non-residue to use instead of the smallest one.
    #[arg(long)]
    pub k: Option<u64>,

    /// Hadamard matrix of order (p+1)/2 as JSON, instead of the built-in
    /// constructions.
    #[arg(long, value_name = "FILE")]
    pub hadamard: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the projection family for a prime and verify it.
    Generate {
        #[command(flatten)]
        prime: PrimeArgs,
        /// Write the family JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the unitary family and its unextendibility certificate.
    Umeb {
        #[command(flatten)]
        prime: PrimeArgs,
        /// Use the complementary projections I − P_i.
        #[arg(long)]
        dual: bool,
        /// Write the unitary family JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the certificate JSON here.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Re-verify a family, unitary family or Hadamard JSON file.
    Verify {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Write the verification report JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Tabulate exact Re(z) and feasibility over dimensions.
    Feasibility {
        /// Common rank; omit together with --lines for the rank-one sweep.
        #[arg(long, required_unless_present = "lines")]
        r: Option<u64>,
        #[arg(long)]
        dmax: u64,
        /// Sweep equiangular lines over d = 1..=dmax.
        #[arg(long, conflicts_with = "r")]
        lines: bool,
    },
    /// Check the symmetric Werner–Holevo decomposition over the UMEB unitaries.
    WhCheck {
        #[command(flatten)]
        prime: PrimeArgs,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Construct and validate a Hadamard matrix.
    Hadamard {
        #[arg(long)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Icosahedron lines in d = 3 through the whole pipeline.
    DemoIcosahedron {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl From<bool> for Verdict {
    fn from(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let tol = match Tolerance::new(cli.eps, cli.rank_eps) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", e.kind());
            return ExitCode::from(1);
        }
    };
    match commands::run(&cli, &tol) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(2),
        Err(e) => {
            match e.downcast_ref::<umeb_core::Error>() {
                Some(core) => eprintln!("error: {}: {e:#}", core.kind()),
                None => eprintln!("error: {e:#}"),
            }
            ExitCode::from(1)
        }
    }
}
