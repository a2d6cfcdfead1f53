//! `weil`: run the weil-core experiments and write CSV/JSON reports.
//!
//! Exit status is 0 when every check passes, 1 on a violated bound or a
//! failed invariant (the witness row goes to stderr), 2 on a bad config.

mod config;
mod report;
mod run;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "weil", version, about = "Weil representation experiments over finite fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Primes: `5`, `5,7,11` or a range `5..23`.
    #[arg(long = "p", global = true)]
    pub p: Option<String>,

    /// Field degree, q = p^m.
    #[arg(long = "m", global = true)]
    pub m: Option<usize>,

    /// Half dimension of the symplectic space.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,

    /// Torus type such as `split`, `inert:2`, `split+inert`, or `all`.
    #[arg(long, global = true)]
    pub torus: Option<String>,

    /// JSON file holding an integer symplectic matrix.
    #[arg(long = "A", global = true)]
    pub a: Option<PathBuf>,

    #[arg(long, global = true)]
    pub max_prime: Option<u64>,

    /// Largest Fourier coefficient of the test exponents.
    #[arg(long, global = true)]
    pub xi_max: Option<u64>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Random samples per case, where a command samples.
    #[arg(long, global = true)]
    pub samples: Option<usize>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// JSON config: `{"A": [[..]], "primes": {"max": ..}, "xi_window": {"max_coeff": ..}, "seed": ..}`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Exponential sums over tori against their bounds.
    VerifyBounds,
    /// Torus eigenspace multiplicities against the closed formula.
    Multiplicities,
    /// Restriction of the Weil representation to an extension field.
    SelfReducibility,
    /// Hecke eigenstates of a cat map against the Wigner bound.
    Que,
    /// Statistical states of a cat map.
    Statistical,
    /// Frequency of each symplectic rank over primes.
    RankDensity,
    /// Representation invariants, multiplicities and bounds.
    Selftest {
        /// Only q in {5, 7} with N = 1.
        #[arg(long)]
        quick: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyBounds => "verify-bounds",
            Command::Multiplicities => "multiplicities",
            Command::SelfReducibility => "self-reducibility",
            Command::Que => "que",
            Command::Statistical => "statistical",
            Command::RankDensity => "rank-density",
            Command::Selftest { .. } => "selftest",
        }
    }
}

#[derive(Debug)]
pub enum Fail {
    Config(String),
    Io(String),
    /// A check failed; the payload is the witness.
    Violation(String),
}

impl From<weil_core::Error> for Fail {
    fn from(e: weil_core::Error) -> Self {
        Fail::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config::resolve(&cli).and_then(|cfg| {
        if let Some(j) = cfg.jobs {
            rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build_global()
                .map_err(|e| Fail::Config(format!("--jobs: {e}")))?;
        }
        run::run(&cfg)
    });
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(Fail::Violation(w)) => {
            eprintln!("violation: {w}");
            ExitCode::from(1)
        }
        Err(Fail::Config(msg) | Fail::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
