//! `lang-trotter`: traces, class numbers, character checks and box
//! experiments from the command line.
//!
//! Exit status: 0 success, 1 a verification found a violation, 2 usage
//! error, 3 resource or I/O error.

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "lang-trotter", version, about = "Frobenius trace statistics over boxes of elliptic curves")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for cached trace tables and class numbers.
    #[arg(long = "cache-dir", global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Include wall-clock timing in experiment reports.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace of Frobenius of y^2 = x^3 + ax + b over F_p.
    Trace {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_negative_numbers = true)]
        a: i64,
        #[arg(long, allow_negative_numbers = true)]
        b: i64,
    },
    /// Number of nonsingular pairs mod p with each trace.
    Distribution {
        #[arg(long)]
        p: u64,
        /// Also build the membership table for this trace.
        #[arg(long, allow_negative_numbers = true)]
        r: Option<i64>,
        /// Use the O(p^3) enumeration instead of the per-j-invariant path.
        #[arg(long)]
        brute: bool,
    },
    /// Kronecker class number H(D) with its conductor decomposition.
    Classnum {
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
    },
    /// Isomorphism classes mod p with trace r.
    Isoclasses {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_negative_numbers = true)]
        r: i64,
    },
    /// Orthogonality, mean-square identity, Polya-Vinogradov and fourth
    /// moment checks for the characters mod q.
    Charcheck {
        #[arg(long)]
        q: u64,
        /// Random coefficient vectors for the mean-square identity.
        #[arg(long, default_value_t = 25)]
        vectors: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Box count of trace-r pairs through characters, against direct counting.
    Boxcount {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_negative_numbers = true)]
        r: i64,
        #[command(flatten)]
        dims: BoxDims,
    },
    /// The constant C_r as a truncated Euler product.
    Constants {
        #[arg(long, allow_negative_numbers = true)]
        r: i64,
        #[arg(long, default_value_t = 1_000_000)]
        truncation: u64,
    },
    /// Partial sums of H(r^2 - 4p)/2p against C_r pi_{1/2}(x).
    Lemma3 {
        #[arg(long)]
        x: u64,
        #[arg(long, allow_negative_numbers = true)]
        r: i64,
    },
    /// Box mean of pi^r_E(x).
    Average(ExperimentArgs),
    /// Box second moment of pi^r_E(x) about C_r pi_{1/2}(x).
    Moment(ExperimentArgs),
    /// Curves whose count strays beyond sqrt(x)/log^c x.
    Census {
        #[command(flatten)]
        experiment: ExperimentArgs,
        #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
        d: f64,
    },
    /// Run the invariant suite; exits 1 on any failure.
    VerifyAll {
        #[arg(long = "max-p", default_value_t = 61)]
        max_p: u64,
    },
}

#[derive(Debug, Args)]
pub struct BoxDims {
    #[arg(long = "A")]
    pub a_box: u64,
    #[arg(long = "B")]
    pub b_box: u64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub x: u64,
    #[command(flatten)]
    pub dims: BoxDims,
    #[arg(long, allow_negative_numbers = true)]
    pub r: i64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub c: f64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match commands::run(&cli) {
        Ok(outcome) => {
            let text = outcome.rendered.render(cli.format);
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(3);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("lang-trotter: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 3 })
        }
    }
}
