//! `limitop`: lower norms, limit operators and essential spectra of band operators from
//! JSON operator specs.

mod commands;
mod error;
mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "limitop", version, about = "Lower norms, limit operators and essential spectra of band operators")]
struct Cli {
    /// Worker threads (overridden by LIMITOP_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct OpArg {
    /// Operator spec (JSON).
    #[arg(long)]
    pub op: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct WindowArg {
    /// Window [LO, HI]; repeat for a union of intervals.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, action = clap::ArgAction::Append)]
    pub window: Vec<i64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SeqName {
    FlipSum,
    BnIdentity,
    Constant,
    Shifted,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeName {
    Floquet,
    Gamma,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SuiteName {
    Prop6,
    Example13,
    Example14,
    Example16,
    EssspecDemo,
    LocalizeDemo,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact lower norm ν(A|_F) on a finite window (p = 2, or any p for diagonal operators).
    Nu {
        #[command(flatten)]
        op: OpArg,
        #[command(flatten)]
        window: WindowArg,
        #[arg(long, default_value = "2")]
        p: String,
        /// Include the witness vector.
        #[arg(long)]
        witness: bool,
    },
    /// Restricted lower norm ν_D(A|_F); F defaults to all of Z.
    NuD {
        #[command(flatten)]
        op: OpArg,
        #[command(flatten)]
        window: WindowArg,
        #[arg(long = "d", short = 'D')]
        d: u64,
        #[arg(long, default_value = "2")]
        p: String,
    },
    /// Certified window size D(δ, r, w, p, N).
    WindowSize {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        w: u64,
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long = "N", short = 'N', default_value_t = 1)]
        n: u32,
        /// Report this construction instead of the smallest one.
        #[arg(long, value_parser = ["proof1", "proof2", "extremal-p"])]
        method: Option<String>,
    },
    /// Check ν(A|_F) ≤ ν_D(A|_F) ≤ ν(A|_F) + δ on a finite window.
    VerifyCert {
        #[command(flatten)]
        op: OpArg,
        #[command(flatten)]
        window: WindowArg,
        #[arg(long)]
        delta: f64,
        /// Norm bound; defaults to the Wiener bound plus a margin.
        #[arg(long)]
        r: Option<f64>,
        /// Band-width bound; defaults to the operator's band-width.
        #[arg(long)]
        w: Option<u64>,
    },
    /// Lower norm certified within δ, on a window or all of Z.
    CertifiedNu {
        #[command(flatten)]
        op: OpArg,
        #[command(flatten)]
        window: WindowArg,
        #[arg(long)]
        delta: f64,
        /// Norm distance to the band-dominated target the spec approximates.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
    },
    /// Representatives of the operator spectrum.
    SigmaOp {
        #[command(flatten)]
        op: OpArg,
        /// List at most this many representatives (and block indices up to it).
        #[arg(long)]
        max_reps: Option<usize>,
        /// Also compute ν of each representative.
        #[arg(long)]
        nu: bool,
    },
    /// Residuals of P-strong convergence of a sequence towards a candidate.
    Pconv {
        #[arg(long, value_enum)]
        seq: SeqName,
        /// Operator for the constant and shifted sequences.
        #[arg(long)]
        op: Option<PathBuf>,
        /// Candidate limit (defaults to I, or to the operator for constant/shifted).
        #[arg(long)]
        candidate: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 5, 10])]
        m: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        n_max: usize,
        #[arg(long, default_value_t = limitop::limit_ops::DEFAULT_TOL)]
        tol: f64,
    },
    /// Essential spectrum as a Floquet union or a γ landscape on a grid.
    Essspec {
        #[command(flatten)]
        op: OpArg,
        #[arg(long, value_enum, default_value = "floquet")]
        mode: ModeName,
        #[arg(long = "box", num_args = 4, value_names = ["RE0", "RE1", "IM0", "IM1"], allow_negative_numbers = true)]
        grid_box: Option<Vec<f64>>,
        #[arg(long, default_value_t = 200)]
        nx: usize,
        #[arg(long, default_value_t = 100)]
        ny: usize,
        #[arg(long, default_value_t = 0.02)]
        delta: f64,
        /// θ samples per representative (floquet mode).
        #[arg(long, default_value_t = limitop::spectral::DEFAULT_SAMPLES)]
        samples: usize,
        /// CSV output (gamma mode: re,im,gamma,verdict; floquet mode: label,re,im).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// P-Fredholm verdict from certified lower norms of all limit operators.
    Fredholm {
        #[command(flatten)]
        op: OpArg,
        #[arg(long)]
        delta: f64,
    },
    /// Localize a limit operator of minimal lower norm.
    Localize {
        #[command(flatten)]
        op: OpArg,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Full trace as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Building blocks and operator spectrum of the non-rich abstract diagonal example.
    Example13 {
        #[arg(long, default_value_t = 10)]
        k_max: usize,
    },
    /// Lower norms of the blocks C_k and of the limit operators of the rich example.
    Example14 {
        #[arg(long, default_value_t = 10)]
        k_max: usize,
        #[arg(long, default_value = "2")]
        p: String,
    },
    /// Residuals of V_{-n}(I + J)V_n against I for the flip J.
    Example16 {
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 5, 10])]
        m: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        n_max: usize,
    },
    /// Run a reproducible check suite.
    Suite {
        #[arg(value_enum)]
        name: SuiteName,
        #[arg(long, default_value_t = 20240611)]
        seed: u64,
        /// Report file (JSON); the report is printed as well.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gallery operators.
    Gallery {
        name: String,
        #[arg(long, default_value_t = 30)]
        n_max: usize,
        /// Print the operator spec instead of a summary.
        #[arg(long)]
        dump: bool,
    },
}

fn configure_threads(hint: Option<usize>) -> Result<(), CliError> {
    let env = match std::env::var("LIMITOP_THREADS") {
        Ok(s) => Some(
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Precondition(format!("LIMITOP_THREADS must be a count, got '{s}'")))?,
        ),
        Err(_) => None,
    };
    if let Some(n) = env.or(hint) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Precondition(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = configure_threads(cli.threads).and_then(|_| commands::run(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
