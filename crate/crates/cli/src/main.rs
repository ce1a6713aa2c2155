mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use io::BadInput;

#[derive(Parser, Debug)]
#[command(name = "zeq", version, about = "Zero-error superactivation toolkit")]
struct Cli {
    /// Lift the ambient-dimension guard.
    #[arg(long = "unsafe", global = true)]
    unsafe_: bool,
    /// Suppress the human-readable summary.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Out {
    /// Output file (JSON); stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy)]
struct SearchOpts {
    /// Seesaw restarts per product-state search.
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    /// Seesaw iterations per restart.
    #[arg(long, default_value_t = 500)]
    iters: usize,
    /// Residual below which a product state counts as found.
    #[arg(long, default_value_t = 1e-8)]
    search_tol: f64,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    Inside,
    OrthogonalTo,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Family {
    /// The five-state Tiles UPB in C³⊗C³.
    Tiles,
    /// Computational product basis of C^{da}⊗C^{db}.
    Full,
    /// Product of two UPB files.
    Product,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Choi matrix of a channel, or Kraus operators from a Choi matrix.
    ChannelChoi {
        input: PathBuf,
        /// Read a Choi matrix and output its Kraus form.
        #[arg(long)]
        invert: bool,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Adjoint map E*, or E*∘E with --compose.
    ChannelAdjoint {
        input: PathBuf,
        #[arg(long)]
        compose: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Recovery channel for the code span{s0, s1}.
    ChannelRecover {
        input: PathBuf,
        /// JSON file {"s0": [...], "s1": [...]}; defaults to |0⟩, |1⟩.
        #[arg(long)]
        states: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Two-overlap test for a perfectly transmitted qubit.
    Q0Witness {
        input: PathBuf,
        #[arg(long)]
        states: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Evaluate conditions (a)–(g) on a subspace or UPB span.
    SubspaceCheck {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        kmax: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        search: SearchOpts,
        #[command(flatten)]
        out: Out,
    },
    /// Seesaw search for a product state in or orthogonal to a subspace.
    SubspaceProductState {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Inside)]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        search: SearchOpts,
        #[command(flatten)]
        out: Out,
    },
    /// Build a UPB.
    UpbBuild {
        #[arg(value_enum)]
        family: Family,
        /// Factor files for `product`.
        inputs: Vec<PathBuf>,
        #[arg(long)]
        da: Option<usize>,
        #[arg(long)]
        db: Option<usize>,
        /// Output the span as Subspace JSON.
        #[arg(long)]
        span: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Close a subspace or UPB span under the flip and local-X symmetries.
    UpbSymmetrize {
        input: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Sample a constrained subspace, or check the dimension arithmetic.
    Sample {
        #[arg(long)]
        da: usize,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        k1: Option<usize>,
        #[arg(long)]
        k2: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        positivity_seed: bool,
        /// List admissible (r, k1, k2) instead of sampling.
        #[arg(long)]
        list: bool,
        /// Integer arithmetic for the environment and subspace dimensions only.
        #[arg(long)]
        check_only: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Randomized search, one JSON report per line.
    Search {
        #[arg(long)]
        da: usize,
        /// Subspace dimension; shorthand for --d-min d --d-max d.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        d_min: Option<usize>,
        #[arg(long)]
        d_max: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        k1: Option<usize>,
        #[arg(long)]
        k2: Option<usize>,
        #[arg(long, default_value_t = 1)]
        kmax: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        positivity_seed: bool,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        search: SearchOpts,
        #[command(flatten)]
        out: Out,
    },
    /// Re-evaluate every residual in a stored report or search stream.
    VerifyReport {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

/// Exit status for a failed run.
fn exit_status(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<zeq_core::Error>() {
        return match e {
            e if e.is_resource_guard() => 3,
            zeq_core::Error::Numerical(_) => 1,
            _ => 2,
        };
    }
    if err.downcast_ref::<BadInput>().is_some() {
        return 2;
    }
    1
}

fn configure_guard(unsafe_: bool) -> anyhow::Result<()> {
    if unsafe_ {
        zeq_core::numerics::set_max_ambient(usize::MAX);
    } else if let Ok(v) = std::env::var("ZEQ_MAX_AMBIENT") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| BadInput(format!("ZEQ_MAX_AMBIENT: not a dimension: {v:?}")))?;
        zeq_core::numerics::set_max_ambient(n);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_guard(cli.unsafe_).and_then(|_| commands::run(cli.command, cli.quiet));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("zeq: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
