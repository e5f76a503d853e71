use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use delaycode_cli::cmd::{self, KindArg, OrbitMode};

/// Finite-state variable-length codes with bounded decoding delay:
/// validation, exact analysis, reduction, expansion, and coding.
#[derive(Parser)]
#[command(name = "delaycode", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrbitModeArg {
    Count,
    CountRestricted,
    Enumerate,
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindOpt {
    Auto,
    Codetuple,
    Rct,
}

#[derive(Subcommand)]
enum Command {
    /// Count or enumerate subset classes of k-bit strings under the
    /// twist-group symmetry.
    Orbits {
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "count")]
        mode: OrbitModeArg,
    },
    /// Check a machine file and report every validity flag.
    Validate {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        kind: KindOpt,
    },
    /// Exact transition matrix, stationary distribution, and average length.
    Analyze {
        path: PathBuf,
        /// Distribution file overriding the one embedded in the machine.
        #[arg(long)]
        mu: Option<PathBuf>,
        /// Also print the per-table potentials.
        #[arg(long)]
        potentials: bool,
    },
    /// Reduce a code tuple to a reduced code tuple of inequivalent tables.
    Reduce {
        path: PathBuf,
        #[arg(long)]
        mu: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the step-by-step reduction trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Expand a reduced code tuple back into an ordinary code tuple.
    Expand {
        path: PathBuf,
        /// Start index, e.g. "{00,01,10,11}|000"; defaults to the first
        /// domain element with the identity twist.
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        mu: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Encode symbol text with a reduced code tuple; appends the flush tail.
    Encode {
        path: PathBuf,
        #[arg(long)]
        seed: Option<String>,
        /// File holding the symbol text.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Symbol text given inline.
        #[arg(long)]
        text: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decode a stream file produced by `encode`.
    Decode {
        path: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exhaustive one-bit-delay search compared against the Huffman length.
    MicroSearch {
        /// Distribution file: an object of exact fractions per symbol.
        #[arg(long)]
        mu: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the built-in sanity checks.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Orbits { k, mode } => cmd::cmd_orbits(
            *k,
            match mode {
                OrbitModeArg::Count => OrbitMode::Count,
                OrbitModeArg::CountRestricted => OrbitMode::CountRestricted,
                OrbitModeArg::Enumerate => OrbitMode::Enumerate,
                OrbitModeArg::Verify => OrbitMode::Verify,
            },
        ),
        Command::Validate { path, kind } => cmd::cmd_validate(
            path,
            match kind {
                KindOpt::Auto => KindArg::Auto,
                KindOpt::Codetuple => KindArg::CodeTuple,
                KindOpt::Rct => KindArg::Rct,
            },
        ),
        Command::Analyze {
            path,
            mu,
            potentials,
        } => cmd::cmd_analyze(path, mu, *potentials),
        Command::Reduce {
            path,
            mu,
            output,
            trace,
        } => cmd::cmd_reduce(path, mu, output, trace),
        Command::Expand {
            path,
            seed,
            mu,
            output,
        } => cmd::cmd_expand(path, seed, mu, output),
        Command::Encode {
            path,
            seed,
            input,
            text,
            output,
        } => cmd::cmd_encode(path, seed, input, text, output),
        Command::Decode {
            path,
            input,
            output,
        } => cmd::cmd_decode(path, input, output),
        Command::MicroSearch {
            mu,
            max_len,
            output,
        } => cmd::cmd_micro_search(mu, *max_len, output),
        Command::Selftest => cmd::cmd_selftest(),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
