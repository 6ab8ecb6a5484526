//! `shy`: batch front end for the shifted-yangian library.
//!
//! Every subcommand produces a report with a JSON form (schema `"sch": 1`,
//! keys sorted, rationals as `p/q` strings) and a plain text form.
//! Exit codes: 0 success, 1 failed verification, 2 bad input.

mod commands;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "shy", version, about = "Exact computations with shifted Yangian representations")]
pub struct Cli {
    /// Truncation depth for infinite-dimensional modules.
    #[arg(long, global = true, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: u64,
    /// Series order for expansions in u^{-1}; must be at least the depth.
    #[arg(long, global = true)]
    pub order: Option<i64>,
    /// Seed for sample points; nothing else is randomized.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Standard factorization of an sl2 highest l-weight.
    Factorize {
        /// Rational function in u, e.g. "(u-3)(u-9)/(u*(u-2))".
        e: String,
    },
    /// Truncated q-character of a family or a product such as "Lba(9,0)*Lba(3,2)".
    Qc {
        #[arg(long)]
        qc: String,
        /// Cartan type label.
        #[arg(long = "type", default_value = "A1")]
        cartan: String,
    },
    /// Jordan-Hölder classes of an sl2 q-character product.
    Jh {
        #[arg(long)]
        qc: String,
    },
    /// R-matrix in the spectral parameter u of the left factor: N(c) against a negative
    /// prefundamental, or two finite-dimensional modules.
    Rmatrix {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        /// Also write the report to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Defining relations on an explicit module.
    Verify {
        /// A family such as "Lminus(0)", or "Verma(e)", "Simple(e)", "Weyl(r|s)".
        #[arg(long)]
        module: String,
        #[arg(long, default_value_t = 8)]
        nmax: i64,
        /// PBW index cap for Verma modules.
        #[arg(long, default_value_t = 3)]
        cap: usize,
    },
    /// Truncation checks for L(s^{-1}) with polynomial s.
    Truncate {
        #[arg(long)]
        s: String,
    },
    /// The map s -> s-bar for a shipped Cartan type.
    Sbar {
        #[arg(long = "type")]
        cartan: String,
        /// "[s_1; s_2; ...]" or a product of Psi(i,a) factors.
        #[arg(long)]
        s: String,
    },
    /// Yang-Baxter equation on N(cu) ⊗ N(cv) ⊗ W at seeded sample points.
    Ybe {
        #[arg(long)]
        cu: String,
        #[arg(long)]
        cv: String,
        #[arg(long, default_value = "Lminus(0)")]
        module: String,
        #[arg(long, default_value_t = 3)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("shy: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
