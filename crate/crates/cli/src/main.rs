mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Finite model theory toolkit: rank-m equivalence, shrinking, prefix
/// translations and embedding scans over finite relational structures.
#[derive(Debug, Parser)]
#[command(name = "fmtk", version)]
pub struct Cli {
    /// Quantifier rank.
    #[arg(long, global = true, default_value_t = 2)]
    pub m: usize,
    /// Bound on the number of marked elements or core size.
    #[arg(long, global = true, default_value_t = 1)]
    pub k: usize,
    /// Seed recorded in every report; the current commands are deterministic.
    #[arg(long, global = true, default_value_t = 2014)]
    pub seed: u64,
    /// Largest structure or sample member considered.
    #[arg(long = "max-size", global = true, default_value_t = 8)]
    pub max_size: usize,
    /// Write the produced structure or tree here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide m-equivalence of two structures.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        /// Structure name in the first file (default: first block).
        #[arg(long)]
        a_name: Option<String>,
        #[arg(long)]
        b_name: Option<String>,
    },
    /// Shrink a labeled tree or word to an m-equivalent subtree keeping marks.
    Shrink {
        file: PathBuf,
        #[arg(long)]
        name: Option<String>,
        /// Marked nodes, overriding the file's `marks:` line.
        #[arg(long, value_delimiter = ',')]
        marks: Option<Vec<usize>>,
    },
    /// Translate a sentence to an existential-universal prefix sentence.
    Translate {
        /// File holding the sentence.
        formula: PathBuf,
        #[arg(long, value_enum, default_value_t = ClassName::All)]
        class: ClassName,
        /// Universal block size, or `auto` to search 1, 2, 4, ...
        #[arg(long, default_value = "auto")]
        p: String,
        /// Largest p tried in auto mode.
        #[arg(long = "max-p", default_value_t = 8)]
        max_p: usize,
        /// Vocabulary for the `all` class, e.g. `E/2`.
        #[arg(long)]
        vocab: Option<String>,
    },
    /// List the cores of every structure in a file.
    Cores {
        file: PathBuf,
        /// The sentence, inline.
        #[arg(long)]
        formula: String,
    },
    /// Find the first embedding pair in a sequence of structures.
    WqoScan { file: PathBuf },
    /// Evaluate an expression tree.
    AlgebraEval {
        expr: PathBuf,
        #[arg(long)]
        structures: PathBuf,
    },
    /// Shrink the structure of a tree over union and complement.
    AlgebraShrink {
        expr: PathBuf,
        #[arg(long)]
        structures: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "")]
        marks: Vec<usize>,
        #[arg(long, value_enum, default_value_t = LeafKind::Whole)]
        leaf: LeafKind,
    },
    /// Generate a structure from a named family.
    Gen {
        #[arg(long, value_enum)]
        class: GenClass,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// Elements to mark with the unary predicate `R`.
        #[arg(long, value_delimiter = ',')]
        marks: Option<Vec<usize>>,
        /// Allow H_n/G_n beyond the default size guard.
        #[arg(long)]
        unguarded: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassName {
    All,
    Cycles,
    Paths,
    Linorder,
    Hngn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LeafKind {
    Whole,
    Word,
    Tree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenClass {
    Linorder,
    Path,
    Cycle,
    Hn,
    Gn,
    Grid,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<fmtk::Error>() {
        Some(fmtk::Error::GuardExceeded { .. }) => 2,
        Some(fmtk::Error::VerificationFailed(_)) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
