//! `slp`: decision procedures, gadget builders and oracles for arithmetic
//! circuits.
//!
//! Exit status is 0 for a decisive answer, 2 when a budget or size guard
//! stops the computation, and 1 for usage and input errors.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::RunReport;

#[derive(Debug, Parser)]
#[command(name = "slp", version, about = "Arithmetic circuit toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// How decision procedures run.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Trials for randomized mode; a per-command default otherwise.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Seed for randomized mode. Without it a seed is drawn and printed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Refuse randomized runs without an explicit `--seed`.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Largest number of terms in any intermediate polynomial.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    pub budget_terms: usize,
    /// Largest total degree of any intermediate term.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    pub budget_degree: u64,
    /// Cap on cumulative work (term products or search nodes).
    #[arg(long, global = true, default_value_t = slp_core::DEFAULT_MAX_WORK)]
    pub budget_work: u64,
    /// Constant `c` in the random sampling range `[2, 2^(c·n))`.
    #[arg(long, global = true, default_value_t = 3)]
    pub c_const: u32,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Print the run report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Randomized,
    /// Parse-tree type search; monotone circuits and `zmc` only.
    Monotone,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a netlist and print it in canonical form.
    Parse { file: PathBuf },
    /// Structural statistics.
    Analyze { file: PathBuf },
    /// Expand to a sparse polynomial.
    Expand {
        file: PathBuf,
        /// Reduce coefficients modulo this value.
        #[arg(long)]
        modulus: Option<u64>,
    },
    /// Evaluate at a point, over the integers or modulo `--modulus`.
    Eval {
        file: PathBuf,
        /// Assignments such as `X1=3,X2=-1`.
        #[arg(long, value_delimiter = ',', required = true)]
        at: Vec<String>,
        #[arg(long)]
        modulus: Option<u64>,
    },
    /// Is the polynomial identically zero?
    Acit { file: PathBuf },
    /// Is the polynomial multilinear?
    Checkml { file: PathBuf },
    /// Is the coefficient of a monomial zero?
    Zmc {
        file: PathBuf,
        #[arg(long)]
        monomial: String,
    },
    /// Multilinearity plus a zero test for a multilinear monomial.
    Mlzmc {
        file: PathBuf,
        #[arg(long)]
        monomial: String,
    },
    /// Does the polynomial have at least `--threshold` monomials?
    Countmon {
        file: PathBuf,
        #[arg(long)]
        threshold: String,
    },
    /// Monomials extending `--monomial`: existence, or at least `--threshold`
    /// of them.
    Extmon {
        file: PathBuf,
        #[arg(long)]
        monomial: String,
        #[arg(long)]
        threshold: Option<String>,
    },
    /// Is there a multilinear monomial?
    Monml { file: PathBuf },
    /// Multilinear with at least `--threshold` monomials?
    Mlcountmon {
        file: PathBuf,
        #[arg(long)]
        threshold: String,
    },
    /// Build a gadget circuit from a source instance.
    Reduce(ReduceArgs),
    /// Brute-force reference answers.
    Oracle {
        #[arg(value_enum)]
        kind: OracleKind,
        /// Input file; not used by `determinant`.
        file: Option<PathBuf>,
        /// Matrix dimension for `determinant`.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run the oracle-equivalence suite.
    Selftest {
        #[arg(long, value_enum, default_value_t = LevelArg::Small)]
        level: LevelArg,
        /// Run a single criterion.
        #[arg(long)]
        criterion: Option<u8>,
    },
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(value_enum)]
    pub kind: ReduceKind,
    /// Source instance: a matrix, an exact cover instance, a CNF or a netlist
    /// depending on `kind`. Not used by `det`.
    pub file: Option<PathBuf>,
    /// Write the netlist here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Target value `d` for `per-zmc`.
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<String>,
    /// Threshold `k`.
    #[arg(long)]
    pub k: Option<String>,
    /// Model count `ℓ` to exclude.
    #[arg(long)]
    pub ell: Option<String>,
    /// `x`-block size for `cem-cm`, or the dimension for `det`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Clause count for `cem-cm`.
    #[arg(long)]
    pub c: Option<usize>,
    /// Base monomial for `cem-cm`.
    #[arg(long)]
    pub monomial: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReduceKind {
    /// Sign matrix and `d` to a coefficient query.
    PerZmc,
    /// Exact cover by 3-sets to a monotone coefficient query.
    X3cZmc,
    /// 3-CNF, `k` and `ℓ` to an extension-counting instance.
    CcneCem,
    /// Extension-counting instance to a monomial-counting instance.
    CemCm,
    /// 3-CNF and `k` to a monotone monomial-counting instance.
    CexistsCm,
    /// 0/1 matrix to a multilinear monomial-counting instance.
    PerMlcm,
    /// Generic determinant circuit of dimension `--n`.
    Det,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    Permanent,
    Models,
    ExactCover,
    Determinant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Small,
    Full,
}

/// Failure classes, mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Budget(String),
}

impl From<slp_core::Error> for Failure {
    fn from(e: slp_core::Error) -> Self {
        match e {
            slp_core::Error::BudgetExceeded(_) | slp_core::Error::SizeGuard(_) => Failure::Budget(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(format!("{e:#}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let threads = cli.opts.threads;
    let start = Instant::now();
    let out = slp_core::par::with_threads(threads, || commands::run(&cli));
    match out {
        Ok(done) => {
            let report = RunReport {
                command: done.command,
                inputs_digest: report::digest(&done.inputs),
                result: done.result,
                seed: done.seed,
                trials: done.trials,
                budget: done.budget,
                wall_time_ms: start.elapsed().as_millis() as u64,
            };
            let text = if cli.opts.json {
                serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
            } else {
                done.text
            };
            // a closed pipe downstream is not an error of ours
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::from(if done.passed { 0 } else { 1 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
