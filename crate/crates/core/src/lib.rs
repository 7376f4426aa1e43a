//! Arithmetic circuits over the integers: sparse expansion, identity testing,
//! monomial-coefficient queries, monomial counting, parse trees, and gadget
//! reductions from permanents, exact cover and 3-CNF counting, each paired
//! with a brute-force oracle.

pub mod circuit;
pub mod count;
pub mod error;
pub mod gen;
pub mod ident;
pub mod par;
pub mod parse_tree;
pub mod poly;
pub mod primes;
pub mod reductions;
pub mod selftest;
mod serde_big;
pub mod zmc;

pub use circuit::{parse_circuit, Builder, Circuit, Gate, GateId};
pub use error::{Error, Result};
pub use poly::{Monomial, Polynomial, Var};
pub use primes::PrimeSampler;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

/// Limits for symbolic expansion and search. Exceeding any of them is
/// reported as [`Error::BudgetExceeded`], never as a wrong answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Terms held by any one intermediate polynomial.
    pub max_terms: usize,
    /// Total degree of any intermediate term.
    #[serde(with = "serde_big::uint")]
    pub max_total_degree: BigUint,
    /// Cumulative work: term products weighted by coefficient size in 64-bit
    /// words, or search nodes visited.
    pub max_work: u64,
}

pub const DEFAULT_MAX_WORK: u64 = 1 << 28;

impl Budget {
    pub fn new(max_terms: usize, max_total_degree: impl Into<BigUint>) -> Self {
        Budget {
            max_terms,
            max_total_degree: max_total_degree.into(),
            max_work: DEFAULT_MAX_WORK,
        }
    }

    pub fn with_work(mut self, max_work: u64) -> Self {
        self.max_work = max_work;
        self
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(1 << 20, 1u64 << 20)
    }
}

/// How a decision procedure runs: by exact expansion, or by seeded random
/// trials with one-sided error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Randomized { trials: u64, sampler: PrimeSampler },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Randomized,
}

impl Method {
    pub fn randomized(trials: u64, seed: u64) -> Self {
        Method::Randomized {
            trials,
            sampler: PrimeSampler::new(seed),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            Method::Exact => Mode::Exact,
            Method::Randomized { .. } => Mode::Randomized,
        }
    }
}
