//! Zero monomial coefficient: is the coefficient of `m` in the polynomial of
//! a circuit zero?

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::circuit::{syntactic_degrees, Circuit};
use crate::error::{Error, Result};
use crate::par;
use crate::parse_tree::{exists_type_for_monomial, ParseTreeType};
use crate::poly::{expand_truncated, expand_with, ExpandOptions, Monomial};
use crate::primes::{is_prime, PrimeSampler};
use crate::Budget;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZmcAnswer {
    CoefficientZero,
    CoefficientNonzero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZmcMode {
    Exact,
    Randomized,
    MonotoneType,
}

/// One randomized trial: the sampled integer and, when it was prime, the
/// coefficient modulo it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZmcTrial {
    pub sample: u64,
    pub prime: bool,
    pub residue: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZmcVerdict {
    pub answer: ZmcAnswer,
    pub mode: ZmcMode,
    pub trials: u64,
    pub residues: Vec<ZmcTrial>,
    /// Exact coefficient, in exact mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<String>,
    /// Witness type, in monotone mode when the coefficient is nonzero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<ParseTreeType>,
    /// Answered from the degree bound without expanding.
    pub short_circuit: bool,
}

impl ZmcVerdict {
    fn new(answer: ZmcAnswer, mode: ZmcMode) -> Self {
        ZmcVerdict {
            answer,
            mode,
            trials: 0,
            residues: Vec::new(),
            coefficient: None,
            witness: None,
            short_circuit: false,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.answer == ZmcAnswer::CoefficientZero
    }
}

/// True when `m` cannot occur: a variable of `m` is missing from `c` or its
/// exponent exceeds the syntactic degree in that variable.
pub fn exceeds_degree_bound(c: &Circuit, m: &Monomial) -> bool {
    let (_, per) = syntactic_degrees(c);
    let out = &per[c.output()];
    m.iter().any(|(v, e)| match c.var_id(v.as_str()) {
        None => true,
        Some(id) => e > &out[id.0 as usize],
    })
}

/// The coefficient of `m`, by expansion truncated at `m`.
pub fn coeff_exact(c: &Circuit, m: &Monomial, budget: &Budget) -> Result<BigInt> {
    if exceeds_degree_bound(c, m) {
        return Ok(BigInt::zero());
    }
    Ok(expand_truncated(c, m, budget)?.coefficient(m))
}

/// The coefficient of `m` modulo the prime `p`.
pub fn coeff_mod_prime(c: &Circuit, m: &Monomial, p: u64, budget: &Budget) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if exceeds_degree_bound(c, m) {
        return Ok(0);
    }
    let opts = ExpandOptions {
        modulus: Some(p),
        cap: Some(m.clone()),
        budget: budget.clone(),
    };
    let (poly, _) = expand_with(c, &opts)?;
    Ok(poly.coefficient(m).to_u64().expect("residue below p"))
}

pub fn zmc_exact(c: &Circuit, m: &Monomial, budget: &Budget) -> Result<ZmcVerdict> {
    let short = exceeds_degree_bound(c, m);
    let a = coeff_exact(c, m, budget)?;
    let answer = if a.is_zero() {
        ZmcAnswer::CoefficientZero
    } else {
        ZmcAnswer::CoefficientNonzero
    };
    let mut v = ZmcVerdict::new(answer, ZmcMode::Exact);
    v.coefficient = Some(a.to_string());
    v.short_circuit = short;
    Ok(v)
}

/// One trial of the random-prime test: draw an integer below
/// `2^min(c·|C|, cap)`; a composite draw accepts, a prime one accepts iff
/// the coefficient vanishes modulo it.
pub fn zmc_trial(c: &Circuit, m: &Monomial, sampler: &PrimeSampler, trial: u64, budget: &Budget) -> Result<ZmcTrial> {
    let mut rng = sampler.rng(trial);
    let sample = sampler.sample(c.size(), &mut rng);
    if !is_prime(sample) {
        return Ok(ZmcTrial {
            sample,
            prime: false,
            residue: None,
        });
    }
    Ok(ZmcTrial {
        sample,
        prime: true,
        residue: Some(coeff_mod_prime(c, m, sample, budget)?),
    })
}

/// Randomized test with one-sided error: a zero coefficient is always
/// reported as zero; a nonzero one is missed by a trial only when the sample
/// is composite or divides the coefficient.
pub fn zmc_randomized(
    c: &Circuit,
    m: &Monomial,
    trials: u64,
    sampler: &PrimeSampler,
    budget: &Budget,
) -> Result<ZmcVerdict> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is needed".into()));
    }
    if exceeds_degree_bound(c, m) {
        let mut v = ZmcVerdict::new(ZmcAnswer::CoefficientZero, ZmcMode::Randomized);
        v.short_circuit = true;
        return Ok(v);
    }
    let results = par::map_range(trials, |t| zmc_trial(c, m, sampler, t, budget));
    let residues: Vec<ZmcTrial> = results.into_iter().collect::<Result<_>>()?;
    let nonzero = residues.iter().any(|t| matches!(t.residue, Some(r) if r != 0));
    let answer = if nonzero {
        ZmcAnswer::CoefficientNonzero
    } else {
        ZmcAnswer::CoefficientZero
    };
    let mut v = ZmcVerdict::new(answer, ZmcMode::Randomized);
    v.trials = trials;
    v.residues = residues;
    Ok(v)
}

/// Error-free test for monotone circuits: the coefficient is nonzero iff
/// some parse-tree type produces `m`.
pub fn zmc_monotone(c: &Circuit, m: &Monomial, budget: &Budget) -> Result<ZmcVerdict> {
    if !c.is_monotone() {
        return Err(Error::NotMonotone);
    }
    if exceeds_degree_bound(c, m) {
        let mut v = ZmcVerdict::new(ZmcAnswer::CoefficientZero, ZmcMode::MonotoneType);
        v.short_circuit = true;
        return Ok(v);
    }
    let search = exists_type_for_monomial(c, m, budget)?;
    let answer = if search.witness.is_some() {
        ZmcAnswer::CoefficientNonzero
    } else {
        ZmcAnswer::CoefficientZero
    };
    let mut v = ZmcVerdict::new(answer, ZmcMode::MonotoneType);
    v.witness = search.witness;
    Ok(v)
}
