//! Gate-by-gate symbolic expansion and modular evaluation.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Zero;

use super::{Monomial, Polynomial, Var};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::Budget;

#[derive(Debug, Clone, Default)]
pub struct ExpandOptions {
    /// Reduce coefficients modulo this value.
    pub modulus: Option<u64>,
    /// Drop every term whose exponents are not componentwise at most `cap`.
    pub cap: Option<Monomial>,
    pub budget: Budget,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExpandStats {
    /// Largest number of terms held by any single gate.
    pub peak_terms: usize,
}

/// Exact expansion over the integers.
pub fn expand(c: &Circuit, budget: &Budget) -> Result<Polynomial> {
    expand_with(
        c,
        &ExpandOptions {
            budget: budget.clone(),
            ..Default::default()
        },
    )
    .map(|(p, _)| p)
}

/// Expansion with every coefficient reduced modulo `p`.
pub fn expand_mod(c: &Circuit, p: u64, budget: &Budget) -> Result<Polynomial> {
    expand_with(
        c,
        &ExpandOptions {
            modulus: Some(p),
            budget: budget.clone(),
            ..Default::default()
        },
    )
    .map(|(p, _)| p)
}

/// Expansion that discards terms above `cap` at every gate. Exponents never
/// decrease under addition or multiplication, so coefficients of monomials
/// below the cap are exact.
pub fn expand_truncated(c: &Circuit, cap: &Monomial, budget: &Budget) -> Result<Polynomial> {
    expand_with(
        c,
        &ExpandOptions {
            cap: Some(cap.clone()),
            budget: budget.clone(),
            ..Default::default()
        },
    )
    .map(|(p, _)| p)
}

struct Ctx<'a> {
    modulus: Option<BigInt>,
    cap: Option<&'a Monomial>,
    budget: &'a Budget,
    work: std::cell::Cell<u64>,
}

impl Ctx<'_> {
    fn reduce(&self, c: BigInt) -> BigInt {
        match &self.modulus {
            Some(p) => c.mod_floor(p),
            None => c,
        }
    }

    fn keep(&self, m: &Monomial) -> bool {
        self.cap.is_none_or(|cap| m.divides(cap))
    }

    fn check(&self, terms: &BTreeMap<Monomial, BigInt>, gate: usize) -> Result<()> {
        if terms.len() > self.budget.max_terms {
            return Err(Error::BudgetExceeded(format!(
                "gate {gate}: more than {} terms",
                self.budget.max_terms
            )));
        }
        if let Some((m, _)) = terms.last_key_value() {
            if m.total_degree() > &self.budget.max_total_degree {
                return Err(Error::BudgetExceeded(format!(
                    "gate {gate}: total degree {} above {}",
                    m.total_degree(),
                    self.budget.max_total_degree
                )));
            }
        }
        Ok(())
    }

    fn accumulate(&self, into: &mut BTreeMap<Monomial, BigInt>, m: Monomial, c: BigInt) {
        match into.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
            }
        }
    }

    fn finalize(&self, mut terms: BTreeMap<Monomial, BigInt>) -> BTreeMap<Monomial, BigInt> {
        if self.modulus.is_some() {
            for v in terms.values_mut() {
                *v = self.reduce(std::mem::take(v));
            }
        }
        terms.retain(|_, c| !c.is_zero());
        terms
    }

    fn mul(
        &self,
        a: &BTreeMap<Monomial, BigInt>,
        b: &BTreeMap<Monomial, BigInt>,
        gate: usize,
    ) -> Result<BTreeMap<Monomial, BigInt>> {
        let mut out = BTreeMap::new();
        for (ma, ca) in a {
            let row: u64 = b.values().map(|cb| 1 + (ca.bits() + cb.bits()) / 64).sum();
            let work = self.work.get().saturating_add(row);
            if work > self.budget.max_work {
                return Err(Error::BudgetExceeded(format!(
                    "gate {gate}: more than {} units of work",
                    self.budget.max_work
                )));
            }
            self.work.set(work);
            for (mb, cb) in b {
                let m = ma.mul(mb);
                if !self.keep(&m) {
                    continue;
                }
                self.accumulate(&mut out, m, ca * cb);
            }
            if out.len() > self.budget.max_terms {
                return Err(Error::BudgetExceeded(format!(
                    "gate {gate}: more than {} terms",
                    self.budget.max_terms
                )));
            }
        }
        Ok(self.finalize(out))
    }
}

fn max_degree(t: &BTreeMap<Monomial, BigInt>) -> BigUint {
    t.last_key_value()
        .map(|(m, _)| m.total_degree().clone())
        .unwrap_or_default()
}

/// General expansion entry point; returns the polynomial and peak statistics.
pub fn expand_with(c: &Circuit, opts: &ExpandOptions) -> Result<(Polynomial, ExpandStats)> {
    let ctx = Ctx {
        modulus: opts.modulus.map(BigInt::from),
        cap: opts.cap.as_ref(),
        budget: &opts.budget,
        work: std::cell::Cell::new(0),
    };
    if let Some(p) = opts.modulus {
        if p < 2 {
            return Err(Error::InvalidArgument(format!("modulus {p} below 2")));
        }
    }
    let n = c.size();
    let mut last_use = vec![0usize; n];
    for (i, g) in c.gates().iter().enumerate() {
        for &ch in g.children() {
            last_use[ch] = i;
        }
    }
    let mut vals: Vec<Option<BTreeMap<Monomial, BigInt>>> = vec![None; n];
    let mut stats = ExpandStats::default();
    for (i, g) in c.gates().iter().enumerate() {
        let get = |j: usize| vals[j].as_ref().expect("child computed and still live");
        let terms = match g {
            Gate::Var(v) => {
                let m = Monomial::var(c.var(*v).clone());
                let mut t = BTreeMap::new();
                if ctx.keep(&m) {
                    t.insert(m, BigInt::from(1));
                }
                ctx.finalize(t)
            }
            Gate::Const(k) => {
                let mut t = BTreeMap::new();
                t.insert(Monomial::one(), BigInt::from(k.value()));
                ctx.finalize(t)
            }
            Gate::Add(ch) => {
                let mut t = get(ch[0]).clone();
                for &j in &ch[1..] {
                    for (m, x) in get(j) {
                        ctx.accumulate(&mut t, m.clone(), x.clone());
                    }
                }
                ctx.finalize(t)
            }
            Gate::Mul(ch) => {
                if ctx.cap.is_none() {
                    let bound: BigUint = ch.iter().map(|&j| max_degree(get(j))).sum();
                    if bound > opts.budget.max_total_degree {
                        return Err(Error::BudgetExceeded(format!(
                            "gate {i}: total degree {bound} above {}",
                            opts.budget.max_total_degree
                        )));
                    }
                }
                let mut t = ctx.mul(get(ch[0]), get(ch[1]), i)?;
                for &j in &ch[2..] {
                    t = ctx.mul(&t, get(j), i)?;
                }
                t
            }
        };
        ctx.check(&terms, i)?;
        stats.peak_terms = stats.peak_terms.max(terms.len());
        for &ch in g.children() {
            if last_use[ch] == i {
                vals[ch] = None;
            }
        }
        vals[i] = Some(terms);
    }
    let terms = vals[c.output()].take().unwrap_or_default();
    Ok((Polynomial::from_map(terms, opts.modulus), stats))
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// Value of the circuit at `point` modulo `p`, one ring operation per edge.
pub fn eval(c: &Circuit, point: &HashMap<Var, u64>, p: u64) -> Result<u64> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("modulus {p} below 2")));
    }
    let inputs: Vec<u64> = c
        .vars()
        .iter()
        .map(|v| {
            point
                .get(v)
                .map(|x| x % p)
                .ok_or_else(|| Error::UnboundVariable(v.to_string()))
        })
        .collect::<Result<_>>()?;
    let mut val = vec![0u64; c.size()];
    for (i, g) in c.gates().iter().enumerate() {
        val[i] = match g {
            Gate::Var(v) => inputs[v.0 as usize],
            Gate::Const(k) => {
                if k.value() < 0 {
                    p - 1
                } else {
                    1
                }
            }
            Gate::Add(ch) => ch
                .iter()
                .fold(0u64, |acc, &j| ((acc as u128 + val[j] as u128) % p as u128) as u64),
            Gate::Mul(ch) => ch.iter().fold(1u64 % p, |acc, &j| mulmod(acc, val[j], p)),
        };
    }
    Ok(val[c.output()])
}
