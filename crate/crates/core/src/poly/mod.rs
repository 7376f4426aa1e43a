//! Sparse multivariate polynomials with arbitrary-precision exponents and
//! coefficients, optionally reduced modulo a prime.
//!
//! Terms live in a `BTreeMap` keyed by [`Monomial`], whose `Ord` is graded
//! lexicographic; iteration is therefore canonical and printing walks the map
//! in reverse (highest degree first).

mod expand;
mod text;

pub use expand::{eval, expand, expand_mod, expand_truncated, expand_with, ExpandOptions, ExpandStats};
pub use text::PolynomialJson;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A variable name. Cheap to clone; ordered "naturally" so that `X2 < X10`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn split(&self) -> (&str, Option<u64>) {
        let s: &str = &self.0;
        let cut = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (head, digits) = s.split_at(cut);
        (head, digits.parse::<u64>().ok())
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> Ordering {
        let (ha, na) = self.split();
        let (hb, nb) = other.split();
        ha.cmp(hb).then_with(|| na.cmp(&nb)).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

/// A monomial: variable -> positive exponent. Zero exponents are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    exps: Vec<(Var, BigUint)>,
    total: BigUint,
}

impl Monomial {
    /// The empty monomial `1`.
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(v: Var) -> Self {
        Monomial {
            exps: vec![(v, BigUint::one())],
            total: BigUint::one(),
        }
    }

    /// Builds a monomial from `(variable, exponent)` pairs; repeated variables
    /// are merged and zero exponents dropped.
    pub fn from_pairs<I, E>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (Var, E)>,
        E: Into<BigUint>,
    {
        let mut map: BTreeMap<Var, BigUint> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_default() += e.into();
        }
        let exps: Vec<(Var, BigUint)> = map.into_iter().filter(|(_, e)| !e.is_zero()).collect();
        let total = exps.iter().map(|(_, e)| e).sum();
        Monomial { exps, total }
    }

    /// Product of the named variables, each to the first power.
    pub fn product_of<'a, I: IntoIterator<Item = &'a str>>(names: I) -> Self {
        Self::from_pairs(names.into_iter().map(|n| (Var::new(n), 1u32)))
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponent(&self, v: &Var) -> BigUint {
        match self.exps.binary_search_by(|(w, _)| w.cmp(v)) {
            Ok(i) => self.exps[i].1.clone(),
            Err(_) => BigUint::zero(),
        }
    }

    pub fn exponent_of(&self, name: &str) -> BigUint {
        self.exponent(&Var::new(name))
    }

    pub fn total_degree(&self) -> &BigUint {
        &self.total
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &BigUint)> {
        self.exps.iter().map(|(v, e)| (v, e))
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.exps.iter().map(|(v, _)| v)
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn is_multilinear(&self) -> bool {
        self.exps.iter().all(|(_, e)| e.is_one())
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exps = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() && j < other.exps.len() {
            let (va, ea) = &self.exps[i];
            let (vb, eb) = &other.exps[j];
            match va.cmp(vb) {
                Ordering::Less => {
                    exps.push((va.clone(), ea.clone()));
                    i += 1;
                }
                Ordering::Greater => {
                    exps.push((vb.clone(), eb.clone()));
                    j += 1;
                }
                Ordering::Equal => {
                    exps.push((va.clone(), ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        exps.extend_from_slice(&self.exps[i..]);
        exps.extend_from_slice(&other.exps[j..]);
        Monomial {
            exps,
            total: &self.total + &other.total,
        }
    }

    /// Componentwise `self <= cap`; variables absent from `cap` are capped at 0.
    pub fn divides(&self, cap: &Monomial) -> bool {
        let mut j = 0;
        for (v, e) in &self.exps {
            while j < cap.exps.len() && cap.exps[j].0 < *v {
                j += 1;
            }
            if j == cap.exps.len() || cap.exps[j].0 != *v || cap.exps[j].1 < *e {
                return false;
            }
        }
        true
    }

    /// Removes the exponent of `v` entirely.
    pub fn without(&self, v: &Var) -> Monomial {
        Self::from_pairs(
            self.exps
                .iter()
                .filter(|(w, _)| w != v)
                .map(|(w, e)| (w.clone(), e.clone())),
        )
    }

    /// Returns `self` with the exponent of `v` replaced by `e`.
    pub fn with_exponent(&self, v: &Var, e: BigUint) -> Monomial {
        let mut pairs: Vec<(Var, BigUint)> = self.exps.iter().filter(|(w, _)| w != v).cloned().collect();
        pairs.push((v.clone(), e));
        Self::from_pairs(pairs)
    }

    fn lex_cmp(&self, other: &Monomial) -> Ordering {
        for (a, b) in self.exps.iter().zip(other.exps.iter()) {
            match a.0.cmp(&b.0) {
                // `self` has a positive power of a variable earlier in the order.
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match a.1.cmp(&b.1) {
                    Ordering::Equal => {}
                    o => return o,
                },
            }
        }
        self.exps.len().cmp(&other.exps.len())
    }

    /// Parses `X1^2*X2`, `Y1*Y2` or `1`.
    pub fn parse(s: &str) -> Result<Monomial> {
        let p: Polynomial = s
            .parse()
            .map_err(|e: Error| Error::InvalidMonomial(format!("{s}: {e}")))?;
        let mut terms = p.terms.into_iter();
        match (terms.next(), terms.next()) {
            (Some((m, c)), None) if c.is_one() => Ok(m),
            _ => Err(Error::InvalidMonomial(format!(
                "`{s}` is not a single monomial with coefficient 1"
            ))),
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total.cmp(&other.total).then_with(|| self.lex_cmp(other))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return f.write_str("1");
        }
        for (i, (v, e)) in self.exps.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if e.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for Monomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Monomial::parse(s)
    }
}

impl Serialize for Monomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Monomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Monomial::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// A sparse polynomial over the integers, or over `Z/pZ` when `modulus` is set.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, BigInt>,
    modulus: Option<u64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn zero_mod(modulus: Option<u64>) -> Self {
        Polynomial {
            terms: BTreeMap::new(),
            modulus,
        }
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn term(m: Monomial, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c.into());
        p
    }

    pub fn var(name: &str) -> Self {
        Self::term(Monomial::var(Var::new(name)), 1)
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, BigInt)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn modulus(&self) -> Option<u64> {
        self.modulus
    }

    fn normalize(&self, c: BigInt) -> BigInt {
        match self.modulus {
            Some(p) => c.mod_floor(&BigInt::from(p)),
            None => c,
        }
    }

    /// Adds `c * m`, dropping the term if the coefficient becomes zero.
    pub fn add_term(&mut self, m: Monomial, c: BigInt) {
        let c = self.normalize(c);
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + c;
                let s = match self.modulus {
                    Some(p) => s.mod_floor(&BigInt::from(p)),
                    None => s,
                };
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// Reduces every coefficient mod `p`.
    pub fn reduce_mod(&self, p: u64) -> Polynomial {
        let mut out = Polynomial::zero_mod(Some(p));
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of monomials with nonzero coefficient.
    pub fn count_monomials(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// True iff every exponent is at most one; the zero polynomial qualifies.
    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(Monomial::is_multilinear)
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    pub fn total_degree(&self) -> Option<&BigUint> {
        self.terms.keys().next_back().map(Monomial::total_degree)
    }

    pub fn degree_in(&self, v: &Var) -> BigUint {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or_default()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.modulus = self.modulus.or(other.modulus);
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        let mut out = Polynomial::zero_mod(self.modulus);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigInt) -> Polynomial {
        let mut out = Polynomial::zero_mod(self.modulus);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero_mod(self.modulus.or(other.modulus));
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut out = Polynomial::zero_mod(self.modulus);
        out.add_term(Monomial::one(), BigInt::one());
        (0..k).fold(out, |acc, _| acc.mul(self))
    }

    /// Sum of the terms of total degree exactly `d`.
    pub fn homogeneous_part(&self, d: &BigUint) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.total_degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
            modulus: self.modulus,
        }
    }

    /// Formal partial derivative with respect to `v`.
    pub fn derivative(&self, v: &Var) -> Polynomial {
        let mut out = Polynomial::zero_mod(self.modulus);
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e.is_zero() {
                continue;
            }
            let reduced = m.with_exponent(v, &e - 1u32);
            out.add_term(reduced, c * BigInt::from(e));
        }
        out
    }

    /// Evaluates at a point modulo `p` (exponents via fast modular powering).
    pub fn eval_mod(&self, point: &HashMap<Var, u64>, p: u64) -> Result<u64> {
        let pb = BigUint::from(p);
        let mut acc = BigUint::zero();
        for (m, c) in &self.terms {
            let mut t = to_residue(c, p);
            for (v, e) in m.iter() {
                let x = point.get(v).ok_or_else(|| Error::UnboundVariable(v.to_string()))?;
                t = t * BigUint::from(*x).modpow(e, &pb) % &pb;
            }
            acc = (acc + t) % &pb;
        }
        Ok(acc.to_u64().unwrap_or(0))
    }

    /// Substitutes integer values for some variables, keeping the others.
    pub fn substitute(&self, values: &HashMap<Var, BigInt>) -> Polynomial {
        let mut out = Polynomial::zero_mod(self.modulus);
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for (v, e) in m.iter() {
                match values.get(v) {
                    Some(x) => {
                        let e = e.to_u32().expect("substitution exponent fits in u32");
                        coeff *= x.pow(e);
                    }
                    None => rest.push((v.clone(), e.clone())),
                }
            }
            out.add_term(Monomial::from_pairs(rest), coeff);
        }
        out
    }

    pub(crate) fn from_map(terms: BTreeMap<Monomial, BigInt>, modulus: Option<u64>) -> Self {
        Polynomial { terms, modulus }
    }
}

/// `c mod p` as a nonnegative residue.
pub fn to_residue(c: &BigInt, p: u64) -> BigUint {
    let r = c.mod_floor(&BigInt::from(p));
    match r.sign() {
        Sign::Minus => unreachable!("mod_floor with positive modulus"),
        _ => r.magnitude().clone(),
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)?;
        if let Some(p) = self.modulus {
            write!(f, " (mod {p})")?;
        }
        Ok(())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let a = c.abs();
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        Ok(())
    }
}

impl Polynomial {
    /// Coefficients as signed values; only meaningful for integer polynomials.
    pub fn max_abs_coefficient(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    fn m(s: &str) -> Monomial {
        Monomial::parse(s).unwrap()
    }

    #[test]
    fn natural_variable_order() {
        assert!(Var::new("X2") < Var::new("X10"));
        assert!(Var::new("X9") < Var::new("Y1"));
    }

    #[test]
    fn grlex_printing() {
        let q = p("4 + -1*X3 + 3*X1^2*X2");
        assert_eq!(q.to_string(), "3*X1^2*X2 - X3 + 4");
        let sq = p("X1^2 + 2*X1*X2 + X2^2");
        assert_eq!(sq.to_string(), "X1^2 + 2*X1*X2 + X2^2");
    }

    #[test]
    fn counts_coefficients_multilinearity() {
        let q = p("X1^2 + 2*X1*X2 + X2^2");
        assert_eq!(q.count_monomials(), 3);
        assert_eq!(q.coefficient(&m("X1*X2")), BigInt::from(2));
        assert!(!q.is_multilinear());
        assert_eq!(Polynomial::zero().count_monomials(), 0);
        assert!(Polynomial::zero().is_multilinear());
        assert!(p("X1*X2*X3").is_multilinear());
    }

    #[test]
    fn divides_respects_missing_variables() {
        assert!(m("X").divides(&m("X^2*Y")));
        assert!(!m("Z").divides(&m("X^2*Y")));
        assert!(m("1").divides(&m("1")));
        assert!(!m("X^3").divides(&m("X^2")));
    }

    #[test]
    fn modular_reduction_drops_vanishing_terms() {
        let q = p("1 + 5*X + 10*X^2 + 10*X^3 + 5*X^4 + X^5").reduce_mod(5);
        assert_eq!(q.to_string(), "X^5 + 1");
    }

    #[test]
    fn derivative_and_homogeneous_part() {
        let q = p("X^3 + X*Y");
        assert_eq!(q.derivative(&Var::new("X")).to_string(), "3*X^2 + Y");
        assert_eq!(q.homogeneous_part(&BigUint::from(2u32)).to_string(), "X*Y");
    }
}
