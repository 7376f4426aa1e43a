use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};

use super::{Builder, Circuit};
use crate::error::{Error, Result};
use crate::poly::{Monomial, Var};

/// What a variable is replaced by in [`substitute`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    Const(BigInt),
    Var(String),
}

/// Replaces each bound variable, at every occurrence, by a fresh copy of its
/// binding. Constants are built with [`Builder::scalar`]; `0` becomes
/// `(-1) + 1`.
pub fn substitute(c: &Circuit, bindings: &[(String, Binding)]) -> Result<Circuit> {
    let mut map: HashMap<Var, &Binding> = HashMap::new();
    for (name, b) in bindings {
        if !c.has_var(name) {
            return Err(Error::UnknownVariable(name.clone()));
        }
        map.insert(Var::new(name), b);
    }
    let mut b = if c.is_unbounded_fanin() {
        Builder::unbounded()
    } else {
        Builder::new()
    };
    let out = b.embed_with(c, |b, v| match map.get(v) {
        Some(Binding::Const(k)) => b.scalar(k),
        Some(Binding::Var(w)) => b.var(w),
        None => b.var(v.as_str()),
    });
    b.finish(out)
}

fn combine(items: &[&Circuit], add: bool) -> Result<Circuit> {
    let mut b = if items.iter().any(|c| c.is_unbounded_fanin()) {
        Builder::unbounded()
    } else {
        Builder::new()
    };
    let outs: Vec<usize> = items.iter().map(|c| b.embed(c)).collect();
    let out = if add { b.sum(outs) } else { b.product(outs) };
    b.finish(out)
}

/// Sum of circuits (variables matched by name); `0` for an empty list.
pub fn sum(items: &[&Circuit]) -> Result<Circuit> {
    combine(items, true)
}

/// Product of circuits; `1` for an empty list.
pub fn product(items: &[&Circuit]) -> Result<Circuit> {
    combine(items, false)
}

/// `c^k` by iterated squaring.
pub fn power(c: &Circuit, k: &BigUint) -> Result<Circuit> {
    let mut b = Builder::new();
    let g = b.embed(c);
    let out = b.power(g, k);
    b.finish(out)
}

/// The constant `n`.
pub fn scalar(n: &BigInt) -> Result<Circuit> {
    let mut b = Builder::new();
    let out = b.scalar(n);
    b.finish(out)
}

/// A circuit computing exactly the monomial `m`.
pub fn monomial_circuit(m: &Monomial) -> Result<Circuit> {
    let mut b = Builder::new();
    let out = b.monomial(m);
    b.finish(out)
}
