//! Gadget circuits built from combinatorial instances.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, Zero};

use super::determinant::{determinant_circuit, entry_name};
use super::instances::{Block, ExactCoverInstance, Literal, NormalizedCnf, SignMatrix, ThreeCnf};
use crate::circuit::{substitute, Binding, Builder, Circuit, Gate, GateId};
use crate::error::{Error, Result};
use crate::poly::{Monomial, Var};

fn y_name(j: usize) -> String {
    format!("Y{}", j + 1)
}

pub fn x_name(i: usize) -> String {
    format!("X{}", i + 1)
}

pub fn z_name(j: usize) -> String {
    format!("Z{}", j + 1)
}

/// `Q - d·Y1⋯Yn` with `Q = Π_i Σ_j a_ij Y_j`, and the monomial `Y1⋯Yn`. The
/// coefficient of the monomial is `per(A) - d`.
pub fn perm_to_zmc(a: &SignMatrix, d: &BigInt) -> Result<(Circuit, Monomial)> {
    let n = a.n();
    let mut b = Builder::new();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut terms = Vec::new();
        for j in 0..n {
            match a.get(i, j) {
                0 => {}
                1 => terms.push(b.var(&y_name(j))),
                _ => {
                    let m = b.neg_one();
                    let y = b.var(&y_name(j));
                    terms.push(b.mul(m, y));
                }
            }
        }
        rows.push(b.sum(terms));
    }
    let q = b.product(rows);
    let names: Vec<String> = (0..n).map(y_name).collect();
    let m = Monomial::product_of(names.iter().map(String::as_str));
    let out = if d.is_zero() {
        q
    } else {
        let s = b.scalar(&-d);
        let mg = b.monomial(&m);
        let t = b.mul(s, mg);
        b.add(q, t)
    };
    Ok((b.finish(out)?, m))
}

/// `F = Π_i (1 + Π_{j∈C_i} X_j)` and `X1⋯Xn`; the monomial occurs iff the
/// sets contain an exact cover.
pub fn x3c_to_zmc(inst: &ExactCoverInstance) -> Result<(Circuit, Monomial)> {
    let mut b = Builder::new();
    let mut factors = Vec::with_capacity(inst.sets.len());
    for s in &inst.sets {
        let one = b.one();
        let xs: Vec<GateId> = s.iter().map(|&e| b.var(&x_name(e - 1))).collect();
        let p = b.product(xs);
        factors.push(b.add(one, p));
    }
    let out = b.product(factors);
    let names: Vec<String> = (0..inst.n).map(x_name).collect();
    Ok((b.finish(out)?, Monomial::product_of(names.iter().map(String::as_str))))
}

fn require_normal(f: &ThreeCnf) -> Result<()> {
    if f.is_normal() {
        Ok(())
    } else {
        Err(Error::InvalidInstance(
            "formula is not normalized: blocks must have equal size and clauses must be pure with at most 3 literals"
                .into(),
        ))
    }
}

/// `I(l)`: `X_i` for a positive `x` literal, times `Z_j` for every clause
/// containing `l`. Empty products are the constant 1.
fn literal_term(b: &mut Builder, f: &ThreeCnf, lit: Literal) -> GateId {
    let mut factors = Vec::new();
    if lit.block == Block::X && lit.positive {
        factors.push(b.var(&x_name(lit.index)));
    }
    for (j, cl) in f.clauses.iter().enumerate() {
        if cl.contains(&lit) {
            factors.push(b.var(&z_name(j)));
        }
    }
    b.product_flat(factors)
}

/// Factors of `C = Π (I(x_i) + I(¬x_i)) Π (I(y_i) + I(¬y_i))`.
fn assignment_factors(b: &mut Builder, f: &ThreeCnf) -> Vec<GateId> {
    let mut out = Vec::new();
    for i in 0..f.nx {
        let p = literal_term(b, f, Literal::x(i, true));
        let q = literal_term(b, f, Literal::x(i, false));
        out.push(b.sum_flat(vec![p, q]));
    }
    for i in 0..f.ny {
        let p = literal_term(b, f, Literal::y(i, true));
        let q = literal_term(b, f, Literal::y(i, false));
        out.push(b.sum_flat(vec![p, q]));
    }
    out
}

/// `Σ_{p∈exps} Z^p` as one addition gate over fresh leaves.
fn z_powers(b: &mut Builder, j: usize, exps: &[u32]) -> GateId {
    let terms: Vec<GateId> = exps
        .iter()
        .map(|&p| {
            let leaves: Vec<GateId> = (0..p).map(|_| b.var(&z_name(j))).collect();
            b.product(leaves)
        })
        .collect();
    b.sum(terms)
}

/// Factors of `C' = C · Π_j (1 + Z_j + Z_j^2)`.
fn c_prime_factors(b: &mut Builder, f: &ThreeCnf) -> Vec<GateId> {
    let mut factors = assignment_factors(b, f);
    for j in 0..f.clauses.len() {
        factors.push(z_powers(b, j, &[0, 1, 2]));
    }
    factors
}

/// `C'` alone: the coefficient of `Π X_i^{α_i} Π Z_j^3` is the number of
/// `y` assignments satisfying `F(α, y)`.
pub fn ccne_c_prime(f: &ThreeCnf) -> Result<Circuit> {
    require_normal(f)?;
    let mut b = Builder::unbounded();
    let factors = c_prime_factors(&mut b, f);
    let out = b.product_flat(factors);
    b.finish(out)
}

/// `Π_j Z_j^3`.
pub fn z_cubes(c: usize) -> Monomial {
    Monomial::from_pairs((0..c).map(|j| (Var::new(&z_name(j)), 3u32)))
}

/// A counting instance: does the circuit have at least `k` monomials
/// extending `base`?
#[derive(Debug, Clone)]
pub struct CountExtInstance {
    pub circuit: Circuit,
    pub k: BigUint,
    pub base: Monomial,
}

/// `C'' = C' - ℓ Π (1 + X_i) Π Z_j^3`, whose `Π Z_j^3`-extending monomials
/// are exactly the `x` assignments with a model count different from `ℓ`.
pub fn ccne3sat_to_countextmon(f: &ThreeCnf, k: &BigUint, ell: &BigUint) -> Result<CountExtInstance> {
    require_normal(f)?;
    let mut b = Builder::unbounded();
    let factors = c_prime_factors(&mut b, f);
    let c_prime = b.product_flat(factors);
    let out = if ell.is_zero() {
        c_prime
    } else {
        let neg: BigInt = -BigInt::from(ell.clone());
        let mut factors = vec![scalar_unary_big(&mut b, &neg)?];
        for i in 0..f.nx {
            let one = b.one();
            let x = b.var(&x_name(i));
            factors.push(b.add(one, x));
        }
        for j in 0..f.clauses.len() {
            for _ in 0..3 {
                factors.push(b.var(&z_name(j)));
            }
        }
        let t = b.product_flat(factors);
        b.sum_flat(vec![c_prime, t])
    };
    Ok(CountExtInstance {
        circuit: b.finish(out)?,
        k: k.clone(),
        base: z_cubes(f.clauses.len()),
    })
}

fn scalar_unary_big(b: &mut Builder, n: &BigInt) -> Result<GateId> {
    let v: i64 = n
        .try_into()
        .map_err(|_| Error::SizeGuard(format!("unary scalar {n} too large")))?;
    if v.unsigned_abs() > 1 << 20 {
        return Err(Error::SizeGuard(format!("unary scalar {n} too large")));
    }
    Ok(b.scalar_unary(v))
}

/// `C̃_j = Π_i (X_i + 1) · Π_{j'≠j} Σ_{p≤5} Z_{j'}^p · (1 + Z_j + Z_j^2 + Z_j^4 + Z_j^5)`,
/// optionally times a unary scalar, as one product gate.
fn extra_term(b: &mut Builder, n: usize, c: usize, j: usize, scale: Option<&BigInt>) -> Result<GateId> {
    let mut factors = Vec::new();
    if let Some(s) = scale {
        factors.push(scalar_unary_big(b, s)?);
    }
    for i in 0..n {
        let x = b.var(&x_name(i));
        let one = b.one();
        factors.push(b.add(x, one));
    }
    for jj in 0..c {
        let exps: &[u32] = if jj == j { &[0, 1, 2, 4, 5] } else { &[0, 1, 2, 3, 4, 5] };
        factors.push(z_powers(b, jj, exps));
    }
    Ok(b.product_flat(factors))
}

/// `2^n (6^c - 1)`: the number of non-extending monomials `C̃` supplies.
pub fn non_extending_count(n: usize, c: usize) -> BigUint {
    (BigUint::one() << n) * (Pow::pow(BigUint::from(6u32), c) - BigUint::one())
}

/// `C* = C'' + (ℓ+1) Σ_j C̃_j` with threshold `2^n (6^c - 1) + k`. The top
/// addition of `C''` is merged into the outer sum, so `C*` is an unbounded
/// fanin formula of depth at most 4.
pub fn countextmon_to_countmon(
    inst: &CountExtInstance,
    ell: &BigUint,
    n: usize,
    c: usize,
) -> Result<(Circuit, BigUint)> {
    if inst.base != z_cubes(c) {
        return Err(Error::ParameterMismatch(format!(
            "base monomial {} is not the product of Z_j^3 over {c} clauses",
            inst.base
        )));
    }
    let allowed: Vec<String> = (0..n).map(x_name).chain((0..c).map(z_name)).collect();
    if let Some(v) = inst.circuit.var_names().into_iter().find(|v| !allowed.contains(v)) {
        return Err(Error::ParameterMismatch(format!(
            "variable {v} does not belong to an instance with n = {n}, c = {c}"
        )));
    }
    let mut b = Builder::unbounded();
    let mut items = Vec::new();
    let top = b.embed(&inst.circuit);
    match b.gate(top) {
        Gate::Add(ch) => items.extend(ch.iter().copied()),
        _ => items.push(top),
    }
    let scale = BigInt::from(ell.clone()) + 1;
    for j in 0..c {
        items.push(extra_term(&mut b, n, c, j, Some(&scale))?);
    }
    let out = b.sum(items);
    Ok((b.finish(out)?, non_extending_count(n, c) + &inst.k))
}

/// `C* = C' + Σ_j C̃_j`, a monotone formula with at least
/// `2^n (6^c - 1) + k` monomials iff at least `k` assignments to `x` leave
/// `F` satisfiable.
pub fn cexists3sat_to_countmon(f: &ThreeCnf, k: &BigUint) -> Result<(Circuit, BigUint)> {
    require_normal(f)?;
    let (n, c) = (f.nx, f.clauses.len());
    let mut b = Builder::unbounded();
    let factors = c_prime_factors(&mut b, f);
    let mut items = vec![b.product_flat(factors)];
    for j in 0..c {
        items.push(extra_term(&mut b, n, c, j, None)?);
    }
    let out = b.sum(items);
    Ok((b.finish(out)?, non_extending_count(n, c) + k))
}

/// The determinant circuit with `X_ij` replaced by `a_ij X_ij`; for a 0/1
/// matrix it is multilinear with exactly `per(A)` monomials.
pub fn perm_to_mlcountmon(a: &SignMatrix) -> Result<Circuit> {
    if !a.is_zero_one() {
        return Err(Error::InvalidInstance("matrix must have 0/1 entries".into()));
    }
    let n = a.n();
    let det = determinant_circuit(n)?;
    let bindings: Vec<(String, Binding)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| a.get(i, j) == 0)
        .map(|(i, j)| (entry_name(i, j, n), Binding::Const(BigInt::zero())))
        .collect();
    substitute(&det, &bindings)
}

/// Source instance normalized for the 3-CNF gadgets, with `k` and `ℓ`
/// rescaled for the padding: `k·2^{x_pad}` and `ℓ·2^{y_pad}`.
pub fn normalize_counting(f: &ThreeCnf, k: &BigUint, ell: &BigUint) -> Result<(NormalizedCnf, BigUint, BigUint)> {
    let nf = f.normalize()?;
    let k2 = k << nf.x_pad;
    let l2 = ell << nf.y_pad;
    Ok((nf, k2, l2))
}
