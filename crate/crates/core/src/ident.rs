//! Identity testing and multilinearity: second-derivative circuits, the
//! multilinearity check, homogeneous components and multilinear coefficient
//! queries.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{substitute, syntactic_degrees, Binding, Builder, Circuit, Gate, GateId};
use crate::error::{Error, Result};
use crate::par;
use crate::poly::{eval, expand, Monomial, Var};
use crate::primes::PrimeSampler;
use crate::zmc::coeff_exact;
use crate::{Budget, Method, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AcitAnswer {
    IdenticallyZero,
    Nonzero,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcitVerdict {
    pub answer: AcitAnswer,
    pub mode: Mode,
    pub trials: u64,
    /// Upper bit length of the sampled primes (randomized mode).
    pub prime_bits: u32,
    pub points: u64,
    /// Per-trial Schwartz-Zippel bound `deg / p_min`, capped at 1.
    pub per_trial_bound: f64,
}

impl AcitVerdict {
    pub fn is_zero(&self) -> bool {
        self.answer == AcitAnswer::IdenticallyZero
    }
}

fn acit_answer(nonzero: bool) -> AcitAnswer {
    if nonzero {
        AcitAnswer::Nonzero
    } else {
        AcitAnswer::IdenticallyZero
    }
}

pub fn acit_exact(c: &Circuit, b: &Budget) -> Result<AcitVerdict> {
    let p = expand(c, b)?;
    Ok(AcitVerdict {
        answer: acit_answer(!p.is_zero()),
        mode: Mode::Exact,
        trials: 0,
        prime_bits: 0,
        points: 0,
        per_trial_bound: 0.0,
    })
}

/// Evaluates `c` at uniform points of `Z_p^n` for random primes `p` of at
/// least 32 bits. A nonzero value proves `c` nonzero.
pub fn acit_randomized(c: &Circuit, trials: u64, sampler: &PrimeSampler) -> Result<AcitVerdict> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is needed".into()));
    }
    let values = par::map_range(trials, |t| {
        let mut rng = sampler.rng(t);
        let p = sampler.field_prime(c.size(), &mut rng);
        let point: HashMap<Var, u64> = c.vars().iter().map(|v| (v.clone(), rng.gen_range(0..p))).collect();
        eval(c, &point, p)
    });
    let mut nonzero = false;
    for v in values {
        nonzero |= v? != 0;
    }
    let (deg, _) = syntactic_degrees(c);
    let bound = (deg[c.output()].to_f64().unwrap_or(f64::INFINITY) / 2f64.powi(31)).min(1.0);
    Ok(AcitVerdict {
        answer: acit_answer(nonzero),
        mode: Mode::Randomized,
        trials,
        prime_bits: sampler.field_bits(c.size()),
        points: trials,
        per_trial_bound: bound,
    })
}

pub fn acit(c: &Circuit, method: &Method, b: &Budget) -> Result<AcitVerdict> {
    match method {
        Method::Exact => acit_exact(c, b),
        Method::Randomized { trials, sampler } => acit_randomized(c, *trials, sampler),
    }
}

fn opt_sum(b: &mut Builder, items: Vec<Option<GateId>>) -> Option<GateId> {
    let items: Vec<GateId> = items.into_iter().flatten().collect();
    (!items.is_empty()).then(|| b.sum(items))
}

fn opt_mul(b: &mut Builder, x: Option<GateId>, y: Option<GateId>) -> Option<GateId> {
    Some(b.mul(x?, y?))
}

fn builder_like(c: &Circuit) -> Builder {
    if c.is_unbounded_fanin() {
        Builder::unbounded()
    } else {
        Builder::new()
    }
}

/// A circuit for the second partial derivative in `var`. Each gate becomes a
/// triple (value, first, second derivative), `None` standing for zero; the
/// product rule is applied pairwise along multiplication gates.
pub fn second_derivative_circuit(c: &Circuit, var: &str) -> Result<Circuit> {
    let target = c.var_id(var);
    let mut b = builder_like(c);
    let mut tri: Vec<(GateId, Option<GateId>, Option<GateId>)> = Vec::with_capacity(c.size());
    for g in c.gates() {
        let t = match g {
            Gate::Var(v) => {
                let x = b.var(c.var(*v).as_str());
                let d1 = (Some(*v) == target).then(|| b.one());
                (x, d1, None)
            }
            Gate::Const(k) => (b.constant(*k), None, None),
            Gate::Add(ch) => {
                let v = b.sum(ch.iter().map(|&i| tri[i].0).collect());
                let d1 = opt_sum(&mut b, ch.iter().map(|&i| tri[i].1).collect());
                let d2 = opt_sum(&mut b, ch.iter().map(|&i| tri[i].2).collect());
                (v, d1, d2)
            }
            Gate::Mul(ch) => {
                let mut acc = tri[ch[0]];
                for &i in &ch[1..] {
                    let (u, u1, u2) = acc;
                    let (w, w1, w2) = tri[i];
                    let v = b.mul(u, w);
                    let a = opt_mul(&mut b, u1, Some(w));
                    let bb = opt_mul(&mut b, Some(u), w1);
                    let d1 = opt_sum(&mut b, vec![a, bb]);
                    let p = opt_mul(&mut b, u2, Some(w));
                    let q = opt_mul(&mut b, Some(u), w2);
                    let r = opt_mul(&mut b, u1, w1).map(|m| {
                        let one = b.one();
                        let one2 = b.one();
                        let two = b.add(one, one2);
                        b.mul(two, m)
                    });
                    let d2 = opt_sum(&mut b, vec![p, r, q]);
                    acc = (v, d1, d2);
                }
                acc
            }
        };
        tri.push(t);
    }
    let out = match tri[c.output()].2 {
        Some(g) => g,
        None => b.zero(),
    };
    b.finish(out)
}

/// `Σ Y_i · ∂²c/∂X_i²` over the variables of `c`, with fresh `Y_i`. It is
/// identically zero iff `c` computes a multilinear polynomial.
pub fn checkml_circuit(c: &Circuit) -> Result<Circuit> {
    let names = c.var_names();
    let ys = c.fresh_names("Y", 1, names.len());
    let mut b = builder_like(c);
    let mut terms = Vec::new();
    for (x, y) in names.iter().zip(&ys) {
        let d = second_derivative_circuit(c, x)?;
        let g = b.embed(&d);
        let yv = b.var(y);
        terms.push(b.mul(yv, g));
    }
    let out = b.sum(terms);
    b.finish(out)
}

/// `c · X0²` for a variable `X0` not occurring in `c`: multilinear iff `c` is
/// identically zero.
pub fn acit_to_checkml(c: &Circuit) -> Result<Circuit> {
    let x0 = c.fresh_names("X", 0, 1).remove(0);
    let mut b = builder_like(c);
    let g = b.embed(c);
    let x1 = b.var(&x0);
    let x2 = b.var(&x0);
    let out = b.product(vec![g, x1, x2]);
    b.finish(out)
}

pub fn check_multilinear(c: &Circuit, method: &Method, b: &Budget) -> Result<bool> {
    let d = checkml_circuit(c)?;
    Ok(acit(&d, method, b)?.is_zero())
}

/// The degree-`d` homogeneous part of `c`: gate `(v, t)` carries the degree-`t`
/// part of `v` for `t ≤ d`.
pub fn homogeneous_component_circuit(c: &Circuit, d: usize) -> Result<Circuit> {
    let mut b = builder_like(c);
    let mut comp: Vec<Vec<Option<GateId>>> = Vec::with_capacity(c.size());
    for g in c.gates() {
        let mut row = vec![None; d + 1];
        match g {
            Gate::Var(v) => {
                if d >= 1 {
                    row[1] = Some(b.var(c.var(*v).as_str()));
                }
            }
            Gate::Const(k) => row[0] = Some(b.constant(*k)),
            Gate::Add(ch) => {
                for (t, slot) in row.iter_mut().enumerate() {
                    *slot = opt_sum(&mut b, ch.iter().map(|&i| comp[i][t]).collect());
                }
            }
            Gate::Mul(ch) => {
                let mut acc = comp[ch[0]].clone();
                for &i in &ch[1..] {
                    let rhs = &comp[i];
                    let mut next = vec![None; d + 1];
                    for (t, slot) in next.iter_mut().enumerate() {
                        let parts: Vec<Option<GateId>> = (0..=t).map(|a| opt_mul(&mut b, acc[a], rhs[t - a])).collect();
                        *slot = opt_sum(&mut b, parts);
                    }
                    acc = next;
                }
                row = acc;
            }
        }
        comp.push(row);
    }
    let out = match comp[c.output()][d] {
        Some(g) => g,
        None => b.zero(),
    };
    b.finish(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MlZmcAnswer {
    NotMultilinear,
    CoefficientZero,
    CoefficientNonzero,
}

fn total_degree_usize(m: &Monomial) -> Result<usize> {
    m.total_degree()
        .to_usize()
        .ok_or_else(|| Error::InvalidMonomial("degree too large".into()))
}

/// The constant circuit obtained from the degree-`deg m` component of `c` by
/// setting the variables of `m` to 1 and all others to 0. For multilinear `c`
/// it computes the coefficient of `m`.
pub fn mlzmc_constant_circuit(c: &Circuit, m: &Monomial) -> Result<Circuit> {
    let c1 = homogeneous_component_circuit(c, total_degree_usize(m)?)?;
    let bindings: Vec<(String, Binding)> = c1
        .var_names()
        .into_iter()
        .map(|v| {
            let val = if m.exponent_of(&v).is_zero() { 0 } else { 1 };
            (v, Binding::Const(val.into()))
        })
        .collect();
    substitute(&c1, &bindings)
}

pub fn mlzmc_decide(c: &Circuit, m: &Monomial, method: &Method, b: &Budget) -> Result<MlZmcAnswer> {
    if !m.is_multilinear() || !check_multilinear(c, method, b)? {
        return Ok(MlZmcAnswer::NotMultilinear);
    }
    let zero = match method {
        Method::Exact => coeff_exact(c, m, b)?.is_zero(),
        Method::Randomized { .. } => acit(&mlzmc_constant_circuit(c, m)?, method, b)?.is_zero(),
    };
    Ok(if zero {
        MlZmcAnswer::CoefficientZero
    } else {
        MlZmcAnswer::CoefficientNonzero
    })
}

/// `C2 + Z·C3` with `C2` the constant circuit above and `C3` the
/// multilinearity check: identically zero iff `c` is multilinear and the
/// coefficient of `m` vanishes. A non-multilinear `m` gives the constant 1.
pub fn mlzmc_to_acit(c: &Circuit, m: &Monomial) -> Result<Circuit> {
    let mut b = builder_like(c);
    if !m.is_multilinear() {
        let one = b.one();
        return b.finish(one);
    }
    let c2 = mlzmc_constant_circuit(c, m)?;
    let c3 = checkml_circuit(c)?;
    let z = c3.fresh_names("Z", 0, 1).remove(0);
    let g2 = b.embed(&c2);
    let g3 = b.embed(&c3);
    let zv = b.var(&z);
    let t = b.mul(zv, g3);
    let out = b.add(g2, t);
    b.finish(out)
}

/// Degree of `c` in each variable, from the syntactic bound.
pub fn degree_bounds(c: &Circuit) -> Vec<(String, BigUint)> {
    let (_, per) = syntactic_degrees(c);
    c.var_names().into_iter().zip(per[c.output()].iter().cloned()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::poly::Polynomial;

    fn poly(c: &Circuit) -> Polynomial {
        expand(c, &Budget::default()).unwrap()
    }

    fn p(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    fn mono(s: &str) -> Monomial {
        Monomial::parse(s).unwrap()
    }

    fn pc(s: &str) -> Circuit {
        parse_circuit(s).unwrap()
    }

    #[test]
    fn acit_examples() {
        let b = Budget::default();
        let id = pc("x=var X; y=var Y; s=add x y; q=mul s s; \
                     a=var X; a2=mul a a; n=const -1; na=mul n a2; \
                     c=var X; d=var Y; cd=mul c d; o=const 1; two=add o o; t=mul two cd; n2=const -1; nt=mul n2 t; \
                     e=var Y; e2=mul e e; n3=const -1; ne=mul n3 e2; \
                     r1=add q na; r2=add r1 nt; r3=add r2 ne; out r3");
        assert!(acit_exact(&id, &b).unwrap().is_zero());
        let one = pc("o=const 1; out o");
        assert!(!acit_exact(&one, &b).unwrap().is_zero());
        let xz = pc("x=var X; a=const -1; o=const 1; z=add a o; m=mul x z; out m");
        assert!(acit_exact(&xz, &b).unwrap().is_zero());

        let s = PrimeSampler::new(11);
        assert!(acit_randomized(&id, 20, &s).unwrap().is_zero());
        assert!(acit_randomized(&xz, 20, &s).unwrap().is_zero());
        let xy1 = pc("x=var X; y=var Y; m=mul x y; o=const 1; s=add m o; out s");
        assert!(!acit_randomized(&xy1, 20, &s).unwrap().is_zero());
        let mut bld = Builder::new();
        let g = bld.var_power("X", &(BigUint::from(1u32) << 64));
        let huge = bld.finish(g).unwrap();
        let v = acit_randomized(&huge, 20, &s).unwrap();
        assert!(!v.is_zero());
        assert_eq!(v.per_trial_bound, 1.0);
    }

    #[test]
    fn second_derivative_examples() {
        let x3 = pc("x=var X; a=mul x x; b=mul a x; out b");
        assert_eq!(poly(&second_derivative_circuit(&x3, "X").unwrap()), p("6*X"));
        let xy = pc("x=var X; y=var Y; m=mul x y; out m");
        assert!(poly(&second_derivative_circuit(&xy, "X").unwrap()).is_zero());
        let q = pc("o=const 1; x=var X; s=add o x; a=mul s s; b=mul a a; out b");
        let d = second_derivative_circuit(&q, "X").unwrap();
        assert_eq!(poly(&d), p("12*X^2 + 24*X + 12"));
        assert!(d.size() <= 6 * q.size() + 8);
    }

    #[test]
    fn checkml_examples() {
        let b = Budget::default();
        let e = Method::Exact;
        let x1x2 = pc("a=var X1; b=var X2; m=mul a b; out m");
        assert!(poly(&checkml_circuit(&x1x2).unwrap()).is_zero());
        assert!(check_multilinear(&x1x2, &e, &b).unwrap());
        let sq = pc("a=var X1; m=mul a a; out m");
        assert_eq!(poly(&checkml_circuit(&sq).unwrap()), p("2*Y1"));
        assert!(!check_multilinear(&sq, &e, &b).unwrap());
        assert!(!check_multilinear(&sq, &Method::randomized(5, 1), &b).unwrap());
        let diff = pc("a=var X1; m=mul a a; n=const -1; c=var X1; d=mul c c; e=mul n d; s=add m e; out s");
        assert!(check_multilinear(&diff, &e, &b).unwrap());
    }

    #[test]
    fn acit_to_checkml_examples() {
        let b = Budget::default();
        let zero = pc("a=const -1; o=const 1; z=add a o; out z");
        assert!(poly(&acit_to_checkml(&zero).unwrap()).is_multilinear());
        let one = pc("o=const 1; out o");
        assert_eq!(poly(&acit_to_checkml(&one).unwrap()), p("X0^2"));
        let y = pc("y=var Y; out y");
        let c = acit_to_checkml(&y).unwrap();
        assert!(!check_multilinear(&c, &Method::Exact, &b).unwrap());
        let x0 = pc("y=var X0; out y");
        assert_eq!(poly(&acit_to_checkml(&x0).unwrap()), p("X0*X0_^2"));
    }

    #[test]
    fn homogeneous_examples() {
        let sq = pc("o=const 1; x=var X; s=add o x; m=mul s s; out m");
        assert_eq!(poly(&homogeneous_component_circuit(&sq, 1).unwrap()), p("2*X"));
        assert!(poly(&homogeneous_component_circuit(&sq, 3).unwrap()).is_zero());
        let xy = pc("x=var X; y=var Y; s=add x y; m=mul s s; out m");
        assert_eq!(poly(&homogeneous_component_circuit(&xy, 2).unwrap()), poly(&xy));
    }

    #[test]
    fn mlzmc_examples() {
        let b = Budget::default();
        let x1x2 = pc("a=var X1; b=var X2; m=mul a b; out m");
        let sq = pc("a=var X1; m=mul a a; out m");
        let sum = pc("a=var X1; b=var X2; m=add a b; out m");
        for method in [Method::Exact, Method::randomized(8, 5)] {
            assert_eq!(
                mlzmc_decide(&x1x2, &mono("X1*X2"), &method, &b).unwrap(),
                MlZmcAnswer::CoefficientNonzero
            );
            assert_eq!(
                mlzmc_decide(&sq, &mono("X1"), &method, &b).unwrap(),
                MlZmcAnswer::NotMultilinear
            );
            assert_eq!(
                mlzmc_decide(&sum, &mono("X1*X2"), &method, &b).unwrap(),
                MlZmcAnswer::CoefficientZero
            );
        }
        assert_eq!(
            mlzmc_decide(&x1x2, &mono("X1^2"), &Method::Exact, &b).unwrap(),
            MlZmcAnswer::NotMultilinear
        );
        assert!(poly(&mlzmc_to_acit(&sum, &mono("X1*X2")).unwrap()).is_zero());
        assert!(!poly(&mlzmc_to_acit(&sq, &mono("X1")).unwrap()).is_zero());
        assert_eq!(poly(&mlzmc_to_acit(&x1x2, &mono("X1*X2")).unwrap()), p("1"));
        assert_eq!(poly(&mlzmc_to_acit(&x1x2, &mono("X1^2")).unwrap()), p("1"));
    }
}
