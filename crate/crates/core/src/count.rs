//! Counting monomials and extensions of a fixed monomial.

use num_bigint::{BigInt, BigUint};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Builder, Circuit};
use crate::error::{Error, Result};
use crate::ident::{check_multilinear, degree_bounds};
use crate::par;
use crate::poly::{expand, expand_with, ExpandOptions, Monomial, Var};
use crate::primes::PrimeSampler;
use crate::zmc::exceeds_degree_bound;
use crate::{Budget, Method, Mode};

/// `big` is `m · m'` with `m'` sharing no variable with `m`.
pub fn is_extending(big: &Monomial, m: &Monomial) -> bool {
    m.iter().all(|(v, e)| &big.exponent(v) == e)
}

pub fn count_monomials_exact(c: &Circuit, b: &Budget) -> Result<usize> {
    Ok(expand(c, b)?.count_monomials())
}

pub fn countmon_decide(c: &Circuit, d: &BigUint, b: &Budget) -> Result<bool> {
    Ok(BigUint::from(count_monomials_exact(c, b)?) >= *d)
}

pub fn count_ext_monomials(c: &Circuit, m: &Monomial, b: &Budget) -> Result<usize> {
    if exceeds_degree_bound(c, m) {
        return Ok(0);
    }
    Ok(expand(c, b)?.monomials().filter(|big| is_extending(big, m)).count())
}

pub fn countextmon_decide(c: &Circuit, d: &BigUint, m: &Monomial, b: &Budget) -> Result<bool> {
    Ok(BigUint::from(count_ext_monomials(c, m, b)?) >= *d)
}

/// Outcome of an existence test, with what a randomized run spent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExistsVerdict {
    pub exists: bool,
    pub mode: Mode,
    pub trials: u64,
    pub prime_bits: u32,
    pub points: u64,
}

impl ExistsVerdict {
    fn exact(exists: bool) -> Self {
        ExistsVerdict {
            exists,
            mode: Mode::Exact,
            trials: 0,
            prime_bits: 0,
            points: 0,
        }
    }
}

/// Coefficient of `m · Π X_i^{d_i}` in `c · Π (1 + y_i X_i)^{d_i}` modulo `p`.
/// As a polynomial in the `y_i` it is nonzero iff `c` has a monomial equal to
/// `m` on `m`'s variables with exponent at most `d_i` in each `X_i`.
pub fn extension_residue(
    c: &Circuit,
    m: &Monomial,
    shifts: &[(String, BigUint, u64)],
    p: u64,
    b: &Budget,
) -> Result<u64> {
    let mut bld = if c.is_unbounded_fanin() {
        Builder::unbounded()
    } else {
        Builder::new()
    };
    let mut factors = vec![bld.embed(c)];
    let mut cap = m.clone();
    for (x, d, y) in shifts {
        let one = bld.one();
        let yg = bld.scalar(&BigInt::from(*y));
        let xv = bld.var(x);
        let t = bld.mul(yg, xv);
        let s = bld.add(one, t);
        factors.push(bld.power(s, d));
        cap = cap.mul(&Monomial::from_pairs([(Var::new(x), d.clone())]));
    }
    let out = bld.product(factors);
    let circuit = bld.finish(out)?;
    let opts = ExpandOptions {
        modulus: Some(p),
        cap: Some(cap.clone()),
        budget: b.clone(),
    };
    let (poly, _) = expand_with(&circuit, &opts)?;
    Ok(poly.coefficient(&cap).try_into().expect("residue below p"))
}

fn randomized_shift_test(
    c: &Circuit,
    m: &Monomial,
    bounds: &[(String, BigUint)],
    trials: u64,
    sampler: &PrimeSampler,
    b: &Budget,
) -> Result<ExistsVerdict> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is needed".into()));
    }
    let results = par::map_range(trials, |t| {
        let mut rng = sampler.rng(t);
        let p = sampler.field_prime(c.size(), &mut rng);
        let shifts: Vec<(String, BigUint, u64)> = bounds
            .iter()
            .map(|(x, d)| (x.clone(), d.clone(), rng.gen_range(0..p)))
            .collect();
        extension_residue(c, m, &shifts, p, b)
    });
    let mut exists = false;
    for r in results {
        exists |= r? != 0;
    }
    Ok(ExistsVerdict {
        exists,
        mode: Mode::Randomized,
        trials,
        prime_bits: sampler.field_bits(c.size()),
        points: trials,
    })
}

/// Does `c` have an `m`-extending monomial? The randomized test shifts every
/// variable outside `m` by `(1 + y X)^d` with `d` its syntactic degree bound.
pub fn exist_ext_monomial(c: &Circuit, m: &Monomial, method: &Method, b: &Budget) -> Result<ExistsVerdict> {
    match method {
        Method::Exact => Ok(ExistsVerdict::exact(count_ext_monomials(c, m, b)? > 0)),
        Method::Randomized { trials, sampler } => {
            if exceeds_degree_bound(c, m) {
                let mut v = ExistsVerdict::exact(false);
                v.mode = Mode::Randomized;
                return Ok(v);
            }
            let bounds: Vec<(String, BigUint)> = degree_bounds(c)
                .into_iter()
                .filter(|(x, _)| m.exponent_of(x) == BigUint::default())
                .collect();
            randomized_shift_test(c, m, &bounds, *trials, sampler, b)
        }
    }
}

/// Does `c` have a multilinear monomial? Randomized: the coefficient of
/// `Π X_i` in `c · Π (1 + X_i Y_i)` at random `Y`.
pub fn monml(c: &Circuit, method: &Method, b: &Budget) -> Result<ExistsVerdict> {
    match method {
        Method::Exact => Ok(ExistsVerdict::exact(
            expand(c, b)?.monomials().any(|m| m.is_multilinear()),
        )),
        Method::Randomized { trials, sampler } => {
            let bounds: Vec<(String, BigUint)> = c.var_names().into_iter().map(|x| (x, BigUint::from(1u32))).collect();
            randomized_shift_test(c, &Monomial::one(), &bounds, *trials, sampler, b)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MlCountAnswer {
    NotMultilinear,
    #[serde(rename = "true")]
    AtLeast,
    #[serde(rename = "false")]
    Fewer,
}

/// Multilinear and at least `d` monomials. Multilinearity is checked with
/// `method`; the count itself is exact.
pub fn ml_countmon_decide(c: &Circuit, d: &BigUint, method: &Method, b: &Budget) -> Result<MlCountAnswer> {
    if !check_multilinear(c, method, b)? {
        return Ok(MlCountAnswer::NotMultilinear);
    }
    Ok(if countmon_decide(c, d, b)? {
        MlCountAnswer::AtLeast
    } else {
        MlCountAnswer::Fewer
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    fn mono(s: &str) -> Monomial {
        Monomial::parse(s).unwrap()
    }

    fn pc(s: &str) -> Circuit {
        parse_circuit(s).unwrap()
    }

    #[test]
    fn extending_examples() {
        assert!(is_extending(&mono("X1*X2"), &mono("X1")));
        assert!(!is_extending(&mono("X1^2"), &mono("X1")));
        assert!(is_extending(&mono("X1^3*X2"), &mono("X1^3*X2")));
        assert!(is_extending(&mono("X5"), &Monomial::one()));
    }

    #[test]
    fn counting_examples() {
        let b = Budget::default();
        let cube = pc("o=const 1; x=var X; s=add o x; a=mul s s; c=mul a s; out c");
        assert_eq!(count_monomials_exact(&cube, &b).unwrap(), 4);
        let zero = pc("a=const -1; o=const 1; z=add a o; out z");
        assert!(countmon_decide(&zero, &0u32.into(), &b).unwrap());
        assert!(!countmon_decide(&zero, &1u32.into(), &b).unwrap());

        let c = pc("a=var X1; b=var X2; m=mul a b; c=var X1; s=add m c; d=var X2; e=mul d d; t=add s e; out t");
        assert_eq!(count_ext_monomials(&c, &mono("X1"), &b).unwrap(), 2);
        assert_eq!(count_ext_monomials(&c, &Monomial::one(), &b).unwrap(), 3);
        assert!(countextmon_decide(&c, &2u32.into(), &mono("X1"), &b).unwrap());
        assert!(!countextmon_decide(&c, &3u32.into(), &mono("X1"), &b).unwrap());
    }

    #[test]
    fn existence_examples() {
        let b = Budget::default();
        let c = pc("a=var X1; b=var X2; m=mul a b; c=var X1; d=mul c c; s=add m d; out s");
        let sq = pc("a=var X1; m=mul a a; out m");
        for method in [Method::Exact, Method::randomized(6, 9)] {
            assert!(exist_ext_monomial(&c, &mono("X1*X2"), &method, &b).unwrap().exists);
            assert!(!exist_ext_monomial(&sq, &mono("X1"), &method, &b).unwrap().exists);
            assert!(exist_ext_monomial(&c, &mono("X1"), &method, &b).unwrap().exists);
            assert!(!exist_ext_monomial(&c, &mono("X3"), &method, &b).unwrap().exists);
        }
    }

    #[test]
    fn monml_examples() {
        let b = Budget::default();
        let c = pc("a=var X1; b=var X2; m=mul a b; c=var X1; d=mul c c; s=add m d; out s");
        let sq = pc("a=var X1; m=mul a a; out m");
        let s2 = pc("a=var X1; b=var X2; s=add a b; m=mul s s; out m");
        for method in [Method::Exact, Method::randomized(6, 2)] {
            assert!(monml(&c, &method, &b).unwrap().exists);
            assert!(!monml(&sq, &method, &b).unwrap().exists);
            assert!(monml(&s2, &method, &b).unwrap().exists);
        }
    }

    #[test]
    fn ml_countmon_examples() {
        let b = Budget::default();
        let e = Method::Exact;
        let sq = pc("a=var X1; m=mul a a; out m");
        assert_eq!(
            ml_countmon_decide(&sq, &1u32.into(), &e, &b).unwrap(),
            MlCountAnswer::NotMultilinear
        );
        let xy = pc("a=var X1; b=var X2; m=mul a b; out m");
        assert_eq!(
            ml_countmon_decide(&xy, &2u32.into(), &e, &b).unwrap(),
            MlCountAnswer::Fewer
        );
        assert_eq!(
            ml_countmon_decide(&xy, &1u32.into(), &e, &b).unwrap(),
            MlCountAnswer::AtLeast
        );
        assert_eq!(serde_json::to_string(&MlCountAnswer::AtLeast).unwrap(), "\"true\"");
    }
}
