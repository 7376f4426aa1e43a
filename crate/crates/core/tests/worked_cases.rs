//! Small fixed cases across modules, with reference values computed here by
//! brute force rather than taken from the library.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use slp_core::count::{
    count_ext_monomials, count_monomials_exact, countmon_decide, exist_ext_monomial, is_extending, ml_countmon_decide,
    monml, MlCountAnswer,
};
use slp_core::ident::{
    acit, acit_to_checkml, check_multilinear, homogeneous_component_circuit, mlzmc_decide, mlzmc_to_acit,
    second_derivative_circuit, MlZmcAnswer,
};
use slp_core::parse_tree::{enumerate_parse_trees, exists_type_for_monomial, signed_contribution_counts};
use slp_core::poly::{eval, expand, expand_mod, expand_truncated};
use slp_core::reductions::{
    ccne_c_prime, perm_to_mlcountmon, perm_to_zmc, x3c_to_zmc, z_cubes, ExactCoverInstance, Literal, SignMatrix,
    ThreeCnf,
};
use slp_core::zmc::{coeff_exact, coeff_mod_prime, zmc_monotone, zmc_randomized};
use slp_core::{parse_circuit, Budget, Error, Method, Monomial, Polynomial, PrimeSampler};

fn c(src: &str) -> slp_core::Circuit {
    parse_circuit(src).unwrap()
}

fn poly(s: &str) -> Polynomial {
    s.parse().unwrap()
}

fn mono(s: &str) -> Monomial {
    Monomial::parse(s).unwrap()
}

fn b() -> Budget {
    Budget::default()
}

fn naive_permanent(a: &SignMatrix) -> i64 {
    fn go(a: &SignMatrix, row: usize, used: &mut Vec<bool>) -> i64 {
        if row == a.n() {
            return 1;
        }
        let mut s = 0;
        for j in 0..a.n() {
            if !used[j] && a.get(row, j) != 0 {
                used[j] = true;
                s += a.get(row, j) as i64 * go(a, row + 1, used);
                used[j] = false;
            }
        }
        s
    }
    go(a, 0, &mut vec![false; a.n()])
}

fn naive_exact_cover(inst: &ExactCoverInstance) -> bool {
    (0u32..1 << inst.sets.len()).any(|mask| {
        let mut hit = vec![0; inst.n + 1];
        for (i, s) in inst.sets.iter().enumerate() {
            if mask >> i & 1 == 1 {
                for &e in s {
                    hit[e] += 1;
                }
            }
        }
        hit[1..].iter().all(|&h| h == 1)
    })
}

fn pow_mod(mut base: u64, mut e: u128, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * base as u128 % p as u128) as u64;
        }
        base = (base as u128 * base as u128 % p as u128) as u64;
        e >>= 1;
    }
    acc
}

fn squarings(k: usize, base: &str) -> String {
    let mut net = format!("{base}s0 = mul g g\n");
    for i in 1..k {
        net += &format!("s{i} = mul s{} s{}\n", i - 1, i - 1);
    }
    net + &format!("out s{}\n", k - 1)
}

const ONES: &str = "1 1\n1 1\n";

#[test]
fn gadget_coefficient_is_the_permanent() {
    let a: SignMatrix = ONES.parse().unwrap();
    let (q, m) = perm_to_zmc(&a, &BigInt::zero()).unwrap();
    assert_eq!(m, mono("Y1*Y2"));
    assert_eq!(coeff_exact(&q, &m, &b()).unwrap(), BigInt::from(naive_permanent(&a)));
    assert_eq!(expand(&q, &b()).unwrap().coefficient(&m), BigInt::from(2));
    assert_eq!(enumerate_parse_trees(&q, 100).unwrap().count(), 4);

    let (q2, _) = perm_to_zmc(&a, &BigInt::from(2)).unwrap();
    let (pos, neg) = signed_contribution_counts(&q2, &m, &b()).unwrap();
    assert_eq!(BigInt::from(pos) - BigInt::from(neg), BigInt::zero());
    let v = zmc_randomized(&q2, &m, 8, &PrimeSampler::new(11), &b()).unwrap();
    assert!(v.is_zero());
    let e = exist_ext_monomial(&q2, &m, &Method::randomized(20, 3), &b()).unwrap();
    assert!(!e.exists);
}

#[test]
fn modular_and_truncated_expansion() {
    let p5 = c("o = const 1\nx = var X\ns = add o x\nt = mul s s\nf = mul t t\nv = mul f s\nout v\n");
    assert_eq!(expand_mod(&p5, 5, &b()).unwrap(), poly("X^5 + 1").reduce_mod(5));
    assert_eq!(coeff_mod_prime(&p5, &mono("X"), 5, &b()).unwrap(), 0);
    assert_eq!(coeff_mod_prime(&p5, &mono("X"), 7, &b()).unwrap(), 5);
    assert!(matches!(
        coeff_mod_prime(&p5, &mono("X"), 9, &b()),
        Err(Error::NotPrime(9))
    ));

    let p4 = c("o = const 1\nx = var X\ns = add o x\nt = mul s s\nf = mul t t\nout f\n");
    assert_eq!(expand_truncated(&p4, &mono("X"), &b()).unwrap(), poly("4*X + 1"));
    assert_eq!(expand_truncated(&p4, &Monomial::one(), &b()).unwrap(), poly("1"));
}

#[test]
fn huge_degree_evaluation() {
    let net = squarings(64, "g = var X\n");
    let circ = c(&net);
    let x = slp_core::Var::new("X");
    let point = [(x, 3u64)].into_iter().collect();
    assert_eq!(eval(&circ, &point, 1009).unwrap(), pow_mod(3, 1u128 << 64, 1009));
    let v = acit(&circ, &Method::randomized(20, 5), &b()).unwrap();
    assert!(!v.is_zero());
    // 40 squarings of 1+X: stopped by work long before the degree cap
    let big = c(&squarings(40, "o = const 1\nx = var X\ng = add o x\n"));
    assert!(expand(&big, &b().with_work(1 << 22)).unwrap_err().is_budget());
    let mono_big = c(&squarings(40, "g = var X\n"));
    let e = expand(&mono_big, &b()).unwrap_err();
    assert!(e.to_string().contains("total degree"), "{e}");
}

#[test]
fn exact_cover_gadget_against_brute_force() {
    let yes: ExactCoverInstance = "3\n1 2 3\n".parse().unwrap();
    let (f, m) = x3c_to_zmc(&yes).unwrap();
    assert!(!zmc_monotone(&f, &m, &b()).unwrap().is_zero());
    assert!(zmc_monotone(&f, &mono("X1^2"), &b()).unwrap().is_zero());
    assert!(exists_type_for_monomial(&f, &m, &b()).unwrap().witness.is_some());

    let no: ExactCoverInstance = "6\n1 2 3\n1 2 4\n".parse().unwrap();
    assert!(!naive_exact_cover(&no));
    let (f, m) = x3c_to_zmc(&no).unwrap();
    assert!(zmc_monotone(&f, &m, &b()).unwrap().is_zero());
    let sq = c("o = const 1\nx = var X\ns = add o x\nt = mul s s\nout t\n");
    assert!(exists_type_for_monomial(&sq, &mono("X^3"), &b())
        .unwrap()
        .witness
        .is_none());
}

#[test]
fn derivatives_and_components() {
    let cube = c("x = var X\nq = mul x x\nr = mul q x\nout r\n");
    assert_eq!(
        expand(&second_derivative_circuit(&cube, "X").unwrap(), &b()).unwrap(),
        poly("6*X")
    );
    let xy = c("x = var X\ny = var Y\nm = mul x y\nout m\n");
    assert!(expand(&second_derivative_circuit(&xy, "X").unwrap(), &b())
        .unwrap()
        .is_zero());
    let p4 = c("o = const 1\nx = var X\ns = add o x\nt = mul s s\nf = mul t t\nout f\n");
    assert_eq!(
        expand(&second_derivative_circuit(&p4, "X").unwrap(), &b()).unwrap(),
        poly("12*X^2 + 24*X + 12")
    );
    let sq = c("o = const 1\nx = var X\ns = add o x\nt = mul s s\nout t\n");
    assert_eq!(
        expand(&homogeneous_component_circuit(&sq, 1).unwrap(), &b()).unwrap(),
        poly("2*X")
    );
    assert!(expand(&homogeneous_component_circuit(&sq, 3).unwrap(), &b())
        .unwrap()
        .is_zero());
}

#[test]
fn multilinearity_reductions() {
    let x1x2 = c("a = var X1\nb = var X2\nm = mul a b\nout m\n");
    let x1sq = c("a = var X1\nm = mul a a\nout m\n");
    let sum = c("a = var X1\nb = var X2\ns = add a b\nout s\n");
    let zero = c("a = var X1\nz = const 0\nm = mul a z\nout m\n");
    assert!(check_multilinear(&x1x2, &Method::Exact, &b()).unwrap());
    assert!(!check_multilinear(&x1sq, &Method::randomized(10, 1), &b()).unwrap());

    assert!(acit(&zero, &Method::Exact, &b()).unwrap().is_zero());
    assert!(check_multilinear(&acit_to_checkml(&zero).unwrap(), &Method::Exact, &b()).unwrap());
    assert!(!check_multilinear(&acit_to_checkml(&sum).unwrap(), &Method::Exact, &b()).unwrap());

    let m12 = mono("X1*X2");
    assert_eq!(
        mlzmc_decide(&x1x2, &m12, &Method::Exact, &b()).unwrap(),
        MlZmcAnswer::CoefficientNonzero
    );
    assert_eq!(
        mlzmc_decide(&x1sq, &mono("X1"), &Method::Exact, &b()).unwrap(),
        MlZmcAnswer::NotMultilinear
    );
    assert_eq!(
        mlzmc_decide(&sum, &m12, &Method::Exact, &b()).unwrap(),
        MlZmcAnswer::CoefficientZero
    );
    assert!(acit(&mlzmc_to_acit(&sum, &m12).unwrap(), &Method::Exact, &b())
        .unwrap()
        .is_zero());
    assert!(!acit(&mlzmc_to_acit(&x1sq, &mono("X1")).unwrap(), &Method::Exact, &b())
        .unwrap()
        .is_zero());
    assert!(!acit(&mlzmc_to_acit(&x1x2, &m12).unwrap(), &Method::Exact, &b())
        .unwrap()
        .is_zero());
}

#[test]
fn counting_and_extensions() {
    assert!(is_extending(&mono("X1*X2"), &mono("X1")));
    assert!(!is_extending(&mono("X1^2"), &mono("X1")));
    let cube = c("o = const 1\nx = var X\ns = add o x\nt = mul s s\nr = mul t s\nout r\n");
    assert_eq!(count_monomials_exact(&cube, &b()).unwrap(), 4);
    let zero = c("z = const 0\nout z\n");
    assert!(countmon_decide(&zero, &BigUint::zero(), &b()).unwrap());
    assert!(!countmon_decide(&zero, &BigUint::from(1u32), &b()).unwrap());

    // X1*X2 + X1 + X2^2
    let f = c("a = var X1\nb = var X2\nab = mul a b\nbb = mul b b\ns = add ab a\nt = add s bb\nout t\n");
    assert_eq!(count_ext_monomials(&f, &mono("X1"), &b()).unwrap(), 2);

    let g = c("a = var X1\nb = var X2\nab = mul a b\naa = mul a a\ns = add ab aa\nout s\n");
    for method in [Method::Exact, Method::randomized(20, 8)] {
        assert!(exist_ext_monomial(&g, &mono("X1*X2"), &method, &b()).unwrap().exists);
        assert!(monml(&g, &method, &b()).unwrap().exists);
        let sq = c("a = var X1\nm = mul a a\nout m\n");
        assert!(!exist_ext_monomial(&sq, &mono("X1"), &method, &b()).unwrap().exists);
        assert!(!monml(&sq, &method, &b()).unwrap().exists);
    }
}

#[test]
fn determinant_gadget_counts_the_permanent() {
    let a: SignMatrix = ONES.parse().unwrap();
    let d = perm_to_mlcountmon(&a).unwrap();
    let per = naive_permanent(&a) as u32;
    assert_eq!(count_monomials_exact(&d, &b()).unwrap(), per as usize);
    assert_eq!(
        ml_countmon_decide(&d, &BigUint::from(per), &Method::Exact, &b()).unwrap(),
        MlCountAnswer::AtLeast
    );
    let sq = c("a = var X1\nm = mul a a\nout m\n");
    assert_eq!(
        ml_countmon_decide(&sq, &BigUint::from(1u32), &Method::Exact, &b()).unwrap(),
        MlCountAnswer::NotMultilinear
    );
}

#[test]
fn clause_gadget_coefficients_count_models() {
    // (x1 ∨ y1) ∧ (¬y1): one block variable each, already normal
    let f = ThreeCnf::new(
        1,
        1,
        vec![
            vec![Literal::x(0, true), Literal::y(0, true)],
            vec![Literal::y(0, false)],
        ],
    )
    .unwrap();
    let cp = ccne_c_prime(&f).unwrap();
    let p = expand(&cp, &b()).unwrap();
    for alpha in [false, true] {
        let models = [false, true].iter().filter(|&&y| f.satisfied(&[alpha], &[y])).count();
        let mut m = z_cubes(f.clauses.len());
        if alpha {
            m = m.mul(&mono("X1"));
        }
        assert_eq!(p.coefficient(&m), BigInt::from(models), "alpha = {alpha}");
    }
}
