//! Oracle-equivalence suite. Each criterion runs a decision procedure or a
//! gadget on seeded random instances and compares it with brute-force ground
//! truth; any disagreement is a mismatch.

use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{analyze, Builder, Circuit};
use crate::count::{count_ext_monomials, count_monomials_exact, countmon_decide, exist_ext_monomial, monml};
use crate::error::Result;
use crate::gen::{
    random_circuit, random_cnf, random_monomial, random_sign_matrix, random_x3c, random_zero_one_matrix, var_name,
    zero_one_matrix, CircuitShape,
};
use crate::ident::{
    acit_exact, check_multilinear, mlzmc_decide, mlzmc_to_acit, second_derivative_circuit, MlZmcAnswer,
};
use crate::parse_tree::{parse_tree_sum, type_census, type_census_sum};
use crate::poly::{expand, Monomial, Var};
use crate::primes::{trial_rng, PrimeSampler};
use crate::reductions::{
    ccne3sat_to_countextmon, ccne_c_prime, cexists3sat_to_countmon, countextmon_to_countmon, determinant_circuit,
    has_exact_cover, leibniz_determinant, model_table, non_extending_count, perm_to_mlcountmon, perm_to_zmc, permanent,
    x3c_to_zmc, z_cubes, SignMatrix, ThreeCnf,
};
use crate::zmc::{coeff_exact, exceeds_degree_bound, zmc_monotone, zmc_randomized, zmc_trial};
use crate::{Budget, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    /// Roughly a tenth of the cases, no time limits.
    Small,
    /// Full case counts and time limits.
    Full,
}

impl Level {
    fn scale(self, full: u64) -> u64 {
        match self {
            Level::Full => full,
            Level::Small => (full / 10).max(1),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub cases: u64,
    pub mismatches: u64,
    pub elapsed_ms: u64,
    pub limit_ms: Option<u64>,
    pub notes: Vec<String>,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        let limit = match self.limit_ms {
            Some(l) => format!(" (limit {l} ms)"),
            None => String::new(),
        };
        format!(
            "{} criterion {:>2}: {:<44} cases={} mismatches={} time={} ms{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.cases,
            self.mismatches,
            self.elapsed_ms,
            limit
        )
    }
}

#[derive(Default)]
struct Tally {
    cases: u64,
    mismatches: u64,
    notes: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.mismatches += 1;
            if self.notes.len() < 8 {
                self.notes.push(what());
            }
        }
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }
}

pub const CRITERIA: [(u8, &str, Option<u64>); 10] = [
    (1, "parse-tree partition identity", Some(5_000)),
    (2, "type partition identity", Some(30_000)),
    (3, "permanent gadget vs Ryser", Some(60_000)),
    (4, "randomized ZMC one-sidedness and error rate", None),
    (5, "exact cover gadget vs backtracking", Some(60_000)),
    (6, "CNF counting chain to CountMon", Some(120_000)),
    (7, "CNF existential chain to monotone CountMon", None),
    (8, "multilinearity suite", Some(60_000)),
    (9, "determinant gadget vs permanent", Some(120_000)),
    (10, "randomized extension tests one-sidedness", None),
];

fn rng_for(seed: u64, id: u8, i: u64) -> ChaCha8Rng {
    trial_rng(seed ^ (id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15), i)
}

pub fn run_criterion(id: u8, level: Level, seed: u64) -> CriterionReport {
    let (_, name, limit) = CRITERIA
        .iter()
        .copied()
        .find(|c| c.0 == id)
        .unwrap_or((id, "unknown criterion", None));
    let mut t = Tally::default();
    let start = Instant::now();
    let outcome = match id {
        1 => partition_identity(&mut t, level, seed),
        2 => type_identity(&mut t, level, seed),
        3 => permanent_gadget(&mut t, level, seed),
        4 => zmc_one_sided(&mut t, level, seed),
        5 => exact_cover_gadget(&mut t, level, seed),
        6 => counting_chain(&mut t, level, seed),
        7 => existential_chain(&mut t, level, seed),
        8 => multilinearity_suite(&mut t, level, seed),
        9 => determinant_gadget(&mut t, level, seed),
        10 => extension_one_sided(&mut t, level, seed),
        _ => {
            t.check(false, || format!("no criterion {id}"));
            Ok(())
        }
    };
    if let Err(e) = outcome {
        t.check(false, || format!("aborted: {e}"));
    }
    let elapsed_ms = start.elapsed().as_millis() as u64;
    let limit_ms = if level == Level::Full { limit } else { None };
    let in_time = limit_ms.is_none_or(|l| elapsed_ms <= l);
    if !in_time {
        t.note(format!("over the time limit: {elapsed_ms} ms"));
    }
    CriterionReport {
        id,
        name,
        passed: t.mismatches == 0 && t.cases > 0 && in_time,
        cases: t.cases,
        mismatches: t.mismatches,
        elapsed_ms,
        limit_ms,
        notes: t.notes,
    }
}

pub fn run_all(level: Level, seed: u64) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|c| run_criterion(c.0, level, seed)).collect()
}

fn partition_identity(t: &mut Tally, level: Level, seed: u64) -> Result<()> {
    let b = Budget::default();
    let mut gates = 0;
    let cases = level.scale(200);
    for i in 0..cases {
        let mut rng = rng_for(seed, 1, i);
        let c = random_circuit(&mut rng, CircuitShape::new(12, 3).mult_disjoint());
        gates += c.size();
        let expected = expand(&c, &b)?;
        let got = parse_tree_sum(&c, 1 << 20)?;
        t.check(got == expected, || {
            format!("case {i}: tree sum {got} != {expected}\n{c}")
        });
    }
    t.note(format!("mean circuit size {:.1}", gates as f64 / cases as f64));
    Ok(())
}

fn type_identity(t: &mut Tally, level: Level, seed: u64) -> Result<()> {
    let b = Budget::default();
    let (mut gates, mut types) = (0, 0);
    let cases = level.scale(50);
    for i in 0..cases {
        let mut rng = rng_for(seed, 2, i);
        let c = random_circuit(&mut rng, CircuitShape::new(8, 3));
        gates += c.size();
        let expected = expand(&c, &b)?;
        let census = type_census(&c, &b)?;
        types += census.len();
        let got = type_census_sum(&c, &census)?;
        t.check(got == expected, || {
            format!("case {i}: census sum {got} != {expected}\n{c}")
        });
    }
    t.note(format!(
        "mean circuit size {:.1}, mean number of types {:.1}",
        gates as f64 / cases as f64,
        types as f64 / cases as f64
    ));
    Ok(())
}

fn all_sign_matrices(n: usize) -> Vec<SignMatrix> {
    let k = n * n;
    (0..3u32.pow(k as u32))
        .map(|mut code| {
            let entries = (0..k)
                .map(|_| {
                    let e = (code % 3) as i8 - 1;
                    code /= 3;
                    e
                })
                .collect();
            SignMatrix::from_row_major(n, entries).expect("entries in range")
        })
        .collect()
}

fn permanent_gadget(t: &mut Tally, level: Level, seed: u64) -> Result<()> {
    let b = Budget::default();
    let mut rng = rng_for(seed, 3, 0);
    let mut mats = all_sign_matrices(2);
    let extra = level.scale(100);
    for n in [3, 4] {
        mats.extend((0..extra).map(|_| random_sign_matrix(&mut rng, n)));
    }
    for (k, a) in mats.iter().enumerate() {
        let per = permanent(a)?;
        for d in -2i64..=4 {
            let (c, m) = perm_to_zmc(a, &BigInt::from(d))?;
            let coeff = coeff_exact(&c, &m, &b)?;
            t.check(coeff == BigInt::from(per - d as i128), || {
                format!("per = {per}, d = {d}: exact coefficient {coeff}\n{a}")
            });
            let sampler = PrimeSampler::new(seed ^ ((k as u64) << 8 | (d + 2) as u64));
            let trials = sampler.trials_for_confidence(c.size(), 1e-9);
            let v = zmc_randomized(&c, &m, trials, &sampler, &b)?;
            t.check(v.is_zero() == (per == d as i128), || {
                format!("per = {per}, d = {d}: randomized verdict {:?}\n{a}", v.answer)
            });
        }
    }
    Ok(())
}

fn zmc_one_sided(t: &mut Tally, level: Level, seed: u64) -> Result<()> {
    let b = Budget::default();
    let mut rng = rng_for(seed, 4, 0);
    let mut zero: Vec<(Circuit, Monomial)> = Vec::new();
    for n in 1..=3 {
        for _ in 0..6 {
            let a = random_sign_matrix(&mut rng, n);
            let per = permanent(&a)?;
            zero.push(perm_to_zmc(&a, &BigInt::from(per))?);
        }
    }
    {
        let mut bld = Builder::new();
        let x = bld.var("X");
        let n = bld.neg_one();
        let y = bld.var("X");
        let ny = bld.mul(n, y);
        let s = bld.add(x, ny);
        zero.push((bld.finish(s)?, Monomial::parse("X")?));
    }
    for s in 0..level.scale(10_000) {
        let (c, m) = &zero[s as usize % zero.len()];
        let v = zmc_randomized(c, m, 1, &PrimeSampler::new(seed.wrapping_add(s)), &b)?;
        t.check(v.is_zero(), || format!("false nonzero on zero gadget, run {s}\n{c}"));
    }

    let per_instance = level.scale(4_000);
    for size in 1..=6usize {
        for rep in 0..2u64 {
            let mut irng = rng_for(seed, 4, 1 + size as u64 * 2 + rep);
            let mut attempts = 0;
            let (c, m) = loop {
                attempts += 1;
                let c = random_circuit(&mut irng, CircuitShape::new(size, 2));
                if c.size() != size && attempts < 1000 {
                    continue;
                }
                let p = expand(&c, &b)?;
                let terms: Vec<&Monomial> = p.monomials().collect();
                if let Some(m) = terms.choose(&mut irng) {
                    break (c.clone(), (*m).clone());
                }
            };
            let sampler = PrimeSampler::new(seed ^ (size as u64) << 4 ^ rep);
            let mut accepts = 0u64;
            for trial in 0..per_instance {
                let r = zmc_trial(&c, &m, &sampler, trial, &b)?;
                if r.residue.unwrap_or(0) == 0 {
                    accepts += 1;
                }
            }
            let n = c.size() as f64;
            let q = 1.0 - 1.0 / (sampler.c_const as f64 * n);
            let sigma = (q * (1.0 - q) / per_instance as f64).sqrt();
            let rate = accepts as f64 / per_instance as f64;
            t.check(rate <= q + 3.0 * sigma, || {
                format!("size {}: false-accept rate {rate:.4} above {q:.4} + 3σ", c.size())
            });
            if rep == 0 {
                t.note(format!(
                    "size {}: false-accept rate {rate:.3}, bound {q:.3} + 3σ ({:.3})",
                    c.size(),
                    3.0 * sigma
                ));
            }
        }
    }
    Ok(())
}

fn exact_cover_gadget(t: &mut Tally, level: Level, seed: u64) -> Result<()> {
    let b = Budget::default();
    for i in 0..level.scale(200) {
        let mut rng = rng_for(seed, 5, i);
        let n = rng.gen_range(1..=9);
        let m = rng.gen_range(0..=8);
        let plant = rng.gen_bool(0.5);
        let inst = random_x3c(&mut rng, n, m, plant);
        let (c, mono) = x3c_to_zmc(&inst)?;
        let v = zmc_monotone(&c, &mono, &b)?;
        let truth = has_exact_cover(&inst);
        t.check(v.is_zero() != truth, || {
            format!("cover {truth}, verdict {:?}\n{inst}", v.answer)
        });
    }
    Ok(())
}

fn random_small_cnf(rng: &mut ChaCha8Rng) -> ThreeCnf {
    let nx = rng.gen_range(1..=2);
    let ny = rng.gen_range(1..=2);
    let c = rng.gen_range(0..=3);
    random_cnf(rng, nx, ny, c)
}

fn x_alpha(alpha: u64, n: usize) -> Monomial {
    Monomial::from_pairs((0..n).map(|i| (Var::new(&var_name(i)), (alpha >> i & 1) as u32)))
}

fn counting_chain(t: &mut Tally, level: Level, seed: u64) -> Result<()> {
    let b = Budget::default();
    for i in 0..level.scale(50) {
        let mut rng = rng_for(seed, 6, i);
        let f = random_small_cnf(&mut rng);
        let nf = f.normalize()?;
        let g = &nf.cnf;
        let (n, c) = (g.nx, g.clauses.len());
        let table = model_table(g)?;
        let orig = model_table(&f)?;

        let cp = expand(&ccne_c_prime(g)?, &b)?;
        for (alpha, &models) in table.iter().enumerate() {
            let m = x_alpha(alpha as u64, n).mul(&z_cubes(c));
            let got = cp.coefficient(&m);
            t.check(got == BigInt::from(models), || {
                format!("case {i}: coefficient of {m} in C' is {got}, models {models}\n{g}")
            });
        }

        for ell in 0..=4u64 {
            let ell_n = BigUint::from(ell) << nf.y_pad;
            let inst = ccne3sat_to_countextmon(g, &BigUint::from(1u32), &ell_n)?;
            let ext = count_ext_monomials(&inst.circuit, &inst.base, &b)?;
            let expected = orig.iter().filter(|&&x| x != ell).count() << nf.x_pad;
            t.check(ext == expected, || {
                format!("case {i}, ell {ell}: {ext} extending monomials, oracle {expected}\n{f}")
            });
            let (cs, threshold) = countextmon_to_countmon(&inst, &ell_n, n, c)?;
            let stats = analyze(&cs);
            t.check(stats.is_formula && stats.depth <= 4, || {
                format!("case {i}: C* depth {} formula {}", stats.depth, stats.is_formula)
            });
            let total = count_monomials_exact(&cs, &b)?;
            t.check(BigUint::from(total) == non_extending_count(n, c) + ext, || {
                format!("case {i}, ell {ell}: C* has {total} monomials, extending {ext}")
            });
            let decided = countmon_decide(&cs, &threshold, &b)?;
            t.check(decided == (ext >= 1), || {
                format!("case {i}, ell {ell}: threshold verdict")
            });
        }
    }
    Ok(())
}

fn existential_chain(t: &mut Tally, level: Level, seed: u64) -> Result<()> {
    let b = Budget::default();
    for i in 0..level.scale(50) {
        let mut rng = rng_for(seed, 7, i);
        let f = random_small_cnf(&mut rng);
        let nf = f.normalize()?;
        let sat = model_table(&f)?.iter().filter(|&&x| x > 0).count() as u64;
        for k in 0..=(1u64 << f.nx) + 1 {
            let kn = BigUint::from(k) << nf.x_pad;
            let (cs, threshold) = cexists3sat_to_countmon(&nf.cnf, &kn)?;
            if k == 0 {
                let stats = analyze(&cs);
                t.check(stats.is_monotone && stats.is_formula, || {
                    format!("case {i}: not a monotone formula")
                });
            }
            let decided = countmon_decide(&cs, &threshold, &b)?;
            t.check(decided == (sat >= k), || {
                format!("case {i}, k {k}: verdict {decided}, satisfiable assignments {sat}\n{f}")
            });
        }
    }
    Ok(())
}

fn negated_copy(c: &Circuit) -> Result<Circuit> {
    let mut b = Builder::new();
    let x = b.embed(c);
    let y = b.embed(c);
    let n = b.neg_one();
    let ny = b.mul(n, y);
    let s = b.add(x, ny);
    b.finish(s)
}

fn mixed_circuit(rng: &mut ChaCha8Rng, k: u64) -> Result<Circuit> {
    let base = CircuitShape::new(rng.gen_range(3..=10), 3);
    Ok(match k % 4 {
        0 => random_circuit(rng, base),
        1 => random_circuit(rng, base.syntactic_ml()),
        2 => random_circuit(rng, base.monotone()),
        _ => negated_copy(&random_circuit(rng, CircuitShape::new(6, 3)))?,
    })
}

fn multilinearity_suite(t: &mut Tally, level: Level, seed: u64) -> Result<()> {
    let b = Budget::default();
    for i in 0..level.scale(500) {
        let mut rng = rng_for(seed, 8, i);
        let c = mixed_circuit(&mut rng, i)?;
        let p = expand(&c, &b)?;
        let truth = p.is_multilinear();
        let exact = check_multilinear(&c, &Method::Exact, &b)?;
        let rnd = check_multilinear(&c, &Method::randomized(20, seed ^ i), &b)?;
        t.check(exact == truth && rnd == truth, || {
            format!("case {i}: multilinear {truth}, exact {exact}, randomized {rnd}\n{c}")
        });
        for v in c.vars() {
            let d = expand(&second_derivative_circuit(&c, v.as_str())?, &b)?;
            let sym = p.derivative(v).derivative(v);
            t.check(d == sym, || format!("case {i}: second derivative in {v}: {d} != {sym}"));
        }
    }
    for i in 0..level.scale(200) {
        let mut rng = rng_for(seed, 8, 1_000_000 + i);
        let c = mixed_circuit(&mut rng, i)?;
        let p = expand(&c, &b)?;
        let terms: Vec<&Monomial> = p.monomials().collect();
        let m = match (i % 3, terms.choose(&mut rng)) {
            (0, Some(m)) => (*m).clone(),
            (1, _) => random_monomial(&mut rng, 3, 1),
            _ => random_monomial(&mut rng, 3, 2),
        };
        let truth = if !m.is_multilinear() || !p.is_multilinear() {
            MlZmcAnswer::NotMultilinear
        } else if p.coefficient(&m) == BigInt::from(0) {
            MlZmcAnswer::CoefficientZero
        } else {
            MlZmcAnswer::CoefficientNonzero
        };
        let decided = mlzmc_decide(&c, &m, &Method::Exact, &b)?;
        let rnd = mlzmc_decide(&c, &m, &Method::randomized(8, seed ^ i), &b)?;
        let reduced = acit_exact(&mlzmc_to_acit(&c, &m)?, &b)?.is_zero();
        t.check(decided == truth && rnd == truth, || {
            format!("pair {i}, m = {m}: oracle {truth:?}, exact {decided:?}, randomized {rnd:?}\n{c}")
        });
        t.check(reduced == (decided == MlZmcAnswer::CoefficientZero), || {
            format!("pair {i}, m = {m}: reduced circuit zero {reduced}, decision {decided:?}\n{c}")
        });
    }
    Ok(())
}

fn determinant_gadget(t: &mut Tally, level: Level, seed: u64) -> Result<()> {
    let b = Budget::default();
    for n in 1..=5 {
        let d = expand(&determinant_circuit(n)?, &b)?;
        let oracle = leibniz_determinant(n)?;
        t.check(d == oracle, || {
            format!("determinant circuit differs from the permutation expansion at n = {n}")
        });
    }
    let mut mats: Vec<SignMatrix> = Vec::new();
    let mut rng = rng_for(seed, 9, 0);
    for n in 1..=4usize {
        let all = 1u64 << (n * n);
        if level == Level::Full || all <= 512 {
            mats.extend((0..all).map(|bits| zero_one_matrix(n, bits)));
        } else {
            mats.extend((0..level.scale(all)).map(|_| zero_one_matrix(n, rng.gen_range(0..all))));
        }
    }
    mats.extend((0..level.scale(100)).map(|_| random_zero_one_matrix(&mut rng, 5)));
    let checks = crate::par::map_slice(&mats, |a| -> Result<(bool, String)> {
        let p = expand(&perm_to_mlcountmon(a)?, &b)?;
        let per = permanent(a)?;
        let ok = p.count_monomials() as i128 == per && p.is_multilinear();
        Ok((ok, format!("per = {per}, monomials = {}\n{a}", p.count_monomials())))
    });
    for r in checks {
        let (ok, msg) = r?;
        t.check(ok, || msg);
    }
    for (k, a) in mats.iter().filter(|a| a.n() == 5).take(5).enumerate() {
        let ml = check_multilinear(&perm_to_mlcountmon(a)?, &Method::randomized(4, seed ^ k as u64), &b)?;
        t.check(ml, || format!("5x5 gadget failed the multilinearity check\n{a}"));
    }
    Ok(())
}

fn extension_one_sided(t: &mut Tally, level: Level, seed: u64) -> Result<()> {
    let b = Budget::default();
    let mut rng = rng_for(seed, 10, 0);
    let mut ext_neg: Vec<(Circuit, Monomial)> = Vec::new();
    let mut ext_pos: Vec<(Circuit, Monomial)> = Vec::new();
    let mut ml_neg: Vec<Circuit> = Vec::new();
    let mut ml_pos: Vec<Circuit> = Vec::new();
    let mut guard = 0;
    while (ext_neg.len() < 20 || ext_pos.len() < 20 || ml_neg.len() < 10 || ml_pos.len() < 10) && guard < 20_000 {
        guard += 1;
        let vars = rng.gen_range(1..=6);
        let gates = rng.gen_range(2..=12);
        let c = random_circuit(&mut rng, CircuitShape::new(gates, vars));
        let m = random_monomial(&mut rng, vars.min(3), 2);
        if !exceeds_degree_bound(&c, &m) {
            let list = if count_ext_monomials(&c, &m, &b)? == 0 {
                &mut ext_neg
            } else {
                &mut ext_pos
            };
            if list.len() < 20 {
                list.push((c.clone(), m));
            }
        }
        let has_ml = expand(&c, &b)?.monomials().any(|m| m.is_multilinear());
        let list = if has_ml { &mut ml_pos } else { &mut ml_neg };
        if list.len() < 10 {
            list.push(c);
        }
    }
    t.note(format!(
        "pools: {} / {} extension negatives / positives, {} / {} multilinear negatives / positives",
        ext_neg.len(),
        ext_pos.len(),
        ml_neg.len(),
        ml_pos.len()
    ));
    let runs = level.scale(10_000);
    for s in 0..runs {
        let method = Method::randomized(1, seed.wrapping_add(s));
        let claimed = if s % 2 == 0 && !ext_neg.is_empty() {
            let (c, m) = &ext_neg[(s / 2) as usize % ext_neg.len()];
            exist_ext_monomial(c, m, &method, &b)?.exists
        } else {
            monml(&ml_neg[(s / 2) as usize % ml_neg.len()], &method, &b)?.exists
        };
        t.check(!claimed, || {
            format!("run {s}: existence claimed on a negative instance")
        });
    }
    let pos_runs = level.scale(200);
    let mut detected = 0u64;
    for s in 0..pos_runs {
        let method = Method::randomized(20, seed ^ (s << 20));
        let found = if s % 2 == 0 {
            let (c, m) = &ext_pos[(s / 2) as usize % ext_pos.len()];
            exist_ext_monomial(c, m, &method, &b)?.exists
        } else {
            monml(&ml_pos[(s / 2) as usize % ml_pos.len()], &method, &b)?.exists
        };
        detected += found as u64;
    }
    let rate = detected as f64 / pos_runs as f64;
    t.check(rate >= 0.99, || format!("detection rate {rate:.4} below 0.99"));
    t.note(format!("detection rate {rate:.4} over {pos_runs} positive runs"));
    Ok(())
}
