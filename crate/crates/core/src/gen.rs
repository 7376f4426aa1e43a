//! Seeded random instances for property checks and the self-test.

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::circuit::{Builder, Circuit, GateId};
use crate::poly::{Monomial, Var};
use crate::reductions::{ExactCoverInstance, Literal, SignMatrix, ThreeCnf};

/// Shape constraints for [`random_circuit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircuitShape {
    /// Upper bound on the gate count after pruning.
    pub max_gates: usize,
    pub vars: usize,
    /// Only the constant `+1`.
    pub monotone: bool,
    /// Children of every multiplication gate share no gate.
    pub mult_disjoint: bool,
    /// Children of every multiplication gate share no variable, so the
    /// result is multilinear.
    pub syntactic_ml: bool,
}

impl CircuitShape {
    pub fn new(max_gates: usize, vars: usize) -> Self {
        CircuitShape {
            max_gates,
            vars,
            monotone: false,
            mult_disjoint: false,
            syntactic_ml: false,
        }
    }

    pub fn monotone(mut self) -> Self {
        self.monotone = true;
        self
    }

    pub fn mult_disjoint(mut self) -> Self {
        self.mult_disjoint = true;
        self
    }

    pub fn syntactic_ml(mut self) -> Self {
        self.syntactic_ml = true;
        self
    }
}

pub fn var_name(i: usize) -> String {
    format!("X{}", i + 1)
}

/// A random circuit over `X1..Xvars`. Leaves come first, then binary gates
/// over earlier gates; the last gate is the output and unreachable gates are
/// pruned.
pub fn random_circuit<R: Rng>(rng: &mut R, shape: CircuitShape) -> Circuit {
    let total = shape.max_gates.max(1);
    let leaves = if total <= 2 {
        1
    } else {
        rng.gen_range(1..=total.div_ceil(2))
    };
    let mut b = Builder::new();
    // reachable gates and variables below each gate
    let mut below: Vec<FixedBitSet> = Vec::new();
    let mut vars_below: Vec<FixedBitSet> = Vec::new();
    let nv = shape.vars.max(1);
    for _ in 0..leaves {
        let mut vs = FixedBitSet::with_capacity(nv);
        let g = if shape.vars > 0 && rng.gen_bool(0.75) {
            let v = rng.gen_range(0..shape.vars);
            vs.insert(v);
            b.var(&var_name(v))
        } else if shape.monotone || rng.gen_bool(0.5) {
            b.one()
        } else {
            b.neg_one()
        };
        let mut set = FixedBitSet::with_capacity(total);
        set.insert(g);
        below.push(set);
        vars_below.push(vs);
    }
    // gates not yet used as a child; preferring them keeps most gates live
    let mut unused: Vec<GateId> = (0..leaves).collect();
    while b.len() < total {
        let n = b.len();
        let pick = |rng: &mut R, pool: &[GateId]| -> Option<GateId> {
            let fresh: Vec<GateId> = pool.iter().copied().filter(|g| unused.contains(g)).collect();
            if !fresh.is_empty() && rng.gen_bool(0.8) {
                fresh.choose(rng).copied()
            } else {
                pool.choose(rng).copied()
            }
        };
        let all: Vec<GateId> = (0..n).collect();
        let x = pick(rng, &all).expect("nonempty");
        let want_mul = rng.gen_bool(0.5);
        let mut chosen = None;
        if want_mul {
            let ok: Vec<GateId> = (0..n)
                .filter(|&y| {
                    (!shape.mult_disjoint || below[x].is_disjoint(&below[y]))
                        && (!shape.syntactic_ml || vars_below[x].is_disjoint(&vars_below[y]))
                })
                .collect();
            if let Some(y) = pick(rng, &ok) {
                chosen = Some((y, true));
            }
        }
        let (y, mul) = chosen.unwrap_or_else(|| (pick(rng, &all).expect("nonempty"), false));
        unused.retain(|&g| g != x && g != y);
        let g = if mul { b.mul(x, y) } else { b.add(x, y) };
        unused.push(g);
        let mut set = below[x].clone();
        set.union_with(&below[y]);
        set.grow(total);
        set.insert(g);
        let mut vs = vars_below[x].clone();
        vs.union_with(&vars_below[y]);
        below.push(set);
        vars_below.push(vs);
    }
    let out = b.len() - 1;
    b.finish(out).expect("generated circuit is valid")
}

/// A random monomial over `X1..Xvars` with exponents at most `max_exp`.
pub fn random_monomial<R: Rng>(rng: &mut R, vars: usize, max_exp: u32) -> Monomial {
    Monomial::from_pairs((0..vars).map(|i| (Var::new(&var_name(i)), rng.gen_range(0..=max_exp))))
}

pub fn random_sign_matrix<R: Rng>(rng: &mut R, n: usize) -> SignMatrix {
    let entries = (0..n * n).map(|_| rng.gen_range(-1..=1)).collect();
    SignMatrix::from_row_major(n, entries).expect("entries in range")
}

pub fn random_zero_one_matrix<R: Rng>(rng: &mut R, n: usize) -> SignMatrix {
    let entries = (0..n * n).map(|_| rng.gen_range(0..=1)).collect();
    SignMatrix::from_row_major(n, entries).expect("entries in range")
}

/// The 0/1 matrix whose row-major entries are the low `n²` bits of `bits`.
pub fn zero_one_matrix(n: usize, bits: u64) -> SignMatrix {
    let entries = (0..n * n).map(|k| (bits >> k & 1) as i8).collect();
    SignMatrix::from_row_major(n, entries).expect("entries in range")
}

/// Random CNF with clauses of 1 to 3 literals over distinct variables.
pub fn random_cnf<R: Rng>(rng: &mut R, nx: usize, ny: usize, clauses: usize) -> ThreeCnf {
    let pool: Vec<(bool, usize)> = (0..nx).map(|i| (true, i)).chain((0..ny).map(|i| (false, i))).collect();
    let cls = (0..clauses)
        .map(|_| {
            let len = rng.gen_range(1..=3.min(pool.len()));
            pool.choose_multiple(rng, len)
                .map(|&(is_x, i)| {
                    let pos = rng.gen_bool(0.5);
                    if is_x {
                        Literal::x(i, pos)
                    } else {
                        Literal::y(i, pos)
                    }
                })
                .collect()
        })
        .collect();
    ThreeCnf::new(nx, ny, cls).expect("literals in range")
}

/// Random 3-subsets of `{1..n}`; with `plant`, a random exact cover is mixed
/// in when `n` is a multiple of 3.
pub fn random_x3c<R: Rng>(rng: &mut R, n: usize, m: usize, plant: bool) -> ExactCoverInstance {
    let mut sets = Vec::new();
    if plant && n.is_multiple_of(3) && n / 3 <= m {
        let mut elems: Vec<usize> = (1..=n).collect();
        elems.shuffle(rng);
        for c in elems.chunks(3) {
            sets.push([c[0], c[1], c[2]]);
        }
    }
    let ground: Vec<usize> = (1..=n).collect();
    while sets.len() < m && n >= 3 {
        let pick: Vec<usize> = ground.choose_multiple(rng, 3).copied().collect();
        sets.push([pick[0], pick[1], pick[2]]);
    }
    sets.shuffle(rng);
    ExactCoverInstance::new(n, sets).expect("sets in range")
}
