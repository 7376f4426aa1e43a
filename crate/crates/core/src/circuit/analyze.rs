use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{Circuit, Gate};
use crate::serde_big;

/// Bottom-up degree bound: var = 1, const = 0, add = max, mul = sum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyntacticDegree {
    #[serde(with = "serde_big::uint")]
    pub total: BigUint,
    #[serde(with = "serde_big::uint_map")]
    pub per_variable: BTreeMap<String, BigUint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CircuitStats {
    pub size: usize,
    pub edge_count: usize,
    pub depth: usize,
    pub is_formula: bool,
    pub is_monotone: bool,
    pub is_mult_disjoint: bool,
    pub unbounded_fanin: bool,
    pub syntactic_degree: SyntacticDegree,
}

pub fn analyze(c: &Circuit) -> CircuitStats {
    let n = c.size();
    let mut depth = vec![0usize; n];
    let mut fanout = vec![0usize; n];
    for (i, g) in c.gates().iter().enumerate() {
        for &ch in g.children() {
            depth[i] = depth[i].max(depth[ch] + 1);
            fanout[ch] += 1;
        }
    }
    let is_formula = fanout.iter().all(|&f| f <= 1);
    let (totals, per_var) = syntactic_degrees(c);
    let out = c.output();
    let per_variable = c
        .vars()
        .iter()
        .enumerate()
        .map(|(v, name)| (name.to_string(), per_var[out][v].clone()))
        .collect();
    CircuitStats {
        size: n,
        edge_count: c.edge_count(),
        depth: depth[out],
        is_formula,
        is_monotone: c.is_monotone(),
        is_mult_disjoint: is_mult_disjoint(c),
        unbounded_fanin: c.is_unbounded_fanin(),
        syntactic_degree: SyntacticDegree {
            total: totals[out].clone(),
            per_variable,
        },
    }
}

/// For every gate: total syntactic degree, and syntactic degree per variable
/// (indexed by `VarId`).
pub fn syntactic_degrees(c: &Circuit) -> (Vec<BigUint>, Vec<Vec<BigUint>>) {
    let nv = c.vars().len();
    let mut total: Vec<BigUint> = Vec::with_capacity(c.size());
    let mut per: Vec<Vec<BigUint>> = Vec::with_capacity(c.size());
    for g in c.gates() {
        let (t, p) = match g {
            Gate::Var(v) => {
                let mut p = vec![BigUint::zero(); nv];
                p[v.0 as usize] = BigUint::one();
                (BigUint::one(), p)
            }
            Gate::Const(_) => (BigUint::zero(), vec![BigUint::zero(); nv]),
            Gate::Add(ch) => {
                let t = ch.iter().map(|&i| &total[i]).max().cloned().unwrap_or_default();
                let p = (0..nv)
                    .map(|v| ch.iter().map(|&i| &per[i][v]).max().cloned().unwrap_or_default())
                    .collect();
                (t, p)
            }
            Gate::Mul(ch) => {
                let t = ch.iter().map(|&i| &total[i]).sum();
                let p = (0..nv).map(|v| ch.iter().map(|&i| &per[i][v]).sum()).collect();
                (t, p)
            }
        };
        total.push(t);
        per.push(p);
    }
    (total, per)
}

/// Smallest total degree any parse tree of each gate can have
/// (var = 1, const = 0, add = min, mul = sum).
pub fn min_degrees(c: &Circuit) -> Vec<BigUint> {
    let mut out: Vec<BigUint> = Vec::with_capacity(c.size());
    for g in c.gates() {
        let d = match g {
            Gate::Var(_) => BigUint::one(),
            Gate::Const(_) => BigUint::zero(),
            Gate::Add(ch) => ch.iter().map(|&i| &out[i]).min().cloned().unwrap_or_default(),
            Gate::Mul(ch) => ch.iter().map(|&i| &out[i]).sum(),
        };
        out.push(d);
    }
    out
}

/// Gates reachable from each gate, itself included.
pub(crate) fn descendant_sets(c: &Circuit) -> Vec<FixedBitSet> {
    let n = c.size();
    let mut sets: Vec<FixedBitSet> = Vec::with_capacity(n);
    for (i, g) in c.gates().iter().enumerate() {
        let mut s = FixedBitSet::with_capacity(n);
        s.insert(i);
        for &ch in g.children() {
            s.union_with(&sets[ch]);
        }
        sets.push(s);
    }
    sets
}

/// True iff for every multiplication gate the subcircuits of its arguments
/// are pairwise disjoint.
pub fn is_mult_disjoint(c: &Circuit) -> bool {
    let sets = descendant_sets(c);
    c.gates().iter().all(|g| match g {
        Gate::Mul(ch) => {
            for (a, &x) in ch.iter().enumerate() {
                for &y in &ch[a + 1..] {
                    if !sets[x].is_disjoint(&sets[y]) {
                        return false;
                    }
                }
            }
            true
        }
        _ => true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{parse_circuit, Builder};

    #[test]
    fn tree_is_formula_and_disjoint() {
        let c = parse_circuit("a=var X; b=var Y; c=var X; s=add a b; p=mul s c; out p").unwrap();
        let st = analyze(&c);
        assert!(st.is_formula && st.is_mult_disjoint && st.is_monotone);
        assert_eq!(st.depth, 2);
        assert_eq!(st.edge_count, 4);
        assert_eq!(st.syntactic_degree.total, BigUint::from(2u32));
        assert_eq!(st.syntactic_degree.per_variable["X"], BigUint::from(2u32));
        assert_eq!(st.syntactic_degree.per_variable["Y"], BigUint::from(1u32));
    }

    #[test]
    fn shared_square_is_not_disjoint() {
        let c = parse_circuit("o=const 1; x=var X; g=add o x; sq=mul g g; out sq").unwrap();
        let st = analyze(&c);
        assert!(!st.is_mult_disjoint);
        assert!(!st.is_formula);
        assert_eq!(st.syntactic_degree.total, BigUint::from(2u32));
    }

    #[test]
    fn iterated_squaring_degree() {
        let mut b = Builder::new();
        let mut g = b.var("X");
        for _ in 0..10 {
            g = b.mul(g, g);
        }
        let c = b.finish(g).unwrap();
        assert_eq!(analyze(&c).syntactic_degree.total, BigUint::from(1024u32));
        assert_eq!(analyze(&c).depth, 10);
    }

    #[test]
    fn sharing_under_addition_keeps_disjointness() {
        let c = parse_circuit("x=var X; y=var Y; s=add x x; t=add s y; z=var Z; p=mul t z; out p").unwrap();
        let st = analyze(&c);
        assert!(st.is_mult_disjoint);
        assert!(!st.is_formula);
    }
}
