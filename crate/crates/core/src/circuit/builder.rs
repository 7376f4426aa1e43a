use std::collections::HashMap;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Zero;

use super::{Circuit, Constant, Gate, GateId, VarId};
use crate::error::Result;
use crate::poly::{Monomial, Var};

/// Incremental circuit construction. Every `var`/`constant` call creates a
/// fresh input gate, so trees built from fresh leaves stay formulas.
#[derive(Debug, Clone, Default)]
pub struct Builder {
    gates: Vec<Gate>,
    vars: Vec<Var>,
    var_index: HashMap<Var, VarId>,
    unbounded: bool,
}

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder whose `sum`/`product` emit a single gate of arbitrary fanin.
    pub fn unbounded() -> Self {
        Builder {
            unbounded: true,
            ..Self::default()
        }
    }

    pub fn is_unbounded(&self) -> bool {
        self.unbounded
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id]
    }

    fn push(&mut self, g: Gate) -> GateId {
        self.gates.push(g);
        self.gates.len() - 1
    }

    pub fn var_id(&mut self, name: &str) -> VarId {
        let v = Var::new(name);
        if let Some(id) = self.var_index.get(&v) {
            return *id;
        }
        let id = VarId(self.vars.len() as u32);
        self.vars.push(v.clone());
        self.var_index.insert(v, id);
        id
    }

    pub fn var(&mut self, name: &str) -> GateId {
        let id = self.var_id(name);
        self.push(Gate::Var(id))
    }

    pub fn constant(&mut self, c: Constant) -> GateId {
        self.push(Gate::Const(c))
    }

    pub fn one(&mut self) -> GateId {
        self.constant(Constant::One)
    }

    pub fn neg_one(&mut self) -> GateId {
        self.constant(Constant::NegOne)
    }

    /// `(-1) + 1`.
    pub fn zero(&mut self) -> GateId {
        let a = self.neg_one();
        let b = self.one();
        self.push(Gate::Add(vec![a, b]))
    }

    pub fn add(&mut self, a: GateId, b: GateId) -> GateId {
        self.push(Gate::Add(vec![a, b]))
    }

    pub fn mul(&mut self, a: GateId, b: GateId) -> GateId {
        self.push(Gate::Mul(vec![a, b]))
    }

    /// Raw gate with the given children; fanin must be at least 2.
    pub fn add_many(&mut self, children: Vec<GateId>) -> GateId {
        debug_assert!(children.len() >= 2);
        self.push(Gate::Add(children))
    }

    pub fn mul_many(&mut self, children: Vec<GateId>) -> GateId {
        debug_assert!(children.len() >= 2);
        self.push(Gate::Mul(children))
    }

    /// Sum of the given gates; `0` for an empty list.
    pub fn sum(&mut self, items: Vec<GateId>) -> GateId {
        match items.len() {
            0 => self.zero(),
            1 => items[0],
            _ if self.unbounded => self.push(Gate::Add(items)),
            _ => self.balanced(items, true),
        }
    }

    /// Product of the given gates; `1` for an empty list.
    pub fn product(&mut self, items: Vec<GateId>) -> GateId {
        match items.len() {
            0 => self.one(),
            1 => items[0],
            _ if self.unbounded => self.push(Gate::Mul(items)),
            _ => self.balanced(items, false),
        }
    }

    /// Like `sum`, but children that are themselves addition gates are
    /// spliced in (unbounded mode only), keeping formulas shallow.
    pub fn sum_flat(&mut self, items: Vec<GateId>) -> GateId {
        if !self.unbounded {
            return self.sum(items);
        }
        let mut flat = Vec::new();
        for g in items {
            match &self.gates[g] {
                Gate::Add(ch) => flat.extend(ch.iter().copied()),
                _ => flat.push(g),
            }
        }
        self.sum(flat)
    }

    /// Like `product`, splicing in multiplication children.
    pub fn product_flat(&mut self, items: Vec<GateId>) -> GateId {
        if !self.unbounded {
            return self.product(items);
        }
        let mut flat = Vec::new();
        for g in items {
            match &self.gates[g] {
                Gate::Mul(ch) => flat.extend(ch.iter().copied()),
                _ => flat.push(g),
            }
        }
        self.product(flat)
    }

    fn balanced(&mut self, mut items: Vec<GateId>, add: bool) -> GateId {
        while items.len() > 1 {
            let mut next = Vec::with_capacity(items.len().div_ceil(2));
            for pair in items.chunks(2) {
                next.push(match pair {
                    [a, b] if add => self.add(*a, *b),
                    [a, b] => self.mul(*a, *b),
                    [a] => *a,
                    _ => unreachable!(),
                });
            }
            items = next;
        }
        items[0]
    }

    /// The integer `n`, from `O(log |n|)` gates: a binary expansion over the
    /// unit of the right sign, doubling by self-addition.
    pub fn scalar(&mut self, n: &BigInt) -> GateId {
        if n.is_zero() {
            return self.zero();
        }
        let unit = if n.sign() == Sign::Minus {
            Constant::NegOne
        } else {
            Constant::One
        };
        let mag = n.magnitude();
        let bits = mag.bits();
        let mut acc = self.constant(unit);
        for i in (0..bits - 1).rev() {
            acc = self.add(acc, acc);
            if mag.bit(i) {
                let u = self.constant(unit);
                acc = self.add(acc, u);
            }
        }
        acc
    }

    /// Unary scalar: `|n|` unit constants under one addition gate (or a single
    /// constant). Used where a depth bound matters more than size.
    pub fn scalar_unary(&mut self, n: i64) -> GateId {
        if n == 0 {
            return self.zero();
        }
        let unit = if n < 0 { Constant::NegOne } else { Constant::One };
        let leaves: Vec<GateId> = (0..n.unsigned_abs()).map(|_| self.constant(unit)).collect();
        self.sum(leaves)
    }

    /// `g^k` by square-and-multiply; `O(log k)` extra gates.
    pub fn power(&mut self, g: GateId, k: &BigUint) -> GateId {
        if k.is_zero() {
            return self.one();
        }
        let mut acc = g;
        for i in (0..k.bits() - 1).rev() {
            acc = self.mul(acc, acc);
            if k.bit(i) {
                acc = self.mul(acc, g);
            }
        }
        acc
    }

    /// `var^e` with a fresh input gate.
    pub fn var_power(&mut self, name: &str, e: &BigUint) -> GateId {
        if e.is_zero() {
            return self.one();
        }
        let x = self.var(name);
        self.power(x, e)
    }

    /// A monomial from fresh input gates. Exponents up to 4 use repeated
    /// leaves (a formula); larger ones use repeated squaring.
    pub fn monomial(&mut self, m: &Monomial) -> GateId {
        let mut factors = Vec::new();
        for (v, e) in m.iter() {
            if *e <= BigUint::from(4u32) {
                let k: u32 = e.try_into().expect("small exponent");
                for _ in 0..k {
                    factors.push(self.var(v.as_str()));
                }
            } else {
                factors.push(self.var_power(v.as_str(), e));
            }
        }
        self.product(factors)
    }

    /// Copies `c` into this builder, replacing each variable input gate by
    /// `on_var(builder, name)`. Returns the image of `c`'s output.
    pub fn embed_with<F>(&mut self, c: &Circuit, mut on_var: F) -> GateId
    where
        F: FnMut(&mut Builder, &Var) -> GateId,
    {
        let mut map = Vec::with_capacity(c.size());
        for g in c.gates() {
            let id = match g {
                Gate::Var(v) => on_var(self, c.var(*v)),
                Gate::Const(k) => self.constant(*k),
                Gate::Add(ch) => {
                    let ch: Vec<GateId> = ch.iter().map(|&i| map[i]).collect();
                    self.push(Gate::Add(ch))
                }
                Gate::Mul(ch) => {
                    let ch: Vec<GateId> = ch.iter().map(|&i| map[i]).collect();
                    self.push(Gate::Mul(ch))
                }
            };
            map.push(id);
        }
        if c.is_unbounded_fanin() {
            self.unbounded = true;
        }
        map[c.output()]
    }

    /// Copies `c` verbatim (variables matched by name).
    pub fn embed(&mut self, c: &Circuit) -> GateId {
        self.embed_with(c, |b, v| b.var(v.as_str()))
    }

    /// Prunes gates not reachable from `out`, renumbers densely and validates.
    /// Variables are renumbered in order of first occurrence; only those that
    /// still label an input gate are kept.
    pub fn finish(self, out: GateId) -> Result<Circuit> {
        let n = self.gates.len();
        let mut live = vec![false; n];
        live[out] = true;
        for i in (0..=out).rev() {
            if live[i] {
                for &c in self.gates[i].children() {
                    live[c] = true;
                }
            }
        }
        let mut remap = vec![usize::MAX; n];
        let mut gates = Vec::new();
        let mut var_remap: HashMap<VarId, VarId> = HashMap::new();
        let mut vars = Vec::new();
        let mut unbounded = false;
        for i in 0..=out {
            if !live[i] {
                continue;
            }
            let g = match &self.gates[i] {
                Gate::Var(v) => {
                    let nv = *var_remap.entry(*v).or_insert_with(|| {
                        vars.push(self.vars[v.0 as usize].clone());
                        VarId(vars.len() as u32 - 1)
                    });
                    Gate::Var(nv)
                }
                Gate::Const(k) => Gate::Const(*k),
                Gate::Add(ch) => Gate::Add(ch.iter().map(|&c| remap[c]).collect()),
                Gate::Mul(ch) => Gate::Mul(ch.iter().map(|&c| remap[c]).collect()),
            };
            if g.children().len() > 2 {
                unbounded = true;
            }
            remap[i] = gates.len();
            gates.push(g);
        }
        let output = gates.len() - 1;
        let labels = vec![None; gates.len()];
        Circuit::from_parts(gates, output, vars, unbounded || self.unbounded, labels)
    }
}
