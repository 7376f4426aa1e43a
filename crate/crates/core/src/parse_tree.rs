//! Parse trees and parse-tree types.
//!
//! In a multiplicatively disjoint circuit every parse tree is a subgraph, so
//! it is encoded as a set of edges (a boolean word over the edges, in the
//! order of [`Circuit::edges`]). In a general circuit a parse tree may use an
//! edge several times; its *type* records those multiplicities, with one
//! extra artificial edge leaving the output gate.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use fixedbitset::FixedBitSet;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::circuit::{is_mult_disjoint, min_degrees, syntactic_degrees, Builder, Circuit, Constant, Gate};
use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial, Var};
use crate::Budget;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParseTreeEncoding {
    pub edges: FixedBitSet,
}

impl ParseTreeEncoding {
    pub fn empty(n_edges: usize) -> Self {
        ParseTreeEncoding {
            edges: FixedBitSet::with_capacity(n_edges),
        }
    }

    pub fn from_edges(n_edges: usize, ids: &[usize]) -> Self {
        let mut e = Self::empty(n_edges);
        for &i in ids {
            e.edges.insert(i);
        }
        e
    }

    /// Parses a word of `0`/`1` characters.
    pub fn from_word(word: &str) -> Result<Self> {
        let mut e = Self::empty(word.len());
        for (i, ch) in word.chars().enumerate() {
            match ch {
                '1' => e.edges.insert(i),
                '0' => {}
                _ => return Err(Error::InvalidEncoding(format!("bad character `{ch}`"))),
            }
        }
        Ok(e)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.edges.contains(edge)
    }
}

impl fmt::Display for ParseTreeEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.edges.len() {
            f.write_str(if self.edges.contains(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignedMonomial {
    pub sign: i8,
    pub monomial: Monomial,
}

impl SignedMonomial {
    pub fn to_polynomial(&self) -> Polynomial {
        Polynomial::term(self.monomial.clone(), self.sign as i64)
    }
}

fn require_disjoint(c: &Circuit) -> Result<()> {
    if is_mult_disjoint(c) {
        Ok(())
    } else {
        Err(Error::NotMultDisjoint)
    }
}

/// Gates touched by the encoding: the output, and every origin of a chosen
/// edge.
fn tree_gates(c: &Circuit, enc: &ParseTreeEncoding) -> Vec<bool> {
    let mut used = vec![false; c.size()];
    used[c.output()] = true;
    for e in c.edges() {
        if enc.contains(e.id) {
            used[e.from] = true;
        }
    }
    used
}

/// Checks the four subgraph conditions. Runs in `O(N)`.
pub fn is_valid_parse_tree(c: &Circuit, enc: &ParseTreeEncoding) -> Result<bool> {
    require_disjoint(c)?;
    Ok(valid_unchecked(c, enc))
}

fn valid_unchecked(c: &Circuit, enc: &ParseTreeEncoding) -> bool {
    if enc.len() != c.edge_count() {
        return false;
    }
    let ins = c.in_edges();
    // "has a chosen out-edge"; the output has the artificial one.
    let used = tree_gates(c, enc);
    for (i, g) in c.gates().iter().enumerate() {
        let chosen = ins[i].iter().filter(|&&e| enc.contains(e)).count();
        if !used[i] {
            if chosen > 0 {
                return false;
            }
            continue;
        }
        match g {
            Gate::Add(_) if chosen != 1 => return false,
            Gate::Mul(ch) if chosen != ch.len() => return false,
            _ => {}
        }
    }
    true
}

/// Value of a valid tree: the product of its input labels.
pub fn tree_value(c: &Circuit, enc: &ParseTreeEncoding) -> Result<SignedMonomial> {
    if !is_valid_parse_tree(c, enc)? {
        return Err(Error::InvalidEncoding(format!("{enc} is not a parse tree")));
    }
    Ok(value_unchecked(c, enc))
}

fn value_unchecked(c: &Circuit, enc: &ParseTreeEncoding) -> SignedMonomial {
    let used = tree_gates(c, enc);
    let mut sign = 1i8;
    let mut exps: BTreeMap<Var, BigUint> = BTreeMap::new();
    for (i, g) in c.gates().iter().enumerate() {
        if !used[i] {
            continue;
        }
        match g {
            Gate::Var(v) => *exps.entry(c.var(*v).clone()).or_default() += 1u32,
            Gate::Const(Constant::NegOne) => sign = -sign,
            _ => {}
        }
    }
    SignedMonomial {
        sign,
        monomial: Monomial::from_pairs(exps),
    }
}

/// Iterator over all parse trees of a multiplicatively disjoint circuit.
///
/// The state is one choice per addition gate, treated as an odometer whose
/// least significant digit is the lowest-indexed gate. Only gates that are in
/// the current tree are advanced, and everything below an advanced gate is
/// reset, so each tree appears exactly once and memory stays linear.
pub struct ParseTrees<'a> {
    c: &'a Circuit,
    in_edges: Vec<Vec<usize>>,
    choice: Vec<usize>,
    active: Vec<bool>,
    done: bool,
    emitted: u64,
    limit: u64,
}

impl<'a> ParseTrees<'a> {
    fn refresh(&mut self) {
        self.active.iter_mut().for_each(|a| *a = false);
        self.active[self.c.output()] = true;
        for i in (0..self.c.size()).rev() {
            if !self.active[i] {
                continue;
            }
            match self.c.gate(i) {
                Gate::Add(ch) => self.active[ch[self.choice[i]]] = true,
                Gate::Mul(ch) => ch.iter().for_each(|&j| self.active[j] = true),
                _ => {}
            }
        }
    }

    fn current(&self) -> ParseTreeEncoding {
        let mut enc = ParseTreeEncoding::empty(self.c.edge_count());
        for (i, g) in self.c.gates().iter().enumerate() {
            if !self.active[i] {
                continue;
            }
            match g {
                Gate::Add(_) => enc.edges.insert(self.in_edges[i][self.choice[i]]),
                Gate::Mul(_) => self.in_edges[i].iter().for_each(|&e| enc.edges.insert(e)),
                _ => {}
            }
        }
        enc
    }

    fn advance(&mut self) -> bool {
        for i in 0..self.c.size() {
            if !self.active[i] {
                continue;
            }
            if let Gate::Add(ch) = self.c.gate(i) {
                if self.choice[i] + 1 < ch.len() {
                    self.choice[i] += 1;
                    self.choice[..i].iter_mut().for_each(|x| *x = 0);
                    self.refresh();
                    return true;
                }
            }
        }
        false
    }
}

impl Iterator for ParseTrees<'_> {
    type Item = Result<ParseTreeEncoding>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if self.emitted >= self.limit {
            self.done = true;
            return Some(Err(Error::BudgetExceeded(format!(
                "more than {} parse trees",
                self.limit
            ))));
        }
        let enc = self.current();
        self.emitted += 1;
        if !self.advance() {
            self.done = true;
        }
        Some(Ok(enc))
    }
}

/// Streams every parse tree; yields a budget error after `limit` trees.
pub fn enumerate_parse_trees(c: &Circuit, limit: u64) -> Result<ParseTrees<'_>> {
    require_disjoint(c)?;
    let mut it = ParseTrees {
        c,
        in_edges: c.in_edges(),
        choice: vec![0; c.size()],
        active: vec![false; c.size()],
        done: false,
        emitted: 0,
        limit,
    };
    it.refresh();
    Ok(it)
}

/// Sum of the values of all parse trees, by enumeration.
pub fn parse_tree_sum(c: &Circuit, limit: u64) -> Result<Polynomial> {
    let mut sum = Polynomial::zero();
    for enc in enumerate_parse_trees(c, limit)? {
        let v = value_unchecked(c, &enc?);
        sum.add_term(v.monomial, BigInt::from(v.sign));
    }
    Ok(sum)
}

type SignedCounts = HashMap<(Monomial, i8), BigUint>;

/// Numbers of parse trees with value `+m` and `-m`.
///
/// Bottom-up over gates, each holding counts of partial trees keyed by their
/// signed monomial; anything not dividing `m` is dropped on the way.
pub fn signed_contribution_counts(c: &Circuit, m: &Monomial, budget: &Budget) -> Result<(BigUint, BigUint)> {
    require_disjoint(c)?;
    let mut work = 0u64;
    let mut vals: Vec<SignedCounts> = Vec::with_capacity(c.size());
    for g in c.gates() {
        let mut map = SignedCounts::new();
        match g {
            Gate::Var(v) => {
                let x = Monomial::var(c.var(*v).clone());
                if x.divides(m) {
                    map.insert((x, 1), BigUint::one());
                }
            }
            Gate::Const(k) => {
                map.insert((Monomial::one(), k.value() as i8), BigUint::one());
            }
            Gate::Add(ch) => {
                for &j in ch {
                    for (k, n) in &vals[j] {
                        *map.entry(k.clone()).or_default() += n;
                    }
                }
            }
            Gate::Mul(ch) => {
                map = vals[ch[0]].clone();
                for &j in &ch[1..] {
                    let mut next = SignedCounts::new();
                    for ((ma, sa), na) in &map {
                        for ((mb, sb), nb) in &vals[j] {
                            work += 1;
                            let prod = ma.mul(mb);
                            if prod.divides(m) {
                                *next.entry((prod, sa * sb)).or_default() += na * nb;
                            }
                        }
                    }
                    map = next;
                }
            }
        }
        if map.len() > budget.max_terms || work > budget.max_work {
            return Err(Error::BudgetExceeded("signed contribution table".into()));
        }
        vals.push(map);
    }
    let out = &vals[c.output()];
    let get = |s: i8| out.get(&(m.clone(), s)).cloned().unwrap_or_default();
    Ok((get(1), get(-1)))
}

/// Edge multiplicities of a parse tree, plus the artificial output edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParseTreeType {
    pub edges: Vec<BigUint>,
    pub out: BigUint,
}

impl ParseTreeType {
    pub fn zero(n_edges: usize) -> Self {
        ParseTreeType {
            edges: vec![BigUint::zero(); n_edges],
            out: BigUint::zero(),
        }
    }

    pub fn from_u64(edges: &[u64], out: u64) -> Self {
        ParseTreeType {
            edges: edges.iter().map(|&x| BigUint::from(x)).collect(),
            out: BigUint::from(out),
        }
    }

    /// The 0/1 indicator of a parse tree encoding.
    pub fn indicator(enc: &ParseTreeEncoding) -> Self {
        ParseTreeType {
            edges: (0..enc.len()).map(|i| BigUint::from(enc.contains(i) as u32)).collect(),
            out: BigUint::one(),
        }
    }

    /// The encoding this type corresponds to, if every multiplicity is 0 or 1.
    pub fn as_encoding(&self) -> Option<ParseTreeEncoding> {
        let mut enc = ParseTreeEncoding::empty(self.edges.len());
        for (i, x) in self.edges.iter().enumerate() {
            if x.is_one() {
                enc.edges.insert(i);
            } else if !x.is_zero() {
                return None;
            }
        }
        Some(enc)
    }
}

impl Serialize for ParseTreeType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            edges: Vec<String>,
            out: String,
        }
        Repr {
            edges: self.edges.iter().map(|x| x.to_string()).collect(),
            out: self.out.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ParseTreeType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Repr {
            edges: Vec<String>,
            out: String,
        }
        let r = Repr::deserialize(d)?;
        let edges = r
            .edges
            .iter()
            .map(|s| s.parse::<BigUint>().map_err(D::Error::custom))
            .collect::<std::result::Result<_, _>>()?;
        Ok(ParseTreeType {
            edges,
            out: r.out.parse().map_err(D::Error::custom)?,
        })
    }
}

/// Sum of multiplicities leaving each gate, the output's artificial edge
/// included.
fn out_flows(c: &Circuit, tau: &ParseTreeType) -> Vec<BigUint> {
    let mut flow = vec![BigUint::zero(); c.size()];
    for e in c.edges() {
        flow[e.from] += &tau.edges[e.id];
    }
    flow[c.output()] += &tau.out;
    flow
}

/// Checks the four type conditions.
pub fn is_valid_type(c: &Circuit, tau: &ParseTreeType) -> bool {
    if tau.edges.len() != c.edge_count() || !tau.out.is_one() {
        return false;
    }
    let flow = out_flows(c, tau);
    let ins = c.in_edges();
    for (i, g) in c.gates().iter().enumerate() {
        let inflow = ins[i].iter().map(|&e| &tau.edges[e]);
        match g {
            Gate::Add(_) => {
                if inflow.sum::<BigUint>() != flow[i] {
                    return false;
                }
            }
            Gate::Mul(_) if inflow.into_iter().any(|x| *x != flow[i]) => {
                return false;
            }
            _ => {}
        }
        let positive_in = ins[i].iter().any(|&e| !tau.edges[e].is_zero());
        if positive_in && flow[i].is_zero() {
            return false;
        }
    }
    true
}

/// The monomial shared by all parse trees of type `tau`.
pub fn type_monomial(c: &Circuit, tau: &ParseTreeType) -> Result<Monomial> {
    Ok(type_value(c, tau)?.monomial)
}

/// Monomial and sign of a type: each input label raised to its out-flow.
pub fn type_value(c: &Circuit, tau: &ParseTreeType) -> Result<SignedMonomial> {
    if !is_valid_type(c, tau) {
        return Err(Error::InvalidType("type conditions violated".into()));
    }
    let flow = out_flows(c, tau);
    let mut exps: BTreeMap<Var, BigUint> = BTreeMap::new();
    let mut negative = false;
    for (i, g) in c.gates().iter().enumerate() {
        match g {
            Gate::Var(v) => *exps.entry(c.var(*v).clone()).or_default() += &flow[i],
            Gate::Const(Constant::NegOne) => negative ^= flow[i].bit(0),
            _ => {}
        }
    }
    Ok(SignedMonomial {
        sign: if negative { -1 } else { 1 },
        monomial: Monomial::from_pairs(exps),
    })
}

/// Number of parse trees of every type, by dynamic programming over gates:
/// a gate's table maps partial edge-multiplicity vectors to counts.
pub fn type_census(c: &Circuit, budget: &Budget) -> Result<BTreeMap<ParseTreeType, BigUint>> {
    let n_edges = c.edge_count();
    let ins = c.in_edges();
    let mut work = 0u64;
    let mut tables: Vec<Option<HashMap<Vec<u64>, BigUint>>> = vec![None; c.size()];
    let mut last_use = vec![0usize; c.size()];
    for (i, g) in c.gates().iter().enumerate() {
        for &ch in g.children() {
            last_use[ch] = i;
        }
    }
    let overflow = || Error::BudgetExceeded("parse tree type table".into());
    for (i, g) in c.gates().iter().enumerate() {
        let table = |j: usize| tables[j].as_ref().expect("child table live");
        let mut map: HashMap<Vec<u64>, BigUint> = HashMap::new();
        match g {
            Gate::Var(_) | Gate::Const(_) => {
                map.insert(vec![0; n_edges], BigUint::one());
            }
            Gate::Add(ch) => {
                for (slot, &j) in ch.iter().enumerate() {
                    for (t, n) in table(j) {
                        let mut t = t.clone();
                        t[ins[i][slot]] += 1;
                        *map.entry(t).or_default() += n;
                    }
                }
            }
            Gate::Mul(ch) => {
                let mut acc: HashMap<Vec<u64>, BigUint> = HashMap::new();
                acc.insert(vec![0; n_edges], BigUint::one());
                for (slot, &j) in ch.iter().enumerate() {
                    let mut next = HashMap::new();
                    for (ta, na) in &acc {
                        for (tb, nb) in table(j) {
                            work += 1;
                            let mut t: Vec<u64> = ta
                                .iter()
                                .zip(tb)
                                .map(|(a, b)| a.checked_add(*b).ok_or_else(overflow))
                                .collect::<Result<_>>()?;
                            t[ins[i][slot]] += 1;
                            *next.entry(t).or_default() += na * nb;
                        }
                    }
                    acc = next;
                }
                map = acc;
            }
        }
        if map.len() > budget.max_terms || work > budget.max_work {
            return Err(overflow());
        }
        for &ch in g.children() {
            if last_use[ch] == i {
                tables[ch] = None;
            }
        }
        tables[i] = Some(map);
    }
    let root = tables[c.output()].take().unwrap_or_default();
    Ok(root
        .into_iter()
        .map(|(t, n)| {
            let tau = ParseTreeType {
                edges: t.into_iter().map(BigUint::from).collect(),
                out: BigUint::one(),
            };
            (tau, n)
        })
        .collect())
}

/// `Σ_τ count(τ) · value(τ)`.
pub fn type_census_sum(c: &Circuit, census: &BTreeMap<ParseTreeType, BigUint>) -> Result<Polynomial> {
    let mut sum = Polynomial::zero();
    for (tau, n) in census {
        let v = type_value(c, tau)?;
        sum.add_term(v.monomial, BigInt::from(n.clone()) * BigInt::from(v.sign));
    }
    Ok(sum)
}

/// The formula obtained by duplicating every shared gate, with a map from the
/// formula's edges back to the circuit's edges.
pub fn unfold(c: &Circuit, max_gates: usize) -> Result<(Circuit, Vec<usize>)> {
    let ins = c.in_edges();
    let mut b = if c.is_unbounded_fanin() {
        Builder::unbounded()
    } else {
        Builder::new()
    };
    // Emit post-order copies; record the source edge of each emitted child slot.
    let mut edge_src: Vec<(usize, Vec<usize>)> = Vec::new();
    fn go(
        c: &Circuit,
        ins: &[Vec<usize>],
        g: usize,
        b: &mut Builder,
        edge_src: &mut Vec<(usize, Vec<usize>)>,
        max_gates: usize,
    ) -> Result<usize> {
        if b.len() >= max_gates {
            return Err(Error::BudgetExceeded(format!(
                "unfolded formula above {max_gates} gates"
            )));
        }
        let id = match c.gate(g) {
            Gate::Var(v) => b.var(c.var(*v).as_str()),
            Gate::Const(k) => b.constant(*k),
            Gate::Add(ch) | Gate::Mul(ch) => {
                let kids: Vec<usize> = ch
                    .iter()
                    .map(|&j| go(c, ins, j, b, edge_src, max_gates))
                    .collect::<Result<_>>()?;
                let id = if matches!(c.gate(g), Gate::Add(_)) {
                    b.add_many(kids)
                } else {
                    b.mul_many(kids)
                };
                edge_src.push((id, ins[g].clone()));
                id
            }
        };
        Ok(id)
    }
    let out = go(c, &ins, c.output(), &mut b, &mut edge_src, max_gates)?;
    // Every copy is reachable, so `finish` keeps gate numbering intact.
    let f = b.finish(out)?;
    let mut src_of_gate: HashMap<usize, Vec<usize>> = edge_src.into_iter().collect();
    let mut map = Vec::with_capacity(f.edge_count());
    for (i, g) in f.gates().iter().enumerate() {
        if !g.children().is_empty() {
            map.extend(src_of_gate.remove(&i).expect("source edges recorded"));
        }
    }
    Ok((f, map))
}

/// Outcome of the monotone type search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeSearch {
    pub witness: Option<ParseTreeType>,
    pub nodes: u64,
}

/// Decides whether some parse-tree type of the monotone circuit `c` has
/// monomial `m`, returning a witness type when one exists.
///
/// Copies of a gate in a parse tree are split into *active* ones (positive
/// degree) and *passive* ones (degree 0). Passive subtrees never affect the
/// monomial, so they can all follow one fixed degree-0 route, and only active
/// flow needs searching. Active copies at any gate are disjoint subtrees of
/// positive degree, so their number is at most `deg m`: the search space is
/// finite without any artificial multiplicity cap. The only limit is the
/// node budget, reported as an error rather than a negative answer.
pub fn exists_type_for_monomial(c: &Circuit, m: &Monomial, budget: &Budget) -> Result<TypeSearch> {
    if !c.is_monotone() {
        return Err(Error::NotMonotone);
    }
    let n = c.size();
    let mindeg = min_degrees(c);
    let (maxdeg, maxdeg_var) = syntactic_degrees(c);
    let nv = c.vars().len();
    let target: Vec<BigUint> = c.vars().iter().map(|v| m.exponent(v)).collect();
    let search_fail = || {
        Ok(TypeSearch {
            witness: None,
            nodes: 0,
        })
    };
    // Variables of m that the circuit does not have.
    if m.vars().any(|v| c.var_id(v.as_str()).is_none()) {
        return search_fail();
    }
    let deg = m.total_degree().clone();
    let mut s = Search {
        c,
        ins: c.in_edges(),
        mindeg: mindeg.clone(),
        mindeg_active: mindeg.iter().map(|d| d.clone().max(BigUint::one())).collect(),
        maxdeg,
        maxdeg_var,
        target,
        deg: deg.clone(),
        demand: vec![BigUint::zero(); n],
        alloc: vec![BigUint::zero(); c.edge_count()],
        exps: vec![BigUint::zero(); nv],
        nodes: 0,
        budget: budget.max_work,
    };
    let found = if deg.is_zero() {
        mindeg[c.output()].is_zero()
    } else {
        s.demand[c.output()] = BigUint::one();
        s.visit(n as isize - 1)?
    };
    let nodes = s.nodes;
    if !found {
        return Ok(TypeSearch { witness: None, nodes });
    }
    let tau = s.witness(!deg.is_zero());
    debug_assert!(is_valid_type(c, &tau));
    debug_assert_eq!(type_monomial(c, &tau).ok().as_ref(), Some(m));
    Ok(TypeSearch {
        witness: Some(tau),
        nodes,
    })
}

struct Search<'a> {
    c: &'a Circuit,
    ins: Vec<Vec<usize>>,
    mindeg: Vec<BigUint>,
    mindeg_active: Vec<BigUint>,
    maxdeg: Vec<BigUint>,
    maxdeg_var: Vec<Vec<BigUint>>,
    target: Vec<BigUint>,
    deg: BigUint,
    demand: Vec<BigUint>,
    alloc: Vec<BigUint>,
    exps: Vec<BigUint>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    /// Necessary conditions on the pending demand at gates `0..=i`.
    fn feasible(&self, i: usize) -> bool {
        let mut lower: BigUint = self.exps.iter().sum();
        let mut upper = self.exps.clone();
        for j in 0..=i {
            let a = &self.demand[j];
            if a.is_zero() {
                continue;
            }
            if self.maxdeg[j].is_zero() {
                return false;
            }
            lower += a * &self.mindeg_active[j];
            for (v, u) in upper.iter_mut().enumerate() {
                if !self.maxdeg_var[j][v].is_zero() {
                    *u += a * &self.maxdeg_var[j][v];
                }
            }
        }
        lower <= self.deg && upper.iter().zip(&self.target).all(|(u, t)| u >= t)
    }

    fn visit(&mut self, i: isize) -> Result<bool> {
        if i < 0 {
            return Ok(self.exps == self.target);
        }
        let i = i as usize;
        let a = self.demand[i].clone();
        if a.is_zero() {
            return self.visit(i as isize - 1);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded(format!(
                "type search above {} nodes",
                self.budget
            )));
        }
        if !self.feasible(i) {
            return Ok(false);
        }
        match self.c.gate(i) {
            Gate::Var(v) => {
                let v = v.0 as usize;
                self.exps[v] += &a;
                if self.exps[v] <= self.target[v] && self.visit(i as isize - 1)? {
                    return Ok(true);
                }
                self.exps[v] -= &a;
                Ok(false)
            }
            Gate::Const(_) => Ok(false),
            Gate::Add(ch) => {
                let ch = ch.clone();
                self.split_add(i, &ch, 0, a)
            }
            Gate::Mul(ch) => {
                let ch = ch.clone();
                self.split_mul(i, &ch, 0, &a, BigUint::zero())
            }
        }
    }

    /// Distributes `rest` active copies over the in-edges `slot..` of add
    /// gate `i`; the last edge takes what is left.
    fn split_add(&mut self, i: usize, ch: &[usize], slot: usize, rest: BigUint) -> Result<bool> {
        let e = self.ins[i][slot];
        let child = ch[slot];
        if slot + 1 == ch.len() {
            if !rest.is_zero() && self.maxdeg[child].is_zero() {
                return Ok(false);
            }
            return self.assign(e, child, rest, |s| s.visit(i as isize - 1));
        }
        let max = if self.maxdeg[child].is_zero() {
            BigUint::zero()
        } else {
            rest.clone()
        };
        let mut x = BigUint::zero();
        while x <= max {
            let left = &rest - &x;
            let xc = x.clone();
            if self.assign(e, child, xc, |s| s.split_add(i, ch, slot + 1, left))? {
                return Ok(true);
            }
            x += 1u32;
            self.tick()?;
        }
        Ok(false)
    }

    /// Chooses the number of active copies of each argument of mul gate `i`:
    /// forced to `a` when the argument cannot be passive, and at least `a` in
    /// total so every active copy has an active argument.
    fn split_mul(&mut self, i: usize, ch: &[usize], slot: usize, a: &BigUint, total: BigUint) -> Result<bool> {
        if slot == ch.len() {
            if &total < a {
                return Ok(false);
            }
            return self.visit(i as isize - 1);
        }
        let e = self.ins[i][slot];
        let child = ch[slot];
        let forced = !self.mindeg[child].is_zero();
        let (lo, hi) = if forced {
            (a.clone(), a.clone())
        } else if self.maxdeg[child].is_zero() {
            (BigUint::zero(), BigUint::zero())
        } else {
            (BigUint::zero(), a.clone())
        };
        // Larger allocations first: they reach the target degree sooner.
        let mut x = hi;
        loop {
            let t = &total + &x;
            let xc = x.clone();
            if self.assign(e, child, xc, |s| s.split_mul(i, ch, slot + 1, a, t))? {
                return Ok(true);
            }
            if x <= lo {
                break;
            }
            x -= 1u32;
            self.tick()?;
        }
        Ok(false)
    }

    fn assign<F>(&mut self, e: usize, child: usize, x: BigUint, then: F) -> Result<bool>
    where
        F: FnOnce(&mut Self) -> Result<bool>,
    {
        self.demand[child] += &x;
        self.alloc[e] = x.clone();
        if then(self)? {
            return Ok(true);
        }
        self.demand[child] -= &x;
        self.alloc[e] = BigUint::zero();
        Ok(false)
    }

    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded(format!(
                "type search above {} nodes",
                self.budget
            )));
        }
        Ok(())
    }

    /// Completes the active allocation with passive flow along fixed degree-0
    /// routes and returns the full type.
    fn witness(&self, output_active: bool) -> ParseTreeType {
        let n = self.c.size();
        let mut active = vec![BigUint::zero(); n];
        let mut passive = vec![BigUint::zero(); n];
        let mut tau = ParseTreeType::zero(self.c.edge_count());
        tau.out = BigUint::one();
        if output_active {
            active[self.c.output()] = BigUint::one();
        } else {
            passive[self.c.output()] = BigUint::one();
        }
        for i in (0..n).rev() {
            let (a, p) = (active[i].clone(), passive[i].clone());
            match self.c.gate(i) {
                Gate::Add(ch) => {
                    for (slot, &j) in ch.iter().enumerate() {
                        let e = self.ins[i][slot];
                        tau.edges[e] += &self.alloc[e];
                        active[j] += &self.alloc[e];
                    }
                    if !p.is_zero() {
                        let slot = ch
                            .iter()
                            .position(|&j| self.mindeg[j].is_zero())
                            .expect("passive add gate has a degree-0 argument");
                        let e = self.ins[i][slot];
                        tau.edges[e] += &p;
                        passive[ch[slot]] += &p;
                    }
                }
                Gate::Mul(ch) => {
                    let total = &a + &p;
                    for (slot, &j) in ch.iter().enumerate() {
                        let e = self.ins[i][slot];
                        tau.edges[e] = total.clone();
                        active[j] += &self.alloc[e];
                        passive[j] += &total - &self.alloc[e];
                    }
                }
                _ => {}
            }
        }
        tau
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::poly::expand;

    fn circ(s: &str) -> Circuit {
        parse_circuit(s).unwrap()
    }

    fn mono(s: &str) -> Monomial {
        Monomial::parse(s).unwrap()
    }

    #[test]
    fn validity_examples() {
        let xy = circ("x=var X; y=var Y; m=mul x y; out m");
        let full = ParseTreeEncoding::from_word("11").unwrap();
        assert!(is_valid_parse_tree(&xy, &full).unwrap());

        let s = circ("x=var X; y=var Y; s=add x y; out s");
        assert!(!is_valid_parse_tree(&s, &ParseTreeEncoding::empty(2)).unwrap());
        assert!(!is_valid_parse_tree(&s, &ParseTreeEncoding::from_word("11").unwrap()).unwrap());
        assert!(is_valid_parse_tree(&s, &ParseTreeEncoding::from_word("01").unwrap()).unwrap());

        let sq = circ("x=var X; m=mul x x; out m");
        assert_eq!(
            is_valid_parse_tree(&sq, &ParseTreeEncoding::from_word("11").unwrap()),
            Err(Error::NotMultDisjoint)
        );

        let single = circ("x=var X; out x");
        assert!(is_valid_parse_tree(&single, &ParseTreeEncoding::empty(0)).unwrap());
    }

    #[test]
    fn dangling_edge_is_invalid() {
        // edge x->s chosen, but s is not in the tree (output picks y)
        let c = circ("x=var X; y=var Y; s=add x y; z=var Z; o=add s z; out o");
        let ok = ParseTreeEncoding::from_edges(4, &[3]);
        assert!(is_valid_parse_tree(&c, &ok).unwrap());
        let bad = ParseTreeEncoding::from_edges(4, &[0, 3]);
        assert!(!is_valid_parse_tree(&c, &bad).unwrap());
    }

    #[test]
    fn enumeration_counts() {
        let s = circ("x=var X; y=var Y; s=add x y; out s");
        assert_eq!(enumerate_parse_trees(&s, 100).unwrap().count(), 2);
        let p = circ("x=var X; y=var Y; s=add x y; z=var Z; w=var W; t=add z w; m=mul s t; out m");
        let trees: Vec<_> = enumerate_parse_trees(&p, 100).unwrap().map(|t| t.unwrap()).collect();
        assert_eq!(trees.len(), 4);
        let distinct: std::collections::HashSet<_> = trees.iter().collect();
        assert_eq!(distinct.len(), 4);
        assert!(trees.iter().all(|t| is_valid_parse_tree(&p, t).unwrap()));
        let r: Vec<_> = enumerate_parse_trees(&p, 3).unwrap().collect();
        assert_eq!(r.len(), 4);
        assert!(r[3].as_ref().unwrap_err().is_budget());
    }

    #[test]
    fn values() {
        let s = circ("x=var X; y=var Y; s=add x y; out s");
        let t = tree_value(&s, &ParseTreeEncoding::from_word("10").unwrap()).unwrap();
        assert_eq!(
            t,
            SignedMonomial {
                sign: 1,
                monomial: mono("X")
            }
        );
        let nx = circ("n=const -1; x=var X; m=mul n x; out m");
        let t = tree_value(&nx, &ParseTreeEncoding::from_word("11").unwrap()).unwrap();
        assert_eq!(
            t,
            SignedMonomial {
                sign: -1,
                monomial: mono("X")
            }
        );
        let nn = circ("a=const -1; b=const -1; m=mul a b; out m");
        let t = tree_value(&nn, &ParseTreeEncoding::from_word("11").unwrap()).unwrap();
        assert_eq!(
            t,
            SignedMonomial {
                sign: 1,
                monomial: Monomial::one()
            }
        );
    }

    #[test]
    fn signed_counts_examples() {
        let c = circ("x=var X; n=const -1; y=var X; m=mul n y; s=add x m; out s");
        let (p, q) = signed_contribution_counts(&c, &mono("X"), &Budget::default()).unwrap();
        assert_eq!((p, q), (BigUint::one(), BigUint::one()));

        let sq = circ("a=var X; b=var Y; s=add a b; c=var X; d=var Y; t=add c d; m=mul s t; out m");
        let (p, q) = signed_contribution_counts(&sq, &mono("X*Y"), &Budget::default()).unwrap();
        assert_eq!((p, q), (BigUint::from(2u32), BigUint::zero()));
    }

    #[test]
    fn type_examples() {
        let s = circ("x=var X; y=var Y; s=add x y; out s");
        let enc = ParseTreeEncoding::from_word("10").unwrap();
        let tau = ParseTreeType::indicator(&enc);
        assert!(is_valid_type(&s, &tau));
        assert_eq!(type_monomial(&s, &tau).unwrap(), mono("X"));
        let mut two = tau.clone();
        two.out = BigUint::from(2u32);
        assert!(!is_valid_type(&s, &two));

        let xy = circ("x=var X; y=var Y; m=mul x y; out m");
        assert!(!is_valid_type(&xy, &ParseTreeType::from_u64(&[1, 0], 1)));

        // (X*X)*X built from one shared input: multiplicity 3 on its out-edges
        let cube = circ("x=var X; m=mul x x; c=mul m x; out c");
        let tau = ParseTreeType::from_u64(&[1, 1, 1, 1], 1);
        assert!(is_valid_type(&cube, &tau));
        assert_eq!(type_monomial(&cube, &tau).unwrap(), mono("X^3"));

        // (1+X)^2 with the sum shared, X chosen in both factors
        let sq = circ("o=const 1; x=var X; s=add o x; m=mul s s; out m");
        let tau = ParseTreeType::from_u64(&[0, 2, 1, 1], 1);
        assert!(is_valid_type(&sq, &tau));
        assert_eq!(type_monomial(&sq, &tau).unwrap(), mono("X^2"));
    }

    #[test]
    fn census_matches_expansion_on_shared_square() {
        let sq = circ("o=const 1; x=var X; s=add o x; m=mul s s; out m");
        let census = type_census(&sq, &Budget::default()).unwrap();
        assert_eq!(census.len(), 3);
        let middle = ParseTreeType::from_u64(&[1, 1, 1, 1], 1);
        assert_eq!(census[&middle], BigUint::from(2u32));
        let sum = type_census_sum(&sq, &census).unwrap();
        assert_eq!(sum, expand(&sq, &Budget::default()).unwrap());
    }

    #[test]
    fn unfolding_duplicates_shared_gates() {
        let sq = circ("o=const 1; x=var X; s=add o x; m=mul s s; out m");
        let (f, map) = unfold(&sq, 100).unwrap();
        assert_eq!(f.size(), 7);
        assert!(is_mult_disjoint(&f));
        assert_eq!(map.len(), f.edge_count());
        assert_eq!(
            expand(&f, &Budget::default()).unwrap(),
            expand(&sq, &Budget::default()).unwrap()
        );
    }

    #[test]
    fn monotone_type_search() {
        let f = circ("o=const 1; a=var X1; b=var X2; c=var X3; p=mul a b; q=mul p c; s=add o q; out s");
        let r = exists_type_for_monomial(&f, &mono("X1*X2*X3"), &Budget::default()).unwrap();
        let tau = r.witness.unwrap();
        assert!(is_valid_type(&f, &tau));

        let sq = circ("o=const 1; x=var X; s=add o x; m=mul s s; out m");
        for (m, want) in [("X^3", false), ("X^2", true), ("X", true), ("1", true)] {
            let r = exists_type_for_monomial(&sq, &mono(m), &Budget::default()).unwrap();
            assert_eq!(r.witness.is_some(), want, "{m}");
            if let Some(t) = r.witness {
                assert_eq!(type_monomial(&sq, &t).unwrap(), mono(m));
            }
        }

        let neg = circ("o=const -1; x=var X; s=add o x; out s");
        assert_eq!(
            exists_type_for_monomial(&neg, &mono("X"), &Budget::default()),
            Err(Error::NotMonotone)
        );
    }

    #[test]
    fn huge_exponent_search_is_linear() {
        let mut b = Builder::new();
        let mut g = b.var("X");
        for _ in 0..64 {
            g = b.mul(g, g);
        }
        let c = b.finish(g).unwrap();
        let m = Monomial::from_pairs([(Var::new("X"), BigUint::one() << 64u32)]);
        let r = exists_type_for_monomial(&c, &m, &Budget::default()).unwrap();
        assert!(r.witness.is_some());
        assert!(r.nodes < 1000);
        let m2 = Monomial::from_pairs([(Var::new("X"), (BigUint::one() << 64u32) - 1u32)]);
        assert!(exists_type_for_monomial(&c, &m2, &Budget::default())
            .unwrap()
            .witness
            .is_none());
    }
}
