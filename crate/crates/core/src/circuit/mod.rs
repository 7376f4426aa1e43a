//! Arithmetic circuits as gate lists in topological order.
//!
//! Every child index is strictly smaller than its parent's, so the graph is
//! acyclic by construction and "topological order" is simply index order.
//! The output gate is the unique sink: [`Builder::finish`] prunes anything
//! the output does not reach.

mod analyze;
mod builder;
mod netlist;
mod transform;

pub use analyze::{analyze, is_mult_disjoint, min_degrees, syntactic_degrees, CircuitStats, SyntacticDegree};
pub use builder::Builder;
pub use netlist::parse_circuit;
pub use transform::{monomial_circuit, power, product, scalar, substitute, sum, Binding};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::poly::Var;

pub type GateId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarId(pub u32);

/// Input constants. `One` is what monotone circuits use; general circuits may
/// use either.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constant {
    NegOne,
    One,
}

impl Constant {
    pub fn value(self) -> i64 {
        match self {
            Constant::NegOne => -1,
            Constant::One => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Gate {
    Var(VarId),
    Const(Constant),
    Add(Vec<GateId>),
    Mul(Vec<GateId>),
}

impl Gate {
    pub fn children(&self) -> &[GateId] {
        match self {
            Gate::Add(c) | Gate::Mul(c) => c,
            _ => &[],
        }
    }

    pub fn is_input(&self) -> bool {
        matches!(self, Gate::Var(_) | Gate::Const(_))
    }
}

/// A wire from `from` (child) into slot `slot` of `to` (parent). Edge ids run
/// over parents in gate order, then over slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub id: usize,
    pub from: GateId,
    pub to: GateId,
    pub slot: usize,
}

#[derive(Debug, Clone)]
pub struct Circuit {
    gates: Vec<Gate>,
    output: GateId,
    vars: Vec<Var>,
    unbounded_fanin: bool,
    labels: Vec<Option<String>>,
}

/// Structural identity: gate lists, output, variables and fanin mode. Source
/// labels are diagnostics only.
impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.gates == other.gates
            && self.output == other.output
            && self.vars == other.vars
            && self.unbounded_fanin == other.unbounded_fanin
    }
}

impl Eq for Circuit {}

impl Circuit {
    /// Validates and assembles a circuit from raw parts.
    pub fn from_parts(
        gates: Vec<Gate>,
        output: GateId,
        vars: Vec<Var>,
        unbounded_fanin: bool,
        labels: Vec<Option<String>>,
    ) -> Result<Circuit> {
        if gates.is_empty() {
            return Err(Error::InvalidCircuit("no gates".into()));
        }
        if output != gates.len() - 1 {
            return Err(Error::InvalidCircuit("the output must be the last gate".into()));
        }
        let mut fanout = vec![0usize; gates.len()];
        for (i, g) in gates.iter().enumerate() {
            match g {
                Gate::Var(v) => {
                    if v.0 as usize >= vars.len() {
                        return Err(Error::InvalidCircuit(format!("gate {i}: bad variable id")));
                    }
                }
                Gate::Const(_) => {}
                Gate::Add(ch) | Gate::Mul(ch) => {
                    if ch.len() < 2 {
                        return Err(Error::InvalidCircuit(format!("gate {i}: fanin below 2")));
                    }
                    if ch.len() > 2 && !unbounded_fanin {
                        return Err(Error::InvalidCircuit(format!(
                            "gate {i}: fanin {} without the unbounded-fanin flag",
                            ch.len()
                        )));
                    }
                    for &c in ch {
                        if c >= i {
                            return Err(Error::InvalidCircuit(format!(
                                "gate {i}: child {c} is not earlier in topological order"
                            )));
                        }
                        fanout[c] += 1;
                    }
                }
            }
        }
        let sinks: Vec<usize> = (0..gates.len()).filter(|&i| fanout[i] == 0).collect();
        if sinks.len() != 1 {
            return Err(Error::MultipleSinks(format!("{sinks:?}")));
        }
        let labels = if labels.len() == gates.len() {
            labels
        } else {
            vec![None; gates.len()]
        };
        Ok(Circuit {
            gates,
            output,
            vars,
            unbounded_fanin,
            labels,
        })
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id]
    }

    pub fn output(&self) -> GateId {
        self.output
    }

    /// Number of gates.
    pub fn size(&self) -> usize {
        self.gates.len()
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Var {
        &self.vars[id.0 as usize]
    }

    pub fn var_names(&self) -> Vec<String> {
        self.vars.iter().map(|v| v.to_string()).collect()
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.vars
            .iter()
            .position(|v| v.as_str() == name)
            .map(|i| VarId(i as u32))
    }

    pub fn has_var(&self, name: &str) -> bool {
        self.var_id(name).is_some()
    }

    pub fn is_unbounded_fanin(&self) -> bool {
        self.unbounded_fanin
    }

    pub fn label(&self, id: GateId) -> Option<&str> {
        self.labels[id].as_deref()
    }

    pub fn edge_count(&self) -> usize {
        self.gates.iter().map(|g| g.children().len()).sum()
    }

    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (to, g) in self.gates.iter().enumerate() {
            for (slot, &from) in g.children().iter().enumerate() {
                out.push(Edge {
                    id: out.len(),
                    from,
                    to,
                    slot,
                });
            }
        }
        out
    }

    /// Edge ids of each gate's incoming wires, by slot.
    pub fn in_edges(&self) -> Vec<Vec<usize>> {
        let mut next = 0;
        self.gates
            .iter()
            .map(|g| {
                let ids: Vec<usize> = (next..next + g.children().len()).collect();
                next += g.children().len();
                ids
            })
            .collect()
    }

    /// Edge ids of each gate's outgoing wires.
    pub fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.gates.len()];
        for e in self.edges() {
            out[e.from].push(e.id);
        }
        out
    }

    pub fn is_monotone(&self) -> bool {
        !self.gates.iter().any(|g| matches!(g, Gate::Const(Constant::NegOne)))
    }

    /// Names that do not clash with this circuit's variables: `{prefix}{i}`
    /// for `i` in `start..start+count`, with trailing underscores appended on
    /// collision.
    pub fn fresh_names(&self, prefix: &str, start: usize, count: usize) -> Vec<String> {
        (start..start + count)
            .map(|i| {
                let mut name = format!("{prefix}{i}");
                while self.has_var(&name) {
                    name.push('_');
                }
                name
            })
            .collect()
    }

    /// Canonical netlist text: one statement per line in topological order.
    pub fn to_netlist(&self) -> String {
        let use_labels = self.labels.iter().all(|l| l.is_some()) && {
            let mut seen = std::collections::HashSet::new();
            self.labels.iter().all(|l| seen.insert(l.as_deref()))
        };
        let name = |i: usize| -> String {
            if use_labels {
                self.labels[i].clone().unwrap_or_default()
            } else {
                format!("g{i}")
            }
        };
        let mut s = String::new();
        for (i, g) in self.gates.iter().enumerate() {
            let rhs = match g {
                Gate::Var(v) => format!("var {}", self.var(*v)),
                Gate::Const(c) => format!("const {}", c.value()),
                Gate::Add(ch) | Gate::Mul(ch) => {
                    let op = if matches!(g, Gate::Add(_)) { "add" } else { "mul" };
                    let args: Vec<String> = ch.iter().map(|&c| name(c)).collect();
                    format!("{op} {}", args.join(" "))
                }
            };
            s.push_str(&format!("{} = {rhs}\n", name(i)));
        }
        s.push_str(&format!("out {}\n", name(self.output)));
        s
    }

    /// Number of variable-labelled input gates per variable.
    pub fn var_occurrences(&self) -> HashMap<VarId, usize> {
        let mut m = HashMap::new();
        for g in &self.gates {
            if let Gate::Var(v) = g {
                *m.entry(*v).or_insert(0) += 1;
            }
        }
        m
    }
}

impl std::fmt::Display for Circuit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_netlist())
    }
}
