//! Netlist text format.
//!
//! ```text
//! # comment
//! g1 = var X1
//! g2 = const -1        # also `1`, and `0` as sugar for (-1)+1
//! g3 = add g1 g2       # `add`/`mul` take two or more operands
//! out g3
//! ```
//!
//! Statements are separated by newlines or `;`. Operands may be defined later
//! in the file; the parser sorts gates topologically.

use std::collections::HashMap;

use super::{Circuit, Constant, Gate, GateId, VarId};
use crate::error::{Error, Result};
use crate::poly::Var;

#[derive(Debug)]
enum Rhs {
    Var(String),
    Const(i8),
    Add(Vec<String>),
    Mul(Vec<String>),
}

#[derive(Debug)]
struct Stmt {
    line: usize,
    name: String,
    rhs: Rhs,
}

fn statements(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().flat_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("");
        line.split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(move |s| (i + 1, s))
    })
}

enum Line {
    Gate(Stmt),
    Out(String),
}

fn parse_stmt(line: usize, s: &str) -> Result<Line> {
    let syntax = |msg: String| Error::Syntax { line, msg };
    if let Some(rest) = s.strip_prefix("out") {
        if rest.is_empty() || rest.starts_with(char::is_whitespace) {
            let target = rest.trim();
            if target.is_empty() || target.contains(char::is_whitespace) {
                return Err(syntax("`out` takes exactly one gate".into()));
            }
            return Ok(Line::Out(target.to_string()));
        }
    }
    let (lhs, rhs) = s
        .split_once('=')
        .ok_or_else(|| syntax(format!("expected `<id> = ...`, found `{s}`")))?;
    let name = lhs.trim();
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(syntax(format!("bad gate identifier `{name}`")));
    }
    let mut words = rhs.split_whitespace();
    let op = words.next().ok_or_else(|| syntax("missing gate kind".into()))?;
    let args: Vec<String> = words.map(str::to_string).collect();
    let rhs = match op {
        "var" => match args.as_slice() {
            [v] => Rhs::Var(v.clone()),
            _ => return Err(syntax("`var` takes one variable name".into())),
        },
        "const" => match args.as_slice() {
            [v] => match v.as_str() {
                "-1" => Rhs::Const(-1),
                "1" | "+1" => Rhs::Const(1),
                "0" => Rhs::Const(0),
                other => return Err(syntax(format!("constant must be -1, 1 or 0, found `{other}`"))),
            },
            _ => return Err(syntax("`const` takes one value".into())),
        },
        "add" | "mul" => {
            if args.len() < 2 {
                return Err(syntax(format!("`{op}` needs at least two operands")));
            }
            if op == "add" {
                Rhs::Add(args)
            } else {
                Rhs::Mul(args)
            }
        }
        other => return Err(syntax(format!("unknown gate kind `{other}`"))),
    };
    Ok(Line::Gate(Stmt {
        line,
        name: name.to_string(),
        rhs,
    }))
}

/// Parses netlist text into a validated circuit.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut stmts: Vec<Stmt> = Vec::new();
    let mut out: Option<(usize, String)> = None;
    for (line, s) in statements(text) {
        match parse_stmt(line, s)? {
            Line::Out(t) => {
                if out.is_some() {
                    return Err(Error::Syntax {
                        line,
                        msg: "more than one `out` statement".into(),
                    });
                }
                out = Some((line, t));
            }
            Line::Gate(st) => stmts.push(st),
        }
    }
    let (out_line, out_name) = out.ok_or(Error::MissingOutput)?;
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, st) in stmts.iter().enumerate() {
        if index.insert(st.name.as_str(), i).is_some() {
            return Err(Error::DuplicateGate {
                line: st.line,
                name: st.name.clone(),
            });
        }
    }
    let lookup = |line: usize, name: &str| -> Result<usize> {
        index.get(name).copied().ok_or_else(|| Error::UndefinedGate {
            line,
            name: name.to_string(),
        })
    };
    let children: Vec<Vec<usize>> = stmts
        .iter()
        .map(|st| match &st.rhs {
            Rhs::Add(a) | Rhs::Mul(a) => a.iter().map(|n| lookup(st.line, n)).collect(),
            _ => Ok(Vec::new()),
        })
        .collect::<Result<_>>()?;
    let root = lookup(out_line, &out_name)?;

    // Iterative DFS post-order from the output; grey nodes detect cycles.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let mut mark = vec![Mark::White; stmts.len()];
    let mut order = Vec::with_capacity(stmts.len());
    let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
    mark[root] = Mark::Grey;
    while let Some((node, next)) = stack.pop() {
        if next < children[node].len() {
            stack.push((node, next + 1));
            let c = children[node][next];
            match mark[c] {
                Mark::White => {
                    mark[c] = Mark::Grey;
                    stack.push((c, 0));
                }
                Mark::Grey => return Err(Error::Cycle(stmts[c].name.clone())),
                Mark::Black => {}
            }
        } else {
            mark[node] = Mark::Black;
            order.push(node);
        }
    }
    // Cycles among gates the output cannot reach are still cycles.
    if order.len() != stmts.len() {
        if let Some(name) = find_cycle(&children) {
            return Err(Error::Cycle(stmts[name].name.clone()));
        }
        let extra: Vec<&str> = (0..stmts.len())
            .filter(|&i| mark[i] == Mark::White)
            .map(|i| stmts[i].name.as_str())
            .collect();
        return Err(Error::MultipleSinks(format!(
            "gates not feeding `{out_name}`: {}",
            extra.join(", ")
        )));
    }

    // Files that are already in topological order keep their order, so that
    // printing and re-parsing is the identity.
    let backward = children.iter().enumerate().all(|(i, ch)| ch.iter().all(|&c| c < i));
    if backward {
        order = (0..stmts.len()).collect();
    }

    let mut gates: Vec<Gate> = Vec::with_capacity(order.len() + 2);
    let mut labels: Vec<Option<String>> = Vec::with_capacity(order.len() + 2);
    let mut vars: Vec<Var> = Vec::new();
    let mut var_ids: HashMap<String, VarId> = HashMap::new();
    let mut pos: Vec<GateId> = vec![0; stmts.len()];
    for &i in &order {
        let st = &stmts[i];
        let gate = match &st.rhs {
            Rhs::Var(v) => {
                let id = *var_ids.entry(v.clone()).or_insert_with(|| {
                    vars.push(Var::new(v));
                    VarId(vars.len() as u32 - 1)
                });
                Gate::Var(id)
            }
            Rhs::Const(-1) => Gate::Const(Constant::NegOne),
            Rhs::Const(1) => Gate::Const(Constant::One),
            Rhs::Const(_) => {
                gates.push(Gate::Const(Constant::NegOne));
                labels.push(None);
                gates.push(Gate::Const(Constant::One));
                labels.push(None);
                let n = gates.len();
                Gate::Add(vec![n - 2, n - 1])
            }
            Rhs::Add(_) => Gate::Add(children[i].iter().map(|&c| pos[c]).collect()),
            Rhs::Mul(_) => Gate::Mul(children[i].iter().map(|&c| pos[c]).collect()),
        };
        pos[i] = gates.len();
        gates.push(gate);
        labels.push(Some(st.name.clone()));
    }
    let unbounded = gates.iter().any(|g| g.children().len() > 2);
    let output = gates.len() - 1;
    Circuit::from_parts(gates, output, vars, unbounded, labels)
}

fn find_cycle(children: &[Vec<usize>]) -> Option<usize> {
    let n = children.len();
    let mut state = vec![0u8; n];
    for s in 0..n {
        if state[s] != 0 {
            continue;
        }
        let mut stack = vec![(s, 0usize)];
        state[s] = 1;
        while let Some((v, k)) = stack.pop() {
            if k < children[v].len() {
                stack.push((v, k + 1));
                let c = children[v][k];
                if state[c] == 1 {
                    return Some(c);
                }
                if state[c] == 0 {
                    state[c] = 1;
                    stack.push((c, 0));
                }
            } else {
                state[v] = 2;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::analyze;
    use crate::poly::{expand, Polynomial};
    use crate::Budget;

    fn poly(c: &Circuit) -> Polynomial {
        expand(c, &Budget::default()).unwrap()
    }

    #[test]
    fn parses_inline_statements() {
        let c = parse_circuit("g1=var X1; g2=const -1; g3=add g1 g2; out g3").unwrap();
        assert_eq!(poly(&c), "X1 - 1".parse().unwrap());
    }

    #[test]
    fn square_is_not_mult_disjoint() {
        let c = parse_circuit("g1=var X1; g2=mul g1 g1; out g2").unwrap();
        assert_eq!(poly(&c), "X1^2".parse().unwrap());
        assert!(!analyze(&c).is_mult_disjoint);
    }

    #[test]
    fn forward_references_and_errors() {
        let c = parse_circuit("out s\ns = add a b\na = var X\nb = const 1\n").unwrap();
        assert_eq!(poly(&c), "X + 1".parse().unwrap());

        assert!(matches!(
            parse_circuit("g1=add g2 g1; g2=var X; out g1"),
            Err(Error::Cycle(_))
        ));
        assert!(matches!(
            parse_circuit("g1=var X; g2=add g1 g9; out g2"),
            Err(Error::UndefinedGate { .. })
        ));
        assert!(matches!(
            parse_circuit("g1=var X; g2=var Y; out g1"),
            Err(Error::MultipleSinks(_))
        ));
        assert!(matches!(
            parse_circuit("g1=var X\ng2=frob g1\nout g2"),
            Err(Error::Syntax { line: 2, .. })
        ));
        assert!(matches!(parse_circuit("g1=var X"), Err(Error::MissingOutput)));
        assert!(matches!(
            parse_circuit("g1=var X; g2=add g1; out g2"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn const_zero_is_sugar() {
        let c = parse_circuit("x = var X\nz = const 0\np = mul x z\nout p").unwrap();
        assert!(poly(&c).is_zero());
        assert!(!c.is_monotone());
    }

    #[test]
    fn unbounded_fanin_is_flagged() {
        let c = parse_circuit("a=var X; b=var Y; c=var Z; s=add a b c; out s").unwrap();
        assert!(c.is_unbounded_fanin());
    }

    #[test]
    fn print_parse_round_trip() {
        let src = "# test\nx = var X\ny = var Y\none = const 1\ns = add x one\np = mul s y s\nout p\n";
        let c = parse_circuit(src).unwrap();
        let again = parse_circuit(&c.to_netlist()).unwrap();
        assert_eq!(c, again);
        let z = parse_circuit("z = const 0; x = var X; m = mul x z; out m").unwrap();
        assert_eq!(parse_circuit(&z.to_netlist()).unwrap(), z);
    }
}
