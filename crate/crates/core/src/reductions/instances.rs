//! Combinatorial source instances and their text formats.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInstance(msg.into())
}

/// Lines with `#` comments stripped, blank lines skipped, numbered from 1.
fn content_lines(text: &str, comment: char) -> impl Iterator<Item = (usize, String)> + '_ {
    text.lines().enumerate().filter_map(move |(i, l)| {
        let l = match l.find(comment) {
            Some(k) => &l[..k],
            None => l,
        };
        let l = l.trim();
        (!l.is_empty()).then(|| (i + 1, l.to_string()))
    })
}

/// Square matrix with entries in {-1, 0, 1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignMatrix {
    n: usize,
    entries: Vec<i8>,
}

impl SignMatrix {
    pub fn new(rows: Vec<Vec<i8>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(bad(format!("row {} has {} entries, expected {n}", i + 1, r.len())));
            }
            for &a in r {
                if !(-1..=1).contains(&a) {
                    return Err(bad(format!("entry {a} outside {{-1, 0, 1}}")));
                }
            }
            entries.extend_from_slice(r);
        }
        Ok(SignMatrix { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        SignMatrix { n, entries }
    }

    pub fn ones(n: usize) -> Self {
        SignMatrix {
            n,
            entries: vec![1; n * n],
        }
    }

    /// Row-major entries; errors on a non-square length or bad entry.
    pub fn from_row_major(n: usize, entries: Vec<i8>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(bad("entry count is not n*n"));
        }
        Self::new(entries.chunks(n.max(1)).map(|r| r.to_vec()).take(n).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.n + j]
    }

    pub fn is_zero_one(&self) -> bool {
        self.entries.iter().all(|&a| a >= 0)
    }
}

impl FromStr for SignMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (ln, line) in content_lines(s, '#') {
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<i8>().map_err(|_| bad(format!("line {ln}: bad entry {t:?}"))))
                .collect::<Result<Vec<i8>>>()?;
            rows.push(row);
        }
        SignMatrix::new(rows)
    }
}

impl fmt::Display for SignMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format!("{:2}", self.get(i, j))).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    X,
    Y,
}

/// A literal over the `x` or `y` block; `index` is 0-based within its block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub block: Block,
    pub index: usize,
    pub positive: bool,
}

impl Literal {
    pub fn x(index: usize, positive: bool) -> Self {
        Literal {
            block: Block::X,
            index,
            positive,
        }
    }

    pub fn y(index: usize, positive: bool) -> Self {
        Literal {
            block: Block::Y,
            index,
            positive,
        }
    }

    pub fn holds(&self, x: &[bool], y: &[bool]) -> bool {
        let v = match self.block {
            Block::X => x[self.index],
            Block::Y => y[self.index],
        };
        v == self.positive
    }
}

/// CNF over two variable blocks `x` and `y`.
///
/// Text form is DIMACS with an extra `xy NX NY` line: variables `1..=NX`
/// form the `x` block and `NX+1..=NX+NY` the `y` block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreeCnf {
    pub nx: usize,
    pub ny: usize,
    pub clauses: Vec<Vec<Literal>>,
}

/// A CNF in normal form together with the padding that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedCnf {
    pub cnf: ThreeCnf,
    /// Dummy `x` variables added; counts over `x` scale by `2^x_pad`.
    pub x_pad: usize,
    /// Dummy `y` variables added; model counts scale by `2^y_pad`.
    pub y_pad: usize,
}

impl ThreeCnf {
    pub fn new(nx: usize, ny: usize, clauses: Vec<Vec<Literal>>) -> Result<Self> {
        for cl in &clauses {
            for l in cl {
                let bound = match l.block {
                    Block::X => nx,
                    Block::Y => ny,
                };
                if l.index >= bound {
                    return Err(bad(format!("literal {l:?} out of range")));
                }
            }
        }
        Ok(ThreeCnf { nx, ny, clauses })
    }

    pub fn satisfied(&self, x: &[bool], y: &[bool]) -> bool {
        self.clauses.iter().all(|cl| cl.iter().any(|l| l.holds(x, y)))
    }

    /// `|x| = |y|`, literals deduplicated, at most three per clause and no
    /// clause with both a variable and its negation.
    pub fn is_normal(&self) -> bool {
        self.nx == self.ny
            && self.clauses.iter().all(|cl| {
                cl.len() <= 3
                    && cl
                        .iter()
                        .enumerate()
                        .all(|(i, a)| cl[i + 1..].iter().all(|b| (a.block, a.index) != (b.block, b.index)))
            })
    }

    /// Deduplicates literals, rejects impure or overlong clauses, and pads
    /// the shorter block with unused variables.
    pub fn normalize(&self) -> Result<NormalizedCnf> {
        let mut clauses = Vec::with_capacity(self.clauses.len());
        for (j, cl) in self.clauses.iter().enumerate() {
            let mut lits = cl.clone();
            lits.sort();
            lits.dedup();
            for w in lits.windows(2) {
                if (w[0].block, w[0].index) == (w[1].block, w[1].index) {
                    return Err(bad(format!("clause {} contains a variable in both polarities", j + 1)));
                }
            }
            if lits.len() > 3 {
                return Err(bad(format!("clause {} has {} literals", j + 1, lits.len())));
            }
            clauses.push(lits);
        }
        let n = self.nx.max(self.ny);
        Ok(NormalizedCnf {
            cnf: ThreeCnf { nx: n, ny: n, clauses },
            x_pad: n - self.nx,
            y_pad: n - self.ny,
        })
    }
}

impl FromStr for ThreeCnf {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut blocks: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for (ln, line) in content_lines(s, '%') {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "c" => continue,
                "p" => {
                    if toks.len() != 4 || toks[1] != "cnf" {
                        return Err(bad(format!("line {ln}: expected `p cnf VARS CLAUSES`")));
                    }
                    let v = toks[2].parse().map_err(|_| bad(format!("line {ln}: bad count")))?;
                    let c = toks[3].parse().map_err(|_| bad(format!("line {ln}: bad count")))?;
                    header = Some((v, c));
                }
                "xy" => {
                    if toks.len() != 3 {
                        return Err(bad(format!("line {ln}: expected `xy NX NY`")));
                    }
                    let a = toks[1].parse().map_err(|_| bad(format!("line {ln}: bad count")))?;
                    let b = toks[2].parse().map_err(|_| bad(format!("line {ln}: bad count")))?;
                    blocks = Some((a, b));
                }
                _ => {
                    let (nx, ny) = blocks.ok_or_else(|| bad("missing `xy NX NY` line before clauses"))?;
                    for t in toks {
                        let v: i64 = t.parse().map_err(|_| bad(format!("line {ln}: bad literal {t:?}")))?;
                        if v == 0 {
                            clauses.push(std::mem::take(&mut current));
                            continue;
                        }
                        let idx = v.unsigned_abs() as usize;
                        let lit = if idx <= nx {
                            Literal::x(idx - 1, v > 0)
                        } else if idx <= nx + ny {
                            Literal::y(idx - nx - 1, v > 0)
                        } else {
                            return Err(bad(format!("line {ln}: variable {idx} out of range")));
                        };
                        current.push(lit);
                    }
                }
            }
        }
        if !current.is_empty() {
            return Err(bad("last clause is not terminated by 0"));
        }
        let (nx, ny) = blocks.ok_or_else(|| bad("missing `xy NX NY` line"))?;
        if let Some((v, c)) = header {
            if v != nx + ny {
                return Err(bad(format!("header declares {v} variables, blocks give {}", nx + ny)));
            }
            if c != clauses.len() {
                return Err(bad(format!("header declares {c} clauses, found {}", clauses.len())));
            }
        }
        ThreeCnf::new(nx, ny, clauses)
    }
}

impl fmt::Display for ThreeCnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p cnf {} {}", self.nx + self.ny, self.clauses.len())?;
        writeln!(f, "xy {} {}", self.nx, self.ny)?;
        for cl in &self.clauses {
            for l in cl {
                let v = match l.block {
                    Block::X => l.index + 1,
                    Block::Y => self.nx + l.index + 1,
                } as i64;
                write!(f, "{} ", if l.positive { v } else { -v })?;
            }
            writeln!(f, "0")?;
        }
        Ok(())
    }
}

/// Ground set `{1..n}` and a family of 3-subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCoverInstance {
    pub n: usize,
    pub sets: Vec<[usize; 3]>,
}

impl ExactCoverInstance {
    pub fn new(n: usize, sets: Vec<[usize; 3]>) -> Result<Self> {
        for s in &sets {
            if s.iter().any(|&e| e == 0 || e > n) {
                return Err(bad(format!("set {s:?} leaves 1..={n}")));
            }
            if s[0] == s[1] || s[0] == s[2] || s[1] == s[2] {
                return Err(bad(format!("set {s:?} has repeated elements")));
            }
        }
        Ok(ExactCoverInstance { n, sets })
    }
}

impl FromStr for ExactCoverInstance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = content_lines(s, '#');
        let (ln, first) = lines.next().ok_or_else(|| bad("empty instance"))?;
        let n = first
            .trim_start_matches('n')
            .trim()
            .parse()
            .map_err(|_| bad(format!("line {ln}: expected the ground set size")))?;
        let mut sets = Vec::new();
        for (ln, line) in lines {
            let v = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| bad(format!("line {ln}: bad element {t:?}")))
                })
                .collect::<Result<Vec<usize>>>()?;
            let set: [usize; 3] = v
                .try_into()
                .map_err(|_| bad(format!("line {ln}: a set needs exactly 3 elements")))?;
            sets.push(set);
        }
        ExactCoverInstance::new(n, sets)
    }
}

impl fmt::Display for ExactCoverInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for s in &self.sets {
            writeln!(f, "{} {} {}", s[0], s[1], s[2])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_text() {
        let m: SignMatrix = "# comment\n1 -1\n0 1\n".parse().unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.get(0, 1), -1);
        assert_eq!(m.to_string().parse::<SignMatrix>().unwrap(), m);
        assert!("1 2\n0 1".parse::<SignMatrix>().is_err());
        assert!("1 0\n0".parse::<SignMatrix>().is_err());
    }

    #[test]
    fn cnf_text_and_normal_form() {
        let f: ThreeCnf = "c demo\np cnf 3 2\nxy 1 2\n1 2 0\n-1 -3 2 2 0\n".parse().unwrap();
        assert_eq!((f.nx, f.ny), (1, 2));
        assert_eq!(f.clauses[0], vec![Literal::x(0, true), Literal::y(0, true)]);
        assert_eq!(f.to_string().parse::<ThreeCnf>().unwrap(), f);
        let n = f.normalize().unwrap();
        assert_eq!((n.cnf.nx, n.cnf.ny, n.x_pad, n.y_pad), (2, 2, 1, 0));
        assert_eq!(n.cnf.clauses[1].len(), 3);
        assert!(n.cnf.is_normal());

        let impure: ThreeCnf = "xy 1 1\n1 -1 0\n".parse().unwrap();
        assert!(impure.normalize().is_err());
        let long: ThreeCnf = "xy 2 2\n1 2 3 4 0\n".parse().unwrap();
        assert!(long.normalize().is_err());
        assert!("p cnf 2 1\n1 2 0\n".parse::<ThreeCnf>().is_err());
        assert!("xy 1 1\n1 3 0\n".parse::<ThreeCnf>().is_err());
        assert!("xy 1 1\n1 2\n".parse::<ThreeCnf>().is_err());
    }

    #[test]
    fn exact_cover_text() {
        let i: ExactCoverInstance = "6\n1 2 3\n4 5 6\n".parse().unwrap();
        assert_eq!(i.sets.len(), 2);
        assert_eq!(i.to_string().parse::<ExactCoverInstance>().unwrap(), i);
        assert!("3\n1 2 4\n".parse::<ExactCoverInstance>().is_err());
        assert!("3\n1 1 2\n".parse::<ExactCoverInstance>().is_err());
        assert!("3\n1 2\n".parse::<ExactCoverInstance>().is_err());
    }
}
