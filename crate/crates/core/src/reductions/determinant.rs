//! Division-free determinant circuit (Berkowitz).
//!
//! For `A = [[a, R], [S, M]]` the characteristic-polynomial coefficients of
//! `A` are `T · v(M)`, where `T` is the lower-triangular Toeplitz matrix with
//! first column `(1, -a, -RS, -RMS, ..., -RM^{k-2}S)`. Folding this from the
//! bottom-right `1×1` block upwards uses only additions and multiplications.

use crate::circuit::{Builder, Circuit, GateId};
use crate::error::Result;

/// Variable name of entry `(i, j)` (0-based): `X{i+1}{j+1}`, with an
/// underscore between the indices once `n > 9`.
pub fn entry_name(i: usize, j: usize, n: usize) -> String {
    if n > 9 {
        format!("X{}_{}", i + 1, j + 1)
    } else {
        format!("X{}{}", i + 1, j + 1)
    }
}

/// Gate arithmetic where `None` is the zero polynomial.
struct Ops<'a> {
    b: &'a mut Builder,
}

impl Ops<'_> {
    fn add(&mut self, x: Option<GateId>, y: Option<GateId>) -> Option<GateId> {
        match (x, y) {
            (Some(x), Some(y)) => Some(self.b.add(x, y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    fn mul(&mut self, x: Option<GateId>, y: Option<GateId>) -> Option<GateId> {
        Some(self.b.mul(x?, y?))
    }

    fn neg(&mut self, x: Option<GateId>) -> Option<GateId> {
        let m = self.b.neg_one();
        self.mul(Some(m), x)
    }

    fn dot(&mut self, xs: &[Option<GateId>], ys: &[Option<GateId>]) -> Option<GateId> {
        let mut acc = None;
        for (x, y) in xs.iter().zip(ys) {
            let p = self.mul(*x, *y);
            acc = self.add(acc, p);
        }
        acc
    }
}

/// Circuit for `det` of the generic `n×n` matrix over variables
/// [`entry_name`]. `n = 0` gives the constant 1. Size is `O(n^4)`.
pub fn determinant_circuit(n: usize) -> Result<Circuit> {
    let mut b = Builder::new();
    if n == 0 {
        let one = b.one();
        return b.finish(one);
    }
    let a: Vec<Vec<GateId>> = (0..n)
        .map(|i| (0..n).map(|j| b.var(&entry_name(i, j, n))).collect())
        .collect();
    let mut ops = Ops { b: &mut b };
    let one = Some(ops.b.one());
    let last = Some(a[n - 1][n - 1]);
    // v[k] is the coefficient of λ^{size-k} in det(λI - B) for the current block B
    let mut v: Vec<Option<GateId>> = vec![one, ops.neg(last)];
    for k in (0..n - 1).rev() {
        let m = n - 1 - k;
        let mut t: Vec<Option<GateId>> = Vec::with_capacity(m + 2);
        t.push(None);
        t.push(ops.neg(Some(a[k][k])));
        let row: Vec<Option<GateId>> = (k + 1..n).map(|j| Some(a[k][j])).collect();
        let mut w: Vec<Option<GateId>> = (k + 1..n).map(|i| Some(a[i][k])).collect();
        for step in 0..m {
            let rw = ops.dot(&row, &w);
            t.push(ops.neg(rw));
            if step + 1 < m {
                w = (k + 1..n)
                    .map(|i| {
                        let r: Vec<Option<GateId>> = (k + 1..n).map(|j| Some(a[i][j])).collect();
                        ops.dot(&r, &w)
                    })
                    .collect();
            }
        }
        let mut next = Vec::with_capacity(m + 2);
        for r in 0..m + 2 {
            let mut acc = if r < v.len() { v[r] } else { None };
            for c in 0..r.min(v.len()) {
                let p = ops.mul(t[r - c], v[c]);
                acc = ops.add(acc, p);
            }
            next.push(acc);
        }
        v = next;
    }
    let top = v[n];
    let det = if n % 2 == 1 { ops.neg(top) } else { top };
    let out = match det {
        Some(g) => g,
        None => b.zero(),
    };
    b.finish(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{expand, Polynomial};
    use crate::reductions::oracles::leibniz_determinant;
    use crate::Budget;

    #[test]
    fn two_by_two() {
        let d = expand(&determinant_circuit(2).unwrap(), &Budget::default()).unwrap();
        assert_eq!(d, "X11*X22 - X12*X21".parse::<Polynomial>().unwrap());
    }

    #[test]
    fn matches_leibniz() {
        for n in 0..=4 {
            let d = expand(&determinant_circuit(n).unwrap(), &Budget::default()).unwrap();
            let expected = if n == 0 {
                Polynomial::constant(1)
            } else {
                leibniz_determinant(n).unwrap()
            };
            assert_eq!(d, expected, "n = {n}");
        }
    }

    #[test]
    fn names() {
        assert_eq!(entry_name(0, 1, 3), "X12");
        assert_eq!(entry_name(9, 0, 10), "X10_1");
    }
}
