//! Brute-force ground truth: permanents, model counts, exact covers and the
//! symbolic determinant.

use num_bigint::BigInt;

use super::determinant::entry_name;
use super::instances::{ExactCoverInstance, SignMatrix, ThreeCnf};
use crate::error::{Error, Result};
use crate::par;
use crate::poly::{Monomial, Polynomial, Var};

pub const MAX_RYSER_N: usize = 12;
pub const MAX_ENUM_Y: usize = 20;

/// Ryser's inclusion-exclusion formula,
/// `per(A) = (-1)^n Σ_S (-1)^|S| Π_i Σ_{j∈S} a_ij`.
pub fn permanent(a: &SignMatrix) -> Result<i128> {
    let n = a.n();
    if n > MAX_RYSER_N {
        return Err(Error::SizeGuard(format!(
            "Ryser permanent limited to n <= {MAX_RYSER_N}"
        )));
    }
    if n == 0 {
        return Ok(1);
    }
    let total = par::sum_range(
        1,
        1u64 << n,
        0i128,
        |s| {
            let mut prod: i128 = 1;
            for i in 0..n {
                let row: i128 = (0..n).filter(|&j| s >> j & 1 == 1).map(|j| a.get(i, j) as i128).sum();
                prod *= row;
                if prod == 0 {
                    break;
                }
            }
            if s.count_ones() % 2 == 1 {
                -prod
            } else {
                prod
            }
        },
        |x, y| x + y,
    );
    Ok(if n % 2 == 1 { -total } else { total })
}

fn assignment(bits: u64, len: usize) -> Vec<bool> {
    (0..len).map(|i| bits >> i & 1 == 1).collect()
}

/// Number of `y` assignments satisfying `F(alpha, y)`.
pub fn count_models(f: &ThreeCnf, alpha: &[bool]) -> Result<u64> {
    if f.ny > MAX_ENUM_Y {
        return Err(Error::SizeGuard(format!(
            "model enumeration limited to {MAX_ENUM_Y} y-variables"
        )));
    }
    if alpha.len() != f.nx {
        return Err(Error::InvalidArgument(format!(
            "assignment has {} values, x block has {}",
            alpha.len(),
            f.nx
        )));
    }
    Ok((0..1u64 << f.ny)
        .filter(|&b| f.satisfied(alpha, &assignment(b, f.ny)))
        .count() as u64)
}

/// Model counts for every `x` assignment, indexed by the assignment read as
/// a binary number with `x_1` least significant.
pub fn model_table(f: &ThreeCnf) -> Result<Vec<u64>> {
    if f.nx + f.ny > MAX_ENUM_Y {
        return Err(Error::SizeGuard(format!(
            "model enumeration limited to {MAX_ENUM_Y} variables"
        )));
    }
    par::map_range(1u64 << f.nx, |a| count_models(f, &assignment(a, f.nx)))
        .into_iter()
        .collect()
}

pub fn alpha_bits(a: u64, nx: usize) -> Vec<bool> {
    assignment(a, nx)
}

/// Backtracking on the smallest uncovered element.
pub fn has_exact_cover(inst: &ExactCoverInstance) -> bool {
    fn go(inst: &ExactCoverInstance, covered: &mut Vec<bool>) -> bool {
        let Some(e) = (1..=inst.n).find(|&e| !covered[e]) else {
            return true;
        };
        for s in &inst.sets {
            if s.contains(&e) && s.iter().all(|&x| !covered[x]) {
                for &x in s {
                    covered[x] = true;
                }
                let found = go(inst, covered);
                for &x in s {
                    covered[x] = false;
                }
                if found {
                    return true;
                }
            }
        }
        false
    }
    go(inst, &mut vec![false; inst.n + 1])
}

/// `det(X)` for the generic `n×n` matrix, by the Leibniz sum over all
/// permutations.
pub fn leibniz_determinant(n: usize) -> Result<Polynomial> {
    if n > 8 {
        return Err(Error::SizeGuard("Leibniz expansion limited to n <= 8".into()));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = Polynomial::zero();
    loop {
        let inversions = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| perm[i] > perm[j])
            .count();
        let sign = if inversions % 2 == 0 { 1 } else { -1 };
        let m = Monomial::from_pairs((0..n).map(|i| (Var::new(&entry_name(i, perm[i], n)), 1u32)));
        out.add_term(m, BigInt::from(sign));
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(out)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductions::instances::Literal;

    #[test]
    fn permanent_examples() {
        assert_eq!(permanent(&SignMatrix::identity(3)).unwrap(), 1);
        assert_eq!(permanent(&SignMatrix::ones(3)).unwrap(), 6);
        assert_eq!(permanent(&SignMatrix::ones(2)).unwrap(), 2);
        assert_eq!(permanent(&SignMatrix::identity(0)).unwrap(), 1);
        let m = SignMatrix::new(vec![vec![1, -1], vec![1, 1]]).unwrap();
        assert_eq!(permanent(&m).unwrap(), 0);
        assert!(permanent(&SignMatrix::ones(13)).is_err());
    }

    #[test]
    fn permanent_matches_permutation_sum() {
        let m = SignMatrix::new(vec![
            vec![1, 0, -1, 1],
            vec![1, 1, 0, -1],
            vec![0, 1, 1, 1],
            vec![-1, 1, 1, 0],
        ])
        .unwrap();
        let mut perm: Vec<usize> = (0..4).collect();
        let mut brute = 0i128;
        loop {
            brute += (0..4).map(|i| m.get(i, perm[i]) as i128).product::<i128>();
            if !next_permutation(&mut perm) {
                break;
            }
        }
        assert_eq!(permanent(&m).unwrap(), brute);
    }

    #[test]
    fn model_counts() {
        let f = ThreeCnf::new(1, 1, vec![vec![Literal::x(0, true), Literal::y(0, true)]]).unwrap();
        assert_eq!(count_models(&f, &[false]).unwrap(), 1);
        assert_eq!(count_models(&f, &[true]).unwrap(), 2);
        assert_eq!(model_table(&f).unwrap(), vec![1, 2]);
        let empty = ThreeCnf::new(1, 1, vec![vec![]]).unwrap();
        assert_eq!(model_table(&empty).unwrap(), vec![0, 0]);
    }

    #[test]
    fn exact_cover_examples() {
        assert!(has_exact_cover(&ExactCoverInstance::new(3, vec![[1, 2, 3]]).unwrap()));
        assert!(!has_exact_cover(
            &ExactCoverInstance::new(6, vec![[1, 2, 3], [1, 2, 4]]).unwrap()
        ));
        assert!(has_exact_cover(
            &ExactCoverInstance::new(6, vec![[1, 2, 3], [4, 5, 6]]).unwrap()
        ));
        assert!(has_exact_cover(&ExactCoverInstance::new(0, vec![]).unwrap()));
    }

    #[test]
    fn leibniz_small() {
        let d2 = leibniz_determinant(2).unwrap();
        assert_eq!(d2, "X11*X22 - X12*X21".parse().unwrap());
        assert_eq!(leibniz_determinant(4).unwrap().count_monomials(), 24);
    }
}
