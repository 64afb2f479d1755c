//! N-queens feasibility.
//!
//! Variable `q_{x,y}` has index `x·n + y`. Every line of the board carrying
//! at least two squares gets a zero-or-one set: the `n` lines of fixed `x`,
//! the `n` lines of fixed `y`, then the diagonals of fixed `y − x` and the
//! anti-diagonals of fixed `x + y`. That is `6(n−1)` sets.

use crate::model::{Assignment, ConstraintSet, CspInstance, ModelError, VarId};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueensInstance {
    pub n: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueensError {
    #[error("board size must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("queens at ({0}, {1}) and ({2}, {3}) attack each other")]
    Attack(usize, usize, usize, usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Squares of every constrained line, in set order.
fn lines(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for x in 0..n {
        out.push((0..n).map(|y| (x, y)).collect());
    }
    for y in 0..n {
        out.push((0..n).map(|x| (x, y)).collect());
    }
    let n = n as i64;
    let diag = |d: i64| -> Vec<(usize, usize)> {
        (0..n).filter(|x| (0..n).contains(&(x + d))).map(|x| (x as usize, (x + d) as usize)).collect()
    };
    let anti = |s: i64| -> Vec<(usize, usize)> {
        (0..n).filter(|x| (0..n).contains(&(s - x))).map(|x| (x as usize, (s - x) as usize)).collect()
    };
    for d in (0..=n - 2).chain((1..=n - 2).map(|d| -d)) {
        out.push(diag(d));
    }
    for s in (n - 1..=2 * n - 3).chain((1..=n - 2).rev()) {
        out.push(anti(s));
    }
    out
}

pub fn var_label(x: usize, y: usize) -> String {
    format!("q_{{{x},{y}}}")
}

pub fn encode_queens(inst: &QueensInstance) -> Result<CspInstance, QueensError> {
    let n = inst.n;
    if n < 2 {
        return Err(QueensError::TooSmall(n));
    }
    let labels = (0..n * n).map(|i| var_label(i / n, i % n)).collect();
    let constraints = lines(n)
        .into_iter()
        .enumerate()
        .map(|(k, sq)| {
            let mut vars: Vec<VarId> = sq.iter().map(|&(x, y)| VarId(x * n + y)).collect();
            vars.sort_unstable();
            ConstraintSet {
                label: format!("Y{}", k + 1),
                vars,
                has_dummy: true,
            }
        })
        .collect();
    Ok(CspInstance::new(labels, constraints)?)
}

/// Queen positions `(x, y)`, checked pairwise for attacks.
pub fn decode_queens(inst: &QueensInstance, a: &Assignment) -> Result<Vec<(usize, usize)>, QueensError> {
    let n = inst.n;
    if a.bits.len() != n * n {
        return Err(ModelError::DomainMismatch {
            expected: n * n,
            got: a.bits.len(),
        }
        .into());
    }
    let q: Vec<(usize, usize)> = (0..n * n).filter(|&i| a.bits[i]).map(|i| (i / n, i % n)).collect();
    for (i, &(x1, y1)) in q.iter().enumerate() {
        for &(x2, y2) in &q[i + 1..] {
            if x1 == x2 || y1 == y2 || x1.abs_diff(x2) == y1.abs_diff(y2) {
                return Err(QueensError::Attack(x1, y1, x2, y2));
            }
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(csp: &CspInstance) -> Vec<Vec<usize>> {
        csp.constraints().iter().map(|c| c.vars.iter().map(|v| v.0).collect()).collect()
    }

    #[test]
    fn four_by_four_sets() {
        let csp = encode_queens(&QueensInstance { n: 4 }).unwrap();
        assert_eq!(csp.num_vars(), 16);
        let r = rows(&csp);
        assert_eq!(r.len(), 18);
        assert_eq!(r[0], [0, 1, 2, 3]);
        assert_eq!(r[4], [0, 4, 8, 12]);
        assert_eq!(r[8], [0, 5, 10, 15]);
        assert_eq!(r[10], [2, 7]);
        assert_eq!(r[11], [4, 9, 14]);
        assert_eq!(r[13], [3, 6, 9, 12]);
        assert_eq!(r[15], [11, 14]);
        assert_eq!(r[17], [1, 4]);
        assert!(csp.constraints().iter().all(|c| c.has_dummy));
    }

    #[test]
    fn set_counts() {
        for n in 2..=10 {
            let csp = encode_queens(&QueensInstance { n }).unwrap();
            assert_eq!(csp.constraints().len(), 6 * (n - 1));
        }
        assert_eq!(encode_queens(&QueensInstance { n: 1 }), Err(QueensError::TooSmall(1)));
    }

    #[test]
    fn decoding() {
        let inst = QueensInstance { n: 4 };
        let mut bits = vec![false; 16];
        for (x, y) in [(0, 2), (1, 0), (2, 3), (3, 1)] {
            bits[x * 4 + y] = true;
        }
        let q = decode_queens(&inst, &Assignment::from_bits(bits, 18)).unwrap();
        assert_eq!(q, vec![(0, 2), (1, 0), (2, 3), (3, 1)]);
        assert_eq!(decode_queens(&inst, &Assignment::from_bits(vec![false; 16], 18)).unwrap(), vec![]);
        let mut bad = vec![false; 16];
        bad[0] = true;
        bad[5] = true;
        assert_eq!(
            decode_queens(&inst, &Assignment::from_bits(bad, 18)),
            Err(QueensError::Attack(0, 0, 1, 1))
        );
    }
}
