//! Dense exact simplex over rationals (Bland's rule), sized for the
//! fractional-colouring programs of desk-scale graphs.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub(crate) struct LpSolution {
    pub value: BigRational,
    /// Primal optimum of `max cᵀx, Ax ≤ b, x ≥ 0`.
    pub x: Vec<BigRational>,
    /// Dual optimum (one entry per row of `A`).
    pub y: Vec<BigRational>,
}

/// Solves `max cᵀx` subject to `Ax ≤ b`, `x ≥ 0`, with `b ≥ 0` so the slack
/// basis is feasible.
pub(crate) fn maximize(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    if b.iter().any(|v| v.is_negative()) {
        return Err(Error::InvalidInput("simplex needs b >= 0".into()));
    }
    let width = n + m + 1;
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let mut row = vec![BigRational::zero(); width];
        row[..n].clone_from_slice(&a[i]);
        row[n + i] = BigRational::one();
        row[width - 1] = b[i].clone();
        t.push(row);
    }
    let mut obj = vec![BigRational::zero(); width];
    for j in 0..n {
        obj[j] = -c[j].clone();
    }
    t.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();

    while let Some(enter) = (0..n + m).find(|&j| t[m][j].is_negative()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let r = &t[i][width - 1] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => r < *lr || (r == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, r));
                }
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::Verification("linear program is unbounded".into()));
        };
        let piv = t[row][enter].clone();
        for v in t[row].iter_mut() {
            *v = &*v / &piv;
        }
        let pivot_row = t[row].clone();
        for (i, r) in t.iter_mut().enumerate() {
            if i == row || r[enter].is_zero() {
                continue;
            }
            let f = r[enter].clone();
            for (v, p) in r.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        basis[row] = enter;
    }

    let mut x = vec![BigRational::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i][width - 1].clone();
        }
    }
    let y = (0..m).map(|i| t[m][n + i].clone()).collect();
    Ok(LpSolution { value: t[m][width - 1].clone(), x, y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    #[test]
    fn textbook_program() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6).
        let a = vec![vec![int(1), int(0)], vec![int(0), int(2)], vec![int(3), int(2)]];
        let s = maximize(&a, &[int(4), int(12), int(18)], &[int(3), int(5)]).unwrap();
        assert_eq!(s.value, int(36));
        assert_eq!(s.x, vec![int(2), int(6)]);
        // Strong duality.
        let dual: BigRational = s.y.iter().zip([4, 12, 18]).map(|(y, b)| y * int(b)).sum();
        assert_eq!(dual, int(36));
        assert_eq!(s.y, vec![int(0), ratio(3, 2), int(1)]);
    }

    #[test]
    fn unbounded_is_reported() {
        let a = vec![vec![int(-1)]];
        assert!(maximize(&a, &[int(1)], &[int(1)]).is_err());
    }
}
