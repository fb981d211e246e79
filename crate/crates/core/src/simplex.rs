//! Exact primal simplex for `max cᵀx  s.t.  Ax ≤ b, x ≥ 0` with `b ≥ 0`.
//!
//! The slack basis is feasible from the start, so no phase one is needed. Pivoting follows
//! Bland's rule, which rules out cycling on the degenerate vertices these covering problems
//! are full of. The dual solution is read off the slack columns of the final objective row.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub value: Rational,
    /// Optimal primal point, one entry per column of `A`.
    pub primal: Vec<Rational>,
    /// Optimal dual point, one entry per row of `A`.
    pub dual: Vec<Rational>,
    pub pivots: usize,
}

pub fn maximize(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> Result<LpSolution> {
    let m = a.len();
    let nv = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != nv) {
        return Err(Error::Precondition("inconsistent LP dimensions".into()));
    }
    if b.iter().any(|x| x.is_negative()) {
        return Err(Error::Precondition("right-hand side must be nonnegative".into()));
    }
    let width = nv + m;
    let mut rows: Vec<Vec<Rational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.resize(width, Rational::zero());
            r[nv + i] = Rational::from_integer(1.into());
            r
        })
        .collect();
    let mut rhs: Vec<Rational> = b.to_vec();
    let mut cost: Vec<Rational> = c.to_vec();
    cost.resize(width, Rational::zero());
    let mut objective = Rational::zero();
    let mut basis: Vec<usize> = (nv..width).collect();
    let mut pivots = 0;

    while let Some(enter) = (0..width).find(|&j| cost[j].is_positive()) {
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if !rows[i][enter].is_positive() {
                continue;
            }
            let ratio = &rhs[i] / &rows[i][enter];
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((r, _)) = leave else {
            return Err(Error::Unbounded);
        };

        let piv = rows[r][enter].clone();
        for x in rows[r].iter_mut() {
            if !x.is_zero() {
                *x /= &piv;
            }
        }
        rhs[r] /= &piv;
        let pivot_row = rows[r].clone();
        let pivot_rhs = rhs[r].clone();
        let nonzero: Vec<usize> = (0..width).filter(|&j| !pivot_row[j].is_zero()).collect();
        for i in 0..m {
            if i == r || rows[i][enter].is_zero() {
                continue;
            }
            let factor = rows[i][enter].clone();
            for &j in &nonzero {
                let delta = &factor * &pivot_row[j];
                rows[i][j] -= delta;
            }
            rhs[i] -= &factor * &pivot_rhs;
        }
        let factor = cost[enter].clone();
        for &j in &nonzero {
            let delta = &factor * &pivot_row[j];
            cost[j] -= delta;
        }
        objective += &factor * &pivot_rhs;
        basis[r] = enter;
        pivots += 1;
    }

    let mut primal = vec![Rational::zero(); nv];
    for (i, &j) in basis.iter().enumerate() {
        if j < nv {
            primal[j] = rhs[i].clone();
        }
    }
    let dual = (0..m).map(|i| -cost[nv + i].clone()).collect();
    Ok(LpSolution { value: objective, primal, dual, pivots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn textbook_problem() {
        // max 2x + 3y s.t. 2x + y ≤ 18, 6x + 5y ≤ 60, 2x + 5y ≤ 40 → 28 at (5, 6).
        let sol =
            maximize(&ints(&[2, 3]), &[ints(&[2, 1]), ints(&[6, 5]), ints(&[2, 5])], &ints(&[18, 60, 40])).unwrap();
        assert_eq!(sol.value, int(28));
        assert_eq!(sol.primal, ints(&[5, 6]));
        let dual_value: Rational = sol.dual.iter().zip(ints(&[18, 60, 40])).map(|(y, b)| y * b).sum();
        assert_eq!(dual_value, int(28));
        assert!(sol.dual.iter().all(|y| !y.is_negative()));
    }

    #[test]
    fn fractional_optimum() {
        // max x + y s.t. x + 2y ≤ 1, 2x + y ≤ 1 → 2/3.
        let sol = maximize(&ints(&[1, 1]), &[ints(&[1, 2]), ints(&[2, 1])], &ints(&[1, 1])).unwrap();
        assert_eq!(sol.value, ratio(2, 3));
        assert_eq!(sol.dual, vec![ratio(1, 3), ratio(1, 3)]);
    }

    #[test]
    fn unbounded_detected() {
        let err = maximize(&ints(&[1, 0]), &[ints(&[0, 1])], &ints(&[1])).unwrap_err();
        assert!(matches!(err, Error::Unbounded));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Zero right-hand sides force degenerate pivots.
        let sol =
            maximize(&ints(&[1, 1, 1]), &[ints(&[1, 1, 0]), ints(&[0, 1, 1]), ints(&[1, 0, 1])], &ints(&[0, 0, 2]))
                .unwrap();
        assert_eq!(sol.value, int(0));
        assert!(sol.primal.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn negative_rhs_rejected() {
        assert!(maximize(&ints(&[1]), &[ints(&[1])], &ints(&[-1])).is_err());
    }
}
