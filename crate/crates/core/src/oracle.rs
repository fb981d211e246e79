//! Independent check on the concave integral for tiny spaces.
//!
//! Solves the dual `min Σ y_x f(x)  s.t.  y(T) ≥ v(T) for all T ≠ ∅, y ≥ 0` by enumerating
//! every vertex: each choice of `n` tight constraints is solved by Gaussian elimination and
//! kept if feasible. Shares no code with the simplex.

use num_traits::{One, Zero};

use crate::capacity::Capacity;
use crate::error::{Error, Result};
use crate::integrals::SimpleFunction;
use crate::rational::Rational;

pub const ORACLE_MAX_N: usize = 4;

pub fn brute_force_cav_oracle(f: &SimpleFunction, v: &Capacity) -> Result<Rational> {
    let n = v.n();
    if n > ORACLE_MAX_N {
        return Err(Error::OracleTooLarge(n));
    }
    if f.space().n() != n {
        return Err(Error::SpaceMismatch { left: f.space().n(), right: n });
    }
    // Constraint rows (a, rhs) meaning a·y ≥ rhs.
    let mut rows: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for t in v.space().subsets().skip(1) {
        let a = (0..n).map(|k| if t.contains(k) { Rational::one() } else { Rational::zero() }).collect();
        rows.push((a, v.value(t).clone()));
    }
    for k in 0..n {
        let a = (0..n).map(|j| if j == k { Rational::one() } else { Rational::zero() }).collect();
        rows.push((a, Rational::zero()));
    }

    let mut best: Option<Rational> = None;
    for choice in combinations(rows.len(), n) {
        let system: Vec<&(Vec<Rational>, Rational)> = choice.iter().map(|&i| &rows[i]).collect();
        let Some(y) = solve(&system) else { continue };
        let feasible = rows.iter().all(|(a, rhs)| a.iter().zip(&y).map(|(p, q)| p * q).sum::<Rational>() >= *rhs);
        if !feasible {
            continue;
        }
        let objective: Rational = y.iter().zip(f.values()).map(|(p, q)| p * q).sum();
        if best.as_ref().is_none_or(|b| objective < *b) {
            best = Some(objective);
        }
    }
    best.ok_or_else(|| Error::Precondition("dual polyhedron has no vertex".into()))
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

/// Solves the square system `a·y = rhs` exactly; `None` when singular.
fn solve(system: &[&(Vec<Rational>, Rational)]) -> Option<Vec<Rational>> {
    let n = system.len();
    let mut m: Vec<Vec<Rational>> = system
        .iter()
        .map(|(a, rhs)| {
            let mut row = a.clone();
            row.push(rhs.clone());
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x /= &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (x, pv) in m[r].iter_mut().zip(&pivot_row) {
                    *x -= &factor * pv;
                }
            }
        }
    }
    let y: Vec<Rational> = m.into_iter().map(|row| row[n].clone()).collect();
    Some(y)
}
