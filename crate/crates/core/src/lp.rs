//! Dense two-phase simplex for small standard-form programs
//! `min c·x  s.t.  A x = b, x >= 0`.
//!
//! Uses Bland's rule throughout, so it terminates on degenerate vertices
//! (martingale polytopes are degenerate more often than not).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

pub fn minimize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    debug_assert!(a.iter().all(|r| r.len() == n) && b.len() == m);

    // tableau: n structural + m artificial + rhs
    let width = n + m + 1;
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; width];
        for j in 0..n {
            row[j] = sign * a[i][j];
        }
        row[n + i] = 1.0;
        row[width - 1] = sign * b[i];
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let mut phase1_cost = vec![0.0; n + m];
    for v in phase1_cost.iter_mut().skip(n) {
        *v = 1.0;
    }
    run(&mut t, &mut basis, &phase1_cost, n + m)?;

    let infeas: f64 = basis
        .iter()
        .zip(&t)
        .filter(|(&j, _)| j >= n)
        .map(|(_, row)| row[width - 1])
        .sum();
    let bscale = b.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    if infeas > 1e-9 * bscale {
        return Err(Error::LpInfeasible);
    }

    // Drive remaining (zero-level) artificials out of the basis.
    let mut i = 0;
    while i < t.len() {
        if basis[i] >= n {
            match (0..n).find(|&j| t[i][j].abs() > 1e-9) {
                Some(j) => {
                    pivot(&mut t, i, j);
                    basis[i] = j;
                    i += 1;
                }
                None => {
                    // redundant constraint
                    t.remove(i);
                    basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }
    for row in t.iter_mut() {
        let rhs = row[width - 1];
        row.truncate(n);
        row.push(rhs);
    }

    run(&mut t, &mut basis, c, n)?;

    let mut x = vec![0.0; n];
    for (row, &j) in t.iter().zip(&basis) {
        x[j] = row[n].max(0.0);
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { x, objective })
}

pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let neg: Vec<f64> = c.iter().map(|v| -v).collect();
    let mut sol = minimize(&neg, a, b)?;
    sol.objective = -sol.objective;
    Ok(sol)
}

fn run(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], ncols: usize) -> Result<()> {
    let rhs = t.first().map_or(0, |r| r.len() - 1);
    let cscale = cost.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    for _ in 0..MAX_PIVOTS {
        let entering = (0..ncols).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let reduced = cost[j]
                - basis
                    .iter()
                    .zip(t.iter())
                    .map(|(&bj, row)| cost[bj] * row[j])
                    .sum::<f64>();
            reduced < -1e-10 * cscale
        });
        let Some(j) = entering else {
            return Ok(());
        };
        let mut leave: Option<(usize, f64)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[j] > PIVOT_TOL {
                let ratio = row[rhs] / row[j];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, r)) => {
                        if ratio < r - 1e-12 || (ratio <= r + 1e-12 && basis[i] < basis[k]) {
                            Some((i, ratio))
                        } else {
                            Some((k, r))
                        }
                    }
                };
            }
        }
        let Some((i, _)) = leave else {
            return Err(Error::LpUnbounded);
        };
        pivot(t, i, j);
        basis[i] = j;
    }
    Err(Error::NonConvergence("simplex pivot limit"))
}

fn pivot(t: &mut [Vec<f64>], r: usize, c: usize) {
    let p = t[r][c];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r {
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_program() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let c = [-1.0, -1.0, 0.0, 0.0];
        let a = vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]];
        let sol = minimize(&c, &a, &[4.0, 6.0]).unwrap();
        assert!((sol.objective + 2.8).abs() < 1e-12);
        assert!((sol.x[0] - 1.6).abs() < 1e-12 && (sol.x[1] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        // x1 + x2 = -1 with x >= 0
        let a = vec![vec![1.0, 1.0]];
        assert_eq!(minimize(&[1.0, 1.0], &a, &[-1.0]), Err(Error::LpInfeasible));
        // min -x1 s.t. x1 - x2 = 0
        let a = vec![vec![1.0, -1.0]];
        assert_eq!(minimize(&[-1.0, 0.0], &a, &[0.0]), Err(Error::LpUnbounded));
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let a = vec![
            vec![1.0, 1.0, 1.0],
            vec![2.0, 2.0, 2.0],
            vec![1.0, 0.0, -1.0],
        ];
        let sol = maximize(&[0.0, 1.0, 0.0], &a, &[1.0, 2.0, 0.0]).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-12);
    }
}
