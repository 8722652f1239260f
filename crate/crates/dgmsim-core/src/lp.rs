//! A small dense-tableau simplex solver.
//!
//! Solves `max c.x  s.t.  A x <= rhs, x >= 0` with `rhs >= 0`, which is the
//! shape of every program produced by the measure distances: the slack basis
//! is immediately feasible and no phase-1 is needed. Problems here are dense
//! and small (a few thousand rows at most), so a tableau beats the setup cost
//! of anything fancier.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LpError {
    #[error("objective is unbounded above")]
    Unbounded,
    #[error("right-hand side must be nonnegative (row {0})")]
    NegativeRhs(usize),
    #[error("iteration limit exceeded ({0} pivots)")]
    IterationLimit(usize),
    #[error("numerical trouble: solution violates row {row} by {violation:.3e}")]
    Numerics { row: usize, violation: f64 },
}

/// One row `sum_j coeffs_j * x_j <= rhs` with sparse coefficients.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;

/// Maximize `objective . x` subject to the constraints and `x >= 0`.
pub fn maximize(
    num_vars: usize,
    objective: &[f64],
    constraints: &[Constraint],
) -> Result<LpSolution, LpError> {
    assert_eq!(objective.len(), num_vars);
    let m = constraints.len();
    let ncols = num_vars + m + 1; // structural + slack + rhs
    let rhs_col = num_vars + m;

    let mut tab = vec![0.0f64; m * ncols];
    for (i, c) in constraints.iter().enumerate() {
        if c.rhs < 0.0 {
            return Err(LpError::NegativeRhs(i));
        }
        let row = &mut tab[i * ncols..(i + 1) * ncols];
        for &(j, a) in &c.coeffs {
            debug_assert!(j < num_vars);
            row[j] += a;
        }
        row[num_vars + i] = 1.0;
        row[rhs_col] = c.rhs;
    }

    // Reduced-cost row; slack basis means it starts as the objective itself.
    let mut zrow = vec![0.0f64; ncols];
    zrow[..num_vars].copy_from_slice(objective);

    let mut basis: Vec<usize> = (num_vars..num_vars + m).collect();
    let max_iters = 200 * (m + num_vars) + 20_000;
    let mut degenerate_streak = 0usize;
    let mut bland = false;

    for iter in 0..max_iters {
        // Entering column: Dantzig until degeneracy stalls, then Bland.
        let mut enter = None;
        if bland {
            for j in 0..num_vars + m {
                if zrow[j] > COST_TOL {
                    enter = Some(j);
                    break;
                }
            }
        } else {
            let mut best = COST_TOL;
            for j in 0..num_vars + m {
                if zrow[j] > best {
                    best = zrow[j];
                    enter = Some(j);
                }
            }
        }
        let Some(enter) = enter else {
            // Optimal. Audit feasibility against the original rows so that
            // accumulated pivot error cannot return a silently wrong value.
            let mut x = vec![0.0f64; num_vars];
            for (i, &b) in basis.iter().enumerate() {
                if b < num_vars {
                    x[b] = tab[i * ncols + rhs_col];
                }
            }
            for (row, c) in constraints.iter().enumerate() {
                let lhs: f64 = c.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
                let slack = c.rhs - lhs;
                if slack < -1e-7 * crate::float::abs(c.rhs).max(1.0) {
                    return Err(LpError::Numerics {
                        row,
                        violation: -slack,
                    });
                }
            }
            let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            return Ok(LpSolution { value, x });
        };

        // Ratio test. Among (near-)minimal ratios prefer the largest pivot
        // element, which keeps the tableau numerically sane; under Bland's
        // rule fall back to the smallest basis index for termination.
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            let a = tab[i * ncols + enter];
            if a > PIVOT_TOL {
                let ratio = tab[i * ncols + rhs_col] / a;
                if ratio < best_ratio {
                    best_ratio = ratio;
                }
            }
        }
        if best_ratio.is_infinite() {
            return Err(LpError::Unbounded);
        }
        let ratio_slack = 1e-9 * (1.0 + best_ratio);
        let mut leave: Option<usize> = None;
        for i in 0..m {
            let a = tab[i * ncols + enter];
            if a > PIVOT_TOL && tab[i * ncols + rhs_col] / a <= best_ratio + ratio_slack {
                let better = match leave {
                    None => true,
                    Some(l) => {
                        if bland {
                            basis[i] < basis[l]
                        } else {
                            a > tab[l * ncols + enter]
                        }
                    }
                };
                if better {
                    leave = Some(i);
                }
            }
        }
        let leave = leave.expect("some row attains the minimal ratio");

        if best_ratio < 1e-12 {
            degenerate_streak += 1;
            if degenerate_streak > 2 * (m + num_vars) {
                bland = true;
            }
        } else {
            degenerate_streak = 0;
        }

        pivot(&mut tab, &mut zrow, m, ncols, leave, enter);
        basis[leave] = enter;

        if iter + 1 == max_iters {
            return Err(LpError::IterationLimit(max_iters));
        }
    }
    Err(LpError::IterationLimit(max_iters))
}

fn pivot(tab: &mut [f64], zrow: &mut [f64], _m: usize, ncols: usize, r: usize, c: usize) {
    let p = tab[r * ncols + c];
    debug_assert!(p > PIVOT_TOL);
    let inv = 1.0 / p;
    for v in &mut tab[r * ncols..(r + 1) * ncols] {
        *v *= inv;
    }
    // Snap the pivot column exactly.
    tab[r * ncols + c] = 1.0;

    let (before, rest) = tab.split_at_mut(r * ncols);
    let (prow, after) = rest.split_at_mut(ncols);
    for (i, row) in before
        .chunks_exact_mut(ncols)
        .enumerate()
        .map(|(i, row)| (i, row))
        .chain(
            after
                .chunks_exact_mut(ncols)
                .enumerate()
                .map(|(i, row)| (i + r + 1, row)),
        )
    {
        let _ = i;
        let f = row[c];
        if f != 0.0 {
            for (v, pv) in row.iter_mut().zip(prow.iter()) {
                *v -= f * pv;
            }
            row[c] = 0.0;
        }
    }
    let f = zrow[c];
    if f != 0.0 {
        for (v, pv) in zrow.iter_mut().zip(prow.iter()) {
            *v -= f * pv;
        }
        zrow[c] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[(usize, f64)], rhs: f64) -> Constraint {
        Constraint {
            coeffs: coeffs.to_vec(),
            rhs,
        }
    }

    #[test]
    fn simple_two_var_program() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6
        let sol = maximize(
            2,
            &[1.0, 1.0],
            &[row(&[(0, 1.0), (1, 2.0)], 4.0), row(&[(0, 3.0), (1, 1.0)], 6.0)],
        )
        .unwrap();
        assert!((sol.value - 2.8).abs() < 1e-9, "value {}", sol.value);
        assert!((sol.x[0] - 1.6).abs() < 1e-9);
        assert!((sol.x[1] - 1.2).abs() < 1e-9);
    }

    #[test]
    fn detects_unbounded() {
        let err = maximize(1, &[1.0], &[row(&[(0, -1.0)], 1.0)]).unwrap_err();
        assert_eq!(err, LpError::Unbounded);
    }

    #[test]
    fn handles_degenerate_start() {
        // All-zero RHS rows force degenerate pivots at the origin.
        let sol = maximize(
            2,
            &[1.0, 0.5],
            &[
                row(&[(0, 1.0), (1, -1.0)], 0.0),
                row(&[(0, -1.0), (1, 1.0)], 0.0),
                row(&[(0, 1.0), (1, 1.0)], 2.0),
            ],
        )
        .unwrap();
        assert!((sol.value - 1.5).abs() < 1e-9);
    }

    #[test]
    fn two_dirac_bounded_lipschitz_program() {
        // Variables (g0, g1, b, L), atoms at distance 1:
        // max g0 - g1 - 0*b  s.t. g_k <= 2b, |g0-g1| <= L, b + L <= 1.
        let sol = maximize(
            4,
            &[1.0, -1.0, 0.0, 0.0],
            &[
                row(&[(0, 1.0), (2, -2.0)], 0.0),
                row(&[(1, 1.0), (2, -2.0)], 0.0),
                row(&[(0, 1.0), (1, -1.0), (3, -1.0)], 0.0),
                row(&[(1, 1.0), (0, -1.0), (3, -1.0)], 0.0),
                row(&[(2, 1.0), (3, 1.0)], 1.0),
            ],
        )
        .unwrap();
        assert!((sol.value - 2.0 / 3.0).abs() < 1e-9, "value {}", sol.value);
    }
}
