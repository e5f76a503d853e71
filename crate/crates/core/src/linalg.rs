//! Exact Gaussian elimination over big rationals, just enough to solve the
//! stationary-distribution and potential systems.

use alloc::vec::Vec;
use num_traits::Zero;

use crate::Rational;

/// Solves `rows · x = rhs` for the unique solution of a possibly
/// overdetermined system. Returns `None` when the system is inconsistent or
/// the solution is not unique.
pub fn solve_unique(
    mut rows: Vec<Vec<Rational>>,
    mut rhs: Vec<Rational>,
    nvars: usize,
) -> Option<Vec<Rational>> {
    debug_assert_eq!(rows.len(), rhs.len());
    debug_assert!(rows.iter().all(|r| r.len() == nvars));
    let m = rows.len();
    let mut pivot_row_of_col = alloc::vec![usize::MAX; nvars];
    let mut next_row = 0usize;
    for col in 0..nvars {
        let Some(p) = (next_row..m).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(next_row, p);
        rhs.swap(next_row, p);
        let inv = rows[next_row][col].recip();
        for c in col..nvars {
            let v = &rows[next_row][c] * &inv;
            rows[next_row][c] = v;
        }
        let v = &rhs[next_row] * &inv;
        rhs[next_row] = v;
        for r in 0..m {
            if r != next_row && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in col..nvars {
                    let v = &rows[r][c] - &factor * &rows[next_row][c];
                    rows[r][c] = v;
                }
                let v = &rhs[r] - &factor * &rhs[next_row];
                rhs[r] = v;
            }
        }
        pivot_row_of_col[col] = next_row;
        next_row += 1;
    }
    // Unique solution needs a pivot in every column.
    if pivot_row_of_col.iter().any(|&r| r == usize::MAX) {
        return None;
    }
    // Remaining rows must have collapsed to 0 = 0.
    for r in next_row..m {
        if !rhs[r].is_zero() {
            return None;
        }
    }
    Some(
        pivot_row_of_col
            .iter()
            .map(|&r| rhs[r].clone())
            .collect(),
    )
}
