use nalgebra::DMatrix;

use super::exact::Dyadic;
use crate::error::{Error, Result};
use crate::interp::InterpMatrix;

/// Largest order accepted by the cofactor oracle.
pub const MAX_ORACLE_N: usize = 10;

/// Determinant by cofactor expansion along the first row, recursively.
///
/// Minors are identified by the set of columns they keep, so each distinct
/// minor is expanded once (`n 2^n` work instead of `n!`). No pivoting and
/// no elimination: the result is the plain signed sum over permutations,
/// independent of any factorization code. The arithmetic is exact on the
/// stored entries and the result is rounded once, to nearest.
pub fn det_oracle(m: &InterpMatrix) -> Result<f64> {
    det_oracle_matrix(m.matrix())
}

pub fn det_oracle_matrix(a: &DMatrix<f64>) -> Result<f64> {
    det_oracle_exact(a).map(|d| d.to_f64())
}

/// The oracle determinant before the final rounding.
pub(crate) fn det_oracle_exact(a: &DMatrix<f64>) -> Result<Dyadic> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let n = a.nrows();
    if n > MAX_ORACLE_N {
        return Err(Error::OracleTooLarge {
            n,
            max: MAX_ORACLE_N,
        });
    }
    if n == 0 {
        return Ok(Dyadic::one());
    }
    let entries: Vec<Dyadic> = (0..n * n)
        .map(|k| Dyadic::from_f64(a[(k / n, k % n)]))
        .collect();
    let full = (1usize << n) - 1;
    let mut memo = vec![None; 1 << n];
    memo[0] = Some(Dyadic::one());
    Ok(expand(&entries, n, full, &mut memo))
}

/// Determinant of the trailing rows restricted to the columns in `cols`.
fn expand(a: &[Dyadic], n: usize, cols: usize, memo: &mut [Option<Dyadic>]) -> Dyadic {
    if let Some(v) = &memo[cols] {
        return v.clone();
    }
    let row = n - cols.count_ones() as usize;
    let mut sum = Dyadic::zero();
    let mut position = 0;
    for c in 0..n {
        if cols & (1 << c) == 0 {
            continue;
        }
        let entry = &a[row * n + c];
        if !entry.is_zero() {
            let minor = expand(a, n, cols & !(1 << c), memo);
            let term = entry * &minor;
            sum = if position % 2 == 0 {
                &sum + &term
            } else {
                &sum - &term
            };
        }
        position += 1;
    }
    memo[cols] = Some(sum.clone());
    sum
}

/// The submatrix with row `i` and column `j` removed.
pub(crate) fn minor_matrix(a: &DMatrix<f64>, i: usize, j: usize) -> DMatrix<f64> {
    a.clone().remove_row(i).remove_column(j)
}
