use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use super::InterpMatrix;

/// Largest condition number for which a solve is trusted: `1 / (100 eps)`.
pub const CONDITION_GUARD: f64 = 1.0 / (100.0 * f64::EPSILON);

/// Determinant and singular-value summary of a square matrix.
///
/// The sign and `log |det|` come from an LU factorization with partial
/// pivoting carried out in double-double arithmetic; singular values come
/// from a full SVD, which decides the rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub n: usize,
    /// `-1`, `0` or `+1` from the LU factors; zero only for an exactly zero
    /// pivot. A numerically rank-deficient matrix keeps its computed sign.
    pub sign: i8,
    pub log_abs_det: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub rank: usize,
    pub rank_tolerance: f64,
}

impl Factorization {
    /// Default relative rank tolerance `n eps`.
    pub fn default_rank_tolerance(n: usize) -> f64 {
        n as f64 * f64::EPSILON
    }

    /// `sigma_max / sigma_min`, infinite for an exactly singular matrix.
    pub fn condition(&self) -> f64 {
        if self.sigma_min == 0.0 {
            f64::INFINITY
        } else {
            self.sigma_max / self.sigma_min
        }
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.n
    }

    /// Full rank and condition within [`CONDITION_GUARD`].
    pub fn is_trustworthy(&self) -> bool {
        self.is_full_rank() && self.condition() <= CONDITION_GUARD
    }

    /// `sign * exp(log |det|)`.
    pub fn determinant(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.log_abs_det.exp()
        }
    }
}

/// Factorizes an assembled interpolation matrix. `rank_tolerance` is
/// relative to `sigma_max`.
pub fn factorize(m: &InterpMatrix, rank_tolerance: f64) -> Factorization {
    factorize_matrix(m.matrix(), rank_tolerance)
}

/// [`factorize`] for any square matrix.
pub fn factorize_matrix(a: &DMatrix<f64>, rank_tolerance: f64) -> Factorization {
    assert!(a.is_square(), "factorize needs a square matrix");
    let n = a.nrows();
    if n == 0 {
        return Factorization {
            n,
            sign: 1,
            log_abs_det: 0.0,
            sigma_min: 0.0,
            sigma_max: 0.0,
            rank: 0,
            rank_tolerance,
        };
    }

    let sv = a.clone().singular_values();
    let sigma_max = sv.max();
    let sigma_min = sv.min();
    let cutoff = rank_tolerance * sigma_max;
    let rank = sv.iter().filter(|&&s| s > cutoff).count();

    let (sign, log_abs_det) = lu_determinant(a);

    Factorization {
        n,
        sign,
        log_abs_det,
        sigma_min,
        sigma_max,
        rank,
        rank_tolerance,
    }
}

/// `(sign, log |det|)` by Gaussian elimination with partial pivoting in
/// double-double arithmetic. An exactly zero pivot column gives sign 0.
fn lu_determinant(a: &DMatrix<f64>) -> (i8, f64) {
    let n = a.nrows();
    let mut m: Vec<TwoFloat> = (0..n * n)
        .map(|k| TwoFloat::from(a[(k / n, k % n)]))
        .collect();
    let mut sign = 1i8;
    let mut log_abs_det = 0.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| {
                m[x * n + col]
                    .hi()
                    .abs()
                    .total_cmp(&m[y * n + col].hi().abs())
            })
            .unwrap_or(col);
        let p = m[pivot * n + col];
        if p.hi() == 0.0 {
            return (0, f64::NEG_INFINITY);
        }
        if pivot != col {
            for c in 0..n {
                m.swap(pivot * n + c, col * n + c);
            }
            sign = -sign;
        }
        if p.hi() < 0.0 {
            sign = -sign;
        }
        log_abs_det += p.hi().abs().ln() + p.lo() / p.hi();
        for r in col + 1..n {
            let factor = divide(m[r * n + col], p);
            if factor.hi() == 0.0 {
                continue;
            }
            for c in col + 1..n {
                let v = m[col * n + c];
                m[r * n + c] -= factor * v;
            }
        }
    }
    (sign, log_abs_det)
}

/// Long division to full double-double accuracy, from three quotient
/// digits.
fn divide(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}
