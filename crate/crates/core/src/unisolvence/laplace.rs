//! The bordered matrix `A(x) = [[V_n, w(x)], [w(x)^T, 1]]` with
//! `w_j(x) = phi(||x - x_j||)`, and its determinant written as a quadratic in
//! `phi_n(x)`:
//!
//! `det A(x) = -det(V_{n-1}) phi_n(x)^2 + a(x) phi_n(x) + b(x)`.
//!
//! Expanding `det A(x)` along its last row and each resulting minor along
//! its last column gives `det V_n + sum_{i,j} q_ij w_i w_j` with weights
//! `q_ij = -(-1)^(i+j) det(V_n without row i, column j)` that do not depend
//! on `x`. Grouping by powers of `w_n` yields
//!
//! * `a(x) = sum_{i<n} (q_in + q_ni) phi_i(x)`, a member of
//!   `span{phi_1, .., phi_{n-1}}`;
//! * `b(x) = det V_n + sum_{i,j<n} q_ij phi_i(x) phi_j(x)`, a member of the
//!   algebra generated by `phi_1, .., phi_{n-1}`.

use nalgebra::DMatrix;

use super::exact::Dyadic;
use super::oracle::{det_oracle_exact, minor_matrix};
use crate::error::{Error, Result};
use crate::interp::assemble;
use crate::kernels::{check_dims, distance_sq, KernelParams};
use crate::sampling::PointSet;

/// Largest node count accepted by [`laplace_quadratic_decompose`].
pub const MAX_DECOMPOSITION_N: usize = 9;

/// The `x`-independent cofactor weights of the quadratic.
///
/// The weights are computed exactly from the stored matrix entries. The
/// public fields are rounded to `f64`; [`CofactorWeights::eval`] works with
/// the exact values.
#[derive(Debug, Clone, PartialEq)]
pub struct CofactorWeights {
    /// `-det(V_{n-1})`, the coefficient of `phi_n(x)^2`.
    pub c2: f64,
    /// Weights of `phi_1 .. phi_{n-1}` in `a`.
    pub a: Vec<f64>,
    /// `det V_n`, the constant part of `b`.
    pub b_constant: f64,
    /// Symmetric weights of `phi_i phi_j` (`i, j < n`) in `b`.
    pub b_quadratic: DMatrix<f64>,
    exact: ExactWeights,
}

#[derive(Debug, Clone, PartialEq)]
struct ExactWeights {
    c2: Dyadic,
    a: Vec<Dyadic>,
    b_constant: Dyadic,
    /// Row-major, `(n - 1) x (n - 1)`.
    b_quadratic: Vec<Dyadic>,
}

impl CofactorWeights {
    /// `(a(x), b(x))` from basis values `phi_1(x) .. phi_{n-1}(x)`.
    pub fn eval(&self, phi_head: &[f64]) -> (f64, f64) {
        let phi: Vec<Dyadic> = phi_head.iter().map(|&p| Dyadic::from_f64(p)).collect();
        let (a, b) = self.eval_exact(&phi);
        (a.to_f64(), b.to_f64())
    }

    fn eval_exact(&self, phi: &[Dyadic]) -> (Dyadic, Dyadic) {
        let e = &self.exact;
        let m = phi.len();
        let mut a = Dyadic::zero();
        for (w, p) in e.a.iter().zip(phi) {
            a = &a + &(w * p);
        }
        let mut b = e.b_constant.clone();
        for (i, pi) in phi.iter().enumerate() {
            let mut row = Dyadic::zero();
            for (j, pj) in phi.iter().enumerate() {
                row = &row + &(&e.b_quadratic[i * m + j] * pj);
            }
            b = &b + &(&row * pi);
        }
        (a, b)
    }

    /// Largest absolute difference between two weight sets.
    pub fn max_difference(&self, other: &CofactorWeights) -> f64 {
        let mut d = (self.c2 - other.c2)
            .abs()
            .max((self.b_constant - other.b_constant).abs());
        for (x, y) in self.a.iter().zip(&other.a) {
            d = d.max((x - y).abs());
        }
        for (x, y) in self.b_quadratic.iter().zip(other.b_quadratic.iter()) {
            d = d.max((x - y).abs());
        }
        d
    }
}

/// Result of decomposing `det A(x)` at one point.
#[derive(Debug, Clone)]
pub struct QuadraticDecomposition {
    pub weights: CofactorWeights,
    /// `phi_n(x)`.
    pub phi_n: f64,
    pub c2: f64,
    pub ax: f64,
    pub bx: f64,
    /// `det A(x)` from the cofactor oracle on the full bordered matrix.
    pub fx: f64,
    quadratic: f64,
}

impl QuadraticDecomposition {
    /// `c2 phi_n^2 + a phi_n + b`, evaluated exactly and rounded once.
    pub fn quadratic(&self) -> f64 {
        self.quadratic
    }

    /// `|fx - quadratic| / max(1, |fx|)`.
    pub fn relative_defect(&self) -> f64 {
        (self.fx - self.quadratic()).abs() / self.fx.abs().max(1.0)
    }
}

/// `A(x)` for nodes `x_1 .. x_n`.
pub fn bordered_matrix(params: &KernelParams, nodes: &PointSet, x: &[f64]) -> Result<DMatrix<f64>> {
    check_dims(nodes.dim(), x.len())?;
    let v = assemble(params, nodes)?;
    let n = v.n();
    let mut a = DMatrix::identity(n + 1, n + 1);
    a.view_mut((0, 0), (n, n)).copy_from(v.matrix());
    for (j, xj) in nodes.iter().enumerate() {
        let w = params.eval_sq_unchecked(distance_sq(x, xj));
        a[(j, n)] = w;
        a[(n, j)] = w;
    }
    Ok(a)
}

/// Cofactor weights read off a bordered matrix `A` of order `n + 1`.
fn weights_from_bordered(a: &DMatrix<f64>) -> Result<CofactorWeights> {
    let n = a.nrows() - 1;
    let v = a.view((0, 0), (n, n)).into_owned();
    // q_ij from the double expansion: last row of A, then last column of the minor
    let mut q = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let m = if n == 1 {
                Dyadic::one()
            } else {
                det_oracle_exact(&minor_matrix(&v, i, j))?
            };
            q.push(if (i + j) % 2 == 0 { -&m } else { m });
        }
    }
    let last = n - 1;
    let a_exact: Vec<Dyadic> = (0..last)
        .map(|i| &q[i * n + last] + &q[last * n + i])
        .collect();
    let b_exact: Vec<Dyadic> = (0..last)
        .flat_map(|i| (0..last).map(move |j| (i, j)))
        .map(|(i, j)| q[i * n + j].clone())
        .collect();
    let b_constant = det_oracle_exact(&v)?;
    Ok(CofactorWeights {
        c2: q[last * n + last].to_f64(),
        a: a_exact.iter().map(Dyadic::to_f64).collect(),
        b_constant: b_constant.to_f64(),
        b_quadratic: DMatrix::from_row_iterator(last, last, b_exact.iter().map(Dyadic::to_f64)),
        exact: ExactWeights {
            c2: q[last * n + last].clone(),
            a: a_exact,
            b_constant,
            b_quadratic: b_exact,
        },
    })
}

/// Builds `A(x)` and splits `det A(x)` into `c2 phi_n^2 + a(x) phi_n + b(x)`.
///
/// Requires `2 <= n <= MAX_DECOMPOSITION_N` nodes and `x` distinct from all
/// of them.
pub fn laplace_quadratic_decompose(
    params: &KernelParams,
    nodes: &PointSet,
    x: &[f64],
) -> Result<QuadraticDecomposition> {
    let n = nodes.len();
    if !(2..=MAX_DECOMPOSITION_N).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "decomposition needs 2..={MAX_DECOMPOSITION_N} nodes, got {n}"
        )));
    }
    check_dims(nodes.dim(), x.len())?;
    for (i, xi) in nodes.iter().enumerate() {
        let d = distance_sq(x, xi).sqrt();
        if d <= crate::sampling::DISTINCTNESS_TOLERANCE * nodes.diameter() {
            return Err(Error::CoincidentPoints {
                i,
                j: n,
                distance: d,
            });
        }
    }
    let a = bordered_matrix(params, nodes, x)?;
    let weights = weights_from_bordered(&a)?;
    Ok(evaluate_with(nodes, weights, &a))
}

/// Re-evaluates the quadratic at a new point with weights from an earlier
/// decomposition, against a fresh oracle determinant of `A(x)`.
pub fn reuse_weights(
    params: &KernelParams,
    nodes: &PointSet,
    weights: &CofactorWeights,
    x: &[f64],
) -> Result<QuadraticDecomposition> {
    let a = bordered_matrix(params, nodes, x)?;
    Ok(evaluate_with(nodes, weights.clone(), &a))
}

fn evaluate_with(
    nodes: &PointSet,
    weights: CofactorWeights,
    a: &DMatrix<f64>,
) -> QuadraticDecomposition {
    let n = nodes.len();
    let phi: Vec<f64> = (0..n).map(|j| a[(n, j)]).collect();
    let exact_phi: Vec<Dyadic> = phi.iter().map(|&p| Dyadic::from_f64(p)).collect();
    let (ax, bx) = weights.eval_exact(&exact_phi[..n - 1]);
    let phi_n = &exact_phi[n - 1];
    let quadratic = &(&(&(&weights.exact.c2 * phi_n) + &ax) * phi_n) + &bx;
    let fx = det_oracle_exact(a).expect("bordered order within oracle cap");
    QuadraticDecomposition {
        c2: weights.c2,
        weights,
        phi_n: phi[n - 1],
        ax: ax.to_f64(),
        bx: bx.to_f64(),
        fx: fx.to_f64(),
        quadratic: quadratic.to_f64(),
    }
}

/// Weights recomputed from `A(x)` at a second point; the difference to the
/// first set measures their independence of `x`.
pub fn weight_stability(
    params: &KernelParams,
    nodes: &PointSet,
    x1: &[f64],
    x2: &[f64],
) -> Result<f64> {
    let d1 = laplace_quadratic_decompose(params, nodes, x1)?;
    let d2 = laplace_quadratic_decompose(params, nodes, x2)?;
    Ok(d1.weights.max_difference(&d2.weights))
}
