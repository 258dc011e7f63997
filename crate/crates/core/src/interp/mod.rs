//! Interpolation matrices, their factorization, and interpolants with or
//! without a polynomial tail.

mod factor;
mod fit;
mod poly;

pub use factor::{factorize, factorize_matrix, Factorization, CONDITION_GUARD};
pub use fit::{error_report, fit, fit_augmented, ErrorStats, Interpolant, PolynomialTail};
pub use poly::{monomial_exponents, MonomialBasis};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::{distance_sq, KernelParams};
use crate::sampling::{closest_pair, distinctness_threshold, PointSet};

/// The symmetric matrix `V = [phi(||x_i - x_j||)]` for a set of nodes.
#[derive(Debug, Clone)]
pub struct InterpMatrix {
    params: KernelParams,
    points: PointSet,
    matrix: DMatrix<f64>,
}

impl InterpMatrix {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

/// Refuses point sets whose closest pair is within the distinctness threshold.
pub(crate) fn check_distinct(ps: &PointSet) -> Result<()> {
    if ps.len() < 2 {
        return Ok(());
    }
    let (i, j, distance) = closest_pair(ps)?;
    if distance <= distinctness_threshold(ps) {
        return Err(Error::CoincidentPoints { i, j, distance });
    }
    Ok(())
}

/// Builds `V_n`. Each off-diagonal entry is evaluated once and mirrored, and
/// the diagonal is set to exactly one.
pub fn assemble(params: &KernelParams, ps: &PointSet) -> Result<InterpMatrix> {
    if ps.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot assemble an empty point set".into(),
        ));
    }
    check_distinct(ps)?;
    let n = ps.len();
    let mut matrix = DMatrix::identity(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = params.eval_sq_unchecked(distance_sq(ps.point(i), ps.point(j)));
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
    }
    Ok(InterpMatrix {
        params: *params,
        points: ps.clone(),
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_points, Density, Domain};

    #[test]
    fn single_point_matrix_is_one() {
        let ps = PointSet::from_points(&[vec![0.3, 0.7]]).unwrap();
        let m = assemble(&KernelParams::new(1.0, 1, 1.5).unwrap(), &ps).unwrap();
        assert_eq!(m.matrix().as_slice(), &[1.0]);
    }

    #[test]
    fn two_point_matrix() {
        let ps = PointSet::from_points(&[vec![0.0], vec![1.0]]).unwrap();
        let m = assemble(&KernelParams::new(1.0, 1, 1.5).unwrap(), &ps).unwrap();
        let v = 2f64.powf(1.5);
        assert!((m.entry(0, 1) - v).abs() < 1e-14);
        assert_eq!(m.entry(0, 1), m.entry(1, 0));
        assert_eq!(m.entry(0, 0), 1.0);
    }

    #[test]
    fn symmetric_with_unit_diagonal() {
        let ps = sample_points(&Domain::unit_box(3), &Density::Uniform, 40, 5).unwrap();
        let m = assemble(&KernelParams::new(1.7, 3, 2.3).unwrap(), &ps).unwrap();
        let a = m.matrix();
        assert_eq!(a, &a.transpose());
        assert!((0..40).all(|i| a[(i, i)] == 1.0));
    }

    #[test]
    fn coincident_points_refused() {
        let ps = PointSet::from_points(&[vec![0.0, 0.0], vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let err = assemble(&KernelParams::new(1.0, 1, 1.5).unwrap(), &ps).unwrap_err();
        assert!(matches!(err, Error::CoincidentPoints { i: 1, j: 2, .. }));
    }
}
