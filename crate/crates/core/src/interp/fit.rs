use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::factor::{factorize_matrix, Factorization};
use super::poly::MonomialBasis;
use super::{assemble, check_distinct};
use crate::error::{Error, Result};
use crate::kernels::{check_dims, distance_sq, KernelParams};
use crate::sampling::PointSet;

/// Polynomial part of an augmented interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialTail {
    pub basis: MonomialBasis,
    pub coefficients: Vec<f64>,
}

impl PolynomialTail {
    pub fn degree(&self) -> u32 {
        self.basis.degree
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.basis
            .eval(x)
            .iter()
            .zip(&self.coefficients)
            .map(|(p, g)| p * g)
            .sum()
    }
}

/// `s(x) = sum_j c_j phi(||x - x_j||) (+ tail(x))`.
#[derive(Debug, Clone)]
pub struct Interpolant {
    kernel: KernelParams,
    centers: PointSet,
    coefficients: Vec<f64>,
    tail: Option<PolynomialTail>,
}

impl Interpolant {
    pub fn new(
        kernel: KernelParams,
        centers: PointSet,
        coefficients: Vec<f64>,
        tail: Option<PolynomialTail>,
    ) -> Result<Self> {
        check_dims(centers.len(), coefficients.len())?;
        if let Some(t) = &tail {
            check_dims(centers.dim(), t.basis.center.len())?;
            check_dims(t.basis.len(), t.coefficients.len())?;
        }
        Ok(Self {
            kernel,
            centers,
            coefficients,
            tail,
        })
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn centers(&self) -> &PointSet {
        &self.centers
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn tail(&self) -> Option<&PolynomialTail> {
        self.tail.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.centers.dim()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dims(self.dim(), x.len())?;
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let rbf: f64 = self
            .centers
            .iter()
            .zip(&self.coefficients)
            .map(|(c, w)| w * self.kernel.eval_sq_unchecked(distance_sq(x, c)))
            .sum();
        rbf + self.tail.as_ref().map_or(0.0, |t| t.eval(x))
    }

    /// `max_i |s(x_i) - values_i|` over the centers.
    pub fn nodal_residual(&self, values: &[f64]) -> Result<f64> {
        check_dims(self.centers.len(), values.len())?;
        Ok(self
            .centers
            .iter()
            .zip(values)
            .map(|(x, f)| (self.eval_unchecked(x) - f).abs())
            .fold(0.0, f64::max))
    }

    /// `sum_j c_j p(x_j)` for every tail basis monomial `p`; all zero for an
    /// exact augmented solution.
    pub fn moment_residuals(&self) -> Option<Vec<f64>> {
        let tail = self.tail.as_ref()?;
        let mut moments = vec![0.0; tail.basis.len()];
        for (x, c) in self.centers.iter().zip(&self.coefficients) {
            for (m, p) in moments.iter_mut().zip(tail.basis.eval(x)) {
                *m += c * p;
            }
        }
        Some(moments)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InterpolantJson::from(self)).expect("interpolant serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: InterpolantJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let centers = PointSet::from_points(&raw.centers)?;
        let tail = raw.tail.map(|t| PolynomialTail {
            basis: MonomialBasis::new(t.degree, t.center, t.scale),
            coefficients: t.coefficients,
        });
        Interpolant::new(raw.kernel, centers, raw.coefficients, tail)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InterpolantJson {
    kernel: KernelParams,
    centers: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
    tail: Option<TailJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TailJson {
    degree: u32,
    coefficients: Vec<f64>,
    center: Vec<f64>,
    scale: f64,
}

impl From<&Interpolant> for InterpolantJson {
    fn from(s: &Interpolant) -> Self {
        InterpolantJson {
            kernel: s.kernel,
            centers: s.centers.iter().map(<[f64]>::to_vec).collect(),
            coefficients: s.coefficients.clone(),
            tail: s.tail.as_ref().map(|t| TailJson {
                degree: t.basis.degree,
                coefficients: t.coefficients.clone(),
                center: t.basis.center.clone(),
                scale: t.basis.scale,
            }),
        }
    }
}

/// Polynomial-free fit: solves `V c = values`.
///
/// Refuses with [`Error::NumericallySingular`] when the matrix is rank
/// deficient or its condition number exceeds
/// [`CONDITION_GUARD`](super::CONDITION_GUARD).
pub fn fit(params: &KernelParams, ps: &PointSet, values: &[f64]) -> Result<Interpolant> {
    check_dims(ps.len(), values.len())?;
    let m = assemble(params, ps)?;
    let n = m.n();
    let f = factorize_matrix(m.matrix(), Factorization::default_rank_tolerance(n));
    if !f.is_trustworthy() {
        return Err(Error::NumericallySingular(Box::new(f)));
    }
    let rhs = DVector::from_column_slice(values);
    let c = m
        .into_matrix()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NumericallySingular(Box::new(f)))?;
    Interpolant::new(*params, ps.clone(), c.as_slice().to_vec(), None)
}

/// Classical fit with a polynomial of total degree `order - 1` and the
/// matching moment conditions, via the saddle-point system
/// `[[V, P], [P^T, 0]] [c; g] = [values; 0]`.
///
/// The monomials are taken in `(x - centroid) / (diameter / 2)`. For the
/// positive definite inverse family (`order == 0`) this is [`fit`].
pub fn fit_augmented(params: &KernelParams, ps: &PointSet, values: &[f64]) -> Result<Interpolant> {
    let order = params.order();
    if order == 0 {
        return fit(params, ps, values);
    }
    check_dims(ps.len(), values.len())?;
    check_distinct(ps)?;
    let degree = order - 1;
    let n = ps.len();
    let half_diameter = ps.diameter() / 2.0;
    let scale = if half_diameter > 0.0 {
        half_diameter
    } else {
        1.0
    };
    let basis = MonomialBasis::new(degree, ps.centroid(), scale);
    let l = basis.len();

    let mut p = DMatrix::zeros(n, l);
    for (i, x) in ps.iter().enumerate() {
        for (j, v) in basis.eval(x).into_iter().enumerate() {
            p[(i, j)] = v;
        }
    }
    let sv = p.clone().singular_values();
    let cutoff = n.max(l) as f64 * f64::EPSILON * sv.max();
    let rank = sv.iter().filter(|&&s| s > cutoff).count();
    if rank < l {
        return Err(Error::PolynomialDegeneracy {
            degree,
            rank,
            required: l,
        });
    }

    let v = assemble(params, ps)?.into_matrix();
    let mut system = DMatrix::zeros(n + l, n + l);
    system.view_mut((0, 0), (n, n)).copy_from(&v);
    system.view_mut((0, n), (n, l)).copy_from(&p);
    system.view_mut((n, 0), (l, n)).copy_from(&p.transpose());
    let mut rhs = DVector::zeros(n + l);
    rhs.rows_mut(0, n).copy_from_slice(values);

    let solution = system.clone().lu().solve(&rhs).ok_or_else(|| {
        let f = factorize_matrix(&system, Factorization::default_rank_tolerance(n + l));
        Error::NumericallySingular(Box::new(f))
    })?;
    let coefficients = solution.rows(0, n).iter().copied().collect();
    let tail = PolynomialTail {
        basis,
        coefficients: solution.rows(n, l).iter().copied().collect(),
    };
    Interpolant::new(*params, ps.clone(), coefficients, Some(tail))
}

/// Maximum and root-mean-square error against a reference function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub max_error: f64,
    pub rms_error: f64,
    pub points: usize,
}

pub fn error_report<F>(s: &Interpolant, f: F, grid: &PointSet) -> Result<ErrorStats>
where
    F: Fn(&[f64]) -> f64,
{
    if grid.is_empty() {
        return Err(Error::InvalidParameter("error grid is empty".into()));
    }
    check_dims(s.dim(), grid.dim())?;
    let (mut max_error, mut sum_sq) = (0.0f64, 0.0);
    for x in grid.iter() {
        let e = (s.eval_unchecked(x) - f(x)).abs();
        max_error = max_error.max(e);
        sum_sq += e * e;
    }
    Ok(ErrorStats {
        max_error,
        rms_error: (sum_sq / grid.len() as f64).sqrt(),
        points: grid.len(),
    })
}
