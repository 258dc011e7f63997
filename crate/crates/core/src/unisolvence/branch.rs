//! Checks that the kernels centred at `x_1 .. x_{n-1}`, continued along
//! `x(z) = x_n + z u`, are analytic at the branch point `z*` of the kernel
//! centred at `x_n`.
//!
//! The continued kernel `phi_j(x(z))` is `(1 + p_j(u))^beta` at `z = z*`, with
//! `p_j(u) = eps^2k (z*^2 + 2 z* <u, x_n - x_j> + ||x_n - x_j||^2)^k`.
//! Analyticity holds as long as `1 + p_j(u)` stays off the closed negative
//! real axis, i.e. it has positive real part or nonzero imaginary part.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{check_dims, dot, ComplexLine, KernelParams, BRANCH_MARGIN};
use crate::sampling::PointSet;

/// Which geometric argument applies to a node configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProofCase {
    /// `k = 1`: `1 + p_j(u) = eps^2 R^2 + 2 i eps <u, x_n - x_j>` for any `u`.
    Quadratic,
    /// `k > 1`, `d >= 2`, `u` orthogonal to `x_n - x_j`.
    Orthogonal,
    /// `k > 1`, `d = 1`, `x_n` the largest node and `u = 1`.
    OneDimensional,
}

impl ProofCase {
    pub fn for_params(params: &KernelParams, dim: usize) -> Self {
        if params.k() == 1 {
            ProofCase::Quadratic
        } else if dim >= 2 {
            ProofCase::Orthogonal
        } else {
            ProofCase::OneDimensional
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchClass {
    PositiveRealPart,
    NonzeroImaginary,
    /// On (or within roundoff of) the closed negative real axis.
    Violation,
}

/// `1 + p_j(u)` for one node `j < n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchEntry {
    pub j: usize,
    pub re: f64,
    pub im: f64,
    pub class: BranchClass,
    /// `k = 1` only: `|value - (eps^2 R^2 + 2 i eps <u, x_n - x_j>)| / max(1, |value|)`.
    pub closed_form_defect: Option<f64>,
}

impl BranchEntry {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// `|Im| > BRANCH_MARGIN (1 + |value|)`.
    pub fn has_nonzero_imaginary(&self) -> bool {
        self.im.abs() > BRANCH_MARGIN * (1.0 + self.value().norm())
    }

    /// The sufficient condition stated for this entry's case: positive real
    /// part for [`ProofCase::Quadratic`] and [`ProofCase::OneDimensional`],
    /// nonzero imaginary part for [`ProofCase::Orthogonal`].
    pub fn case_claim_holds(&self, case: ProofCase) -> bool {
        match case {
            ProofCase::Quadratic | ProofCase::OneDimensional => self.re > 0.0,
            ProofCase::Orthogonal => self.has_nonzero_imaginary(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub case: ProofCase,
    pub entries: Vec<BranchEntry>,
}

impl BranchReport {
    /// Entries where analyticity at `z*` fails.
    pub fn violations(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.class == BranchClass::Violation)
            .count()
    }

    /// Entries where the case's sufficient condition does not hold.
    pub fn claim_failures(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| !e.case_claim_holds(self.case))
            .count()
    }

    pub fn max_closed_form_defect(&self) -> Option<f64> {
        self.entries
            .iter()
            .filter_map(|e| e.closed_form_defect)
            .reduce(f64::max)
    }

    /// Smallest `|Im| / (1 + |value|)` over the entries.
    pub fn min_relative_imaginary(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.im.abs() / (1.0 + e.value().norm()))
            .fold(f64::INFINITY, f64::min)
    }
}

fn classify(w: Complex64) -> BranchClass {
    if w.re > 0.0 {
        BranchClass::PositiveRealPart
    } else if w.im.abs() > BRANCH_MARGIN * (1.0 + w.norm()) {
        BranchClass::NonzeroImaginary
    } else {
        BranchClass::Violation
    }
}

/// `1 + p_j(u)` with `x_n = base`.
pub fn branch_value(
    params: &KernelParams,
    base: &[f64],
    node: &[f64],
    u: &[f64],
) -> Result<Complex64> {
    let line = ComplexLine::new(base.to_vec(), u.to_vec())?;
    let q = line.norm_sq(params.branch_point(), node)?;
    Ok(params.inner_value(q))
}

fn entry(
    params: &KernelParams,
    base: &[f64],
    node: &[f64],
    u: &[f64],
    j: usize,
) -> Result<BranchEntry> {
    let w = branch_value(params, base, node, u)?;
    let closed_form_defect = (params.k() == 1).then(|| {
        let eps = params.epsilon();
        let diff: Vec<f64> = base.iter().zip(node).map(|(a, b)| a - b).collect();
        let expected = Complex64::new(eps * eps * dot(&diff, &diff), 2.0 * eps * dot(u, &diff));
        (w - expected).norm() / w.norm().max(1.0)
    });
    Ok(BranchEntry {
        j,
        re: w.re,
        im: w.im,
        class: classify(w),
        closed_form_defect,
    })
}

/// Evaluates `1 + p_j(u)` for every `j < n` with one common direction `u`.
/// The last node plays the role of `x_n`; violations are reported, not
/// raised.
pub fn branch_analyticity_check(
    params: &KernelParams,
    nodes: &PointSet,
    u: &[f64],
) -> Result<BranchReport> {
    check_dims(nodes.dim(), u.len())?;
    let n = nodes.len();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "branch check needs at least two nodes".into(),
        ));
    }
    let base = nodes.point(n - 1);
    let entries = (0..n - 1)
        .map(|j| entry(params, base, nodes.point(j), u, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(BranchReport {
        case: ProofCase::for_params(params, nodes.dim()),
        entries,
    })
}

/// Per-node variant: node `j` is checked with its own direction
/// `u_j = pick_direction(nodes, j, seed)`.
pub fn per_node_branch_check(
    params: &KernelParams,
    nodes: &PointSet,
    seed: u64,
) -> Result<BranchReport> {
    let n = nodes.len();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "branch check needs at least two nodes".into(),
        ));
    }
    let base = nodes.point(n - 1);
    let entries = (0..n - 1)
        .map(|j| {
            let dir = pick_direction(nodes, j, crate::sampling::derive_seed(seed, j as u64))?;
            entry(params, base, nodes.point(j), &dir.u, j)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BranchReport {
        case: ProofCase::for_params(params, nodes.dim()),
        entries,
    })
}

/// A direction for the complex line through the last node.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub u: Vec<f64>,
    /// `d = 1` only: the last node is not the maximum, so it must be swapped
    /// with the maximal node before the one-dimensional argument applies.
    pub reorder_required: bool,
}

/// For `d >= 2`, a seeded uniformly random unit vector orthogonal to
/// `x_n - x_j`; for `d = 1`, `u = 1`.
pub fn pick_direction(nodes: &PointSet, j: usize, seed: u64) -> Result<Direction> {
    let n = nodes.len();
    if j + 1 >= n {
        return Err(Error::InvalidParameter(format!(
            "node index {j} must be below n - 1 = {}",
            n.saturating_sub(1)
        )));
    }
    let base = nodes.point(n - 1);
    let diff: Vec<f64> = base
        .iter()
        .zip(nodes.point(j))
        .map(|(a, b)| a - b)
        .collect();
    let norm = dot(&diff, &diff).sqrt();
    if norm == 0.0 {
        return Err(Error::CoincidentPoints {
            i: j,
            j: n - 1,
            distance: 0.0,
        });
    }
    let d = nodes.dim();
    if d == 1 {
        let max = nodes.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        return Ok(Direction {
            u: vec![1.0],
            reorder_required: base[0] < max,
        });
    }
    let e: Vec<f64> = diff.iter().map(|v| v / norm).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let along = dot(&g, &e);
        let mut v: Vec<f64> = g.iter().zip(&e).map(|(a, b)| a - along * b).collect();
        // second pass keeps the residual projection at roundoff level
        let along = dot(&v, &e);
        v.iter_mut().zip(&e).for_each(|(a, b)| *a -= along * b);
        let len = dot(&v, &v).sqrt();
        if len > 1e-8 {
            v.iter_mut().for_each(|a| *a /= len);
            return Ok(Direction {
                u: v,
                reorder_required: false,
            });
        }
    }
}

/// Moves the largest node (1-d) to the last position, as the
/// one-dimensional argument requires. Swapping two nodes swaps two rows and
/// the same two columns of the interpolation matrix.
pub fn with_max_last(nodes: &PointSet) -> PointSet {
    let n = nodes.len();
    let imax = (0..n)
        .max_by(|&a, &b| nodes.point(a)[0].total_cmp(&nodes.point(b)[0]))
        .unwrap_or(0);
    let mut order: Vec<usize> = (0..n).collect();
    order.swap(imax, n - 1);
    nodes.permuted(&order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginCase {
    /// `exp(i pi / k) + eps^2 R^2`.
    Orthogonal,
    /// `exp(i pi / k) + 2 eps R exp(i pi / 2k) + eps^2 R^2`.
    OneDimensional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArgumentMargin {
    /// Principal argument of the inner complex number.
    pub arg: f64,
    /// `pi / k`.
    pub upper: f64,
    /// `0 < arg < pi / k`.
    pub inside: bool,
}

impl ArgumentMargin {
    /// Distance to the nearer end of `(0, pi / k)`; negative when outside.
    pub fn slack(&self) -> f64 {
        self.arg.min(self.upper - self.arg)
    }
}

/// Principal argument of the inner number whose `k`-th power is `p_j`, and
/// whether it lies strictly inside `(0, pi / k)`.
pub fn argument_margin(params: &KernelParams, r: f64, case: MarginCase) -> Result<ArgumentMargin> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("distance must be positive, got {r}")));
    }
    let k = params.k();
    if k < 2 {
        return Err(Error::InvalidParameter(
            "argument margin needs k >= 2".into(),
        ));
    }
    let eps = params.epsilon();
    let rotation = Complex64::from_polar(1.0, PI / k as f64);
    let s = eps * eps * r * r;
    let w = match case {
        MarginCase::Orthogonal => rotation + s,
        MarginCase::OneDimensional => {
            rotation + Complex64::from_polar(2.0 * eps * r, PI / (2.0 * k as f64)) + s
        }
    };
    let arg = w.arg();
    let upper = PI / k as f64;
    Ok(ArgumentMargin {
        arg,
        upper,
        inside: arg > 0.0 && arg < upper,
    })
}
