//! Generalized MultiQuadric kernels `phi(r) = (1 + (eps r)^(2k))^beta`.
//!
//! Besides the real radial function this module carries the complex
//! extension of `phi(||x(z) - x_j||)` along a line `x(t) = base + t u`,
//! where the squared distance is continued as the polynomial
//! `z^2 + 2 z <u, base - x_j> + ||base - x_j||^2` (not the complex 2-norm),
//! and the branch point `z* = eps^-1 exp(i pi / 2k)` of the kernel centred
//! at `base`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted generalization exponent `k`. Beyond this `(eps r)^(2k)`
/// leaves the double range for any `eps r` not very close to 1.
pub const MAX_K: u32 = 32;

/// Distance from an integer below which `beta` counts as integer in
/// theorem mode.
pub const INTEGER_BETA_TOLERANCE: f64 = 1e-9;

/// Relative margin separating a genuine zero of a complex quantity from
/// roundoff: `|w| <= BRANCH_MARGIN * (1 + scale)`.
pub const BRANCH_MARGIN: f64 = 1e-10;

/// Shape parameter, generalization exponent and power of a GMQ kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct KernelParams {
    epsilon: f64,
    k: u32,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    epsilon: f64,
    k: u32,
    beta: f64,
}

impl TryFrom<RawParams> for KernelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        KernelParams::new(raw.epsilon, raw.k, raw.beta)
    }
}

impl From<KernelParams> for RawParams {
    fn from(p: KernelParams) -> Self {
        RawParams {
            epsilon: p.epsilon,
            k: p.k,
            beta: p.beta,
        }
    }
}

impl KernelParams {
    /// Validates `epsilon > 0`, `1 <= k <= MAX_K` and a finite nonzero `beta`.
    ///
    /// Hardy's multiquadric (`k = 1, beta = 1/2`) and inverse multiquadrics
    /// (`beta < 0`) are accepted here; use [`KernelParams::theorem_mode`] to
    /// restrict to non-integer `beta > 1`.
    pub fn new(epsilon: f64, k: u32, beta: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        if k == 0 || k > MAX_K {
            return Err(Error::InvalidParameter(format!(
                "k must lie in 1..={MAX_K}, got {k}"
            )));
        }
        if !beta.is_finite() || beta == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and nonzero, got {beta}"
            )));
        }
        Ok(Self { epsilon, k, beta })
    }

    /// Like [`KernelParams::new`] but additionally requires `beta > 1` and
    /// `beta` at least [`INTEGER_BETA_TOLERANCE`] away from every integer.
    pub fn theorem_mode(epsilon: f64, k: u32, beta: f64) -> Result<Self> {
        let p = Self::new(epsilon, k, beta)?;
        p.check_theorem_mode()?;
        Ok(p)
    }

    pub fn check_theorem_mode(&self) -> Result<()> {
        if self.beta <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "theorem mode needs beta > 1, got {}",
                self.beta
            )));
        }
        if (self.beta - self.beta.round()).abs() < INTEGER_BETA_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "theorem mode needs non-integer beta, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Conditional positive definiteness order: `ceil(beta)` for `beta > 0`,
    /// zero for the positive definite inverse family.
    pub fn order(&self) -> u32 {
        if self.beta > 0.0 {
            self.beta.ceil() as u32
        } else {
            0
        }
    }

    /// `phi(r)`, computed as `exp(beta * log1p((eps r)^(2k)))`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!(
                "radius must be nonnegative, got {r}"
            )));
        }
        Ok(self.eval_unchecked(r))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, r: f64) -> f64 {
        let s = (self.epsilon * r).powi(2 * self.k as i32);
        (self.beta * s.ln_1p()).exp()
    }

    /// `phi(r)` from the squared radius, skipping the square root when it is
    /// not needed.
    #[inline]
    pub(crate) fn eval_sq_unchecked(&self, r2: f64) -> f64 {
        let s = (self.epsilon * self.epsilon * r2).powi(self.k as i32);
        (self.beta * s.ln_1p()).exp()
    }

    /// `phi(||x - center||_2)`.
    pub fn center_eval(&self, x: &[f64], center: &[f64]) -> Result<f64> {
        check_dims(x.len(), center.len())?;
        Ok(self.eval_unchecked(distance(x, center)))
    }

    /// The branch point `z* = exp(i pi / 2k) / eps`, a root of `(eps z)^(2k) + 1`.
    pub fn branch_point(&self) -> Complex64 {
        Complex64::from_polar(1.0 / self.epsilon, PI / (2.0 * self.k as f64))
    }

    /// `1 + eps^(2k) q^k` for a continued squared distance `q`.
    pub fn inner_value(&self, q: Complex64) -> Complex64 {
        let scaled = q * (self.epsilon * self.epsilon);
        Complex64::new(1.0, 0.0) + scaled.powi(self.k as i32)
    }

    /// `exp(beta Log(1 + eps^(2k) q^k))` with the principal logarithm.
    ///
    /// Fails with [`Error::BranchViolation`] when the inner value sits at the
    /// branch point 0. Values on the negative real axis are taken from the
    /// upper side of the cut (`Arg = pi`), so a roundoff-sized imaginary part
    /// never flips the branch.
    pub fn complex_eval_sq(&self, q: Complex64) -> Result<Complex64> {
        let scaled = (q * (self.epsilon * self.epsilon)).powi(self.k as i32);
        let w = Complex64::new(1.0, 0.0) + scaled;
        let margin = BRANCH_MARGIN * (1.0 + scaled.norm());
        if w.norm() <= margin {
            return Err(Error::BranchViolation { value: w });
        }
        let w = if w.re < 0.0 && w.im.abs() <= margin {
            Complex64::new(w.re, 0.0)
        } else {
            w
        };
        Ok((w.ln() * self.beta).exp())
    }

    /// The kernel centred at `center`, continued along `line` to complex `z`.
    pub fn complex_line_eval(
        &self,
        line: &ComplexLine,
        z: Complex64,
        center: &[f64],
    ) -> Result<Complex64> {
        let q = line.norm_sq(z, center)?;
        self.complex_eval_sq(q)
    }
}

/// The line `x(t) = base + t u` through a node, with a unit direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexLine {
    base: Vec<f64>,
    direction: Vec<f64>,
}

impl ComplexLine {
    /// Fails unless `direction` has unit length within `1e-12`.
    pub fn new(base: Vec<f64>, direction: Vec<f64>) -> Result<Self> {
        check_dims(base.len(), direction.len())?;
        if base.is_empty() {
            return Err(Error::InvalidParameter("line in zero dimensions".into()));
        }
        let norm = dot(&direction, &direction).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "line direction must be a unit vector, has norm {norm}"
            )));
        }
        Ok(Self { base, direction })
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// Real point `base + t u`.
    pub fn at(&self, t: f64) -> Vec<f64> {
        self.base
            .iter()
            .zip(&self.direction)
            .map(|(b, u)| b + t * u)
            .collect()
    }

    /// Analytic continuation of `||base + t u - center||^2` to `t = z`:
    /// `z^2 + 2 z <u, base - center> + ||base - center||^2`.
    pub fn norm_sq(&self, z: Complex64, center: &[f64]) -> Result<Complex64> {
        check_dims(self.dim(), center.len())?;
        let (mut proj, mut r2) = (0.0, 0.0);
        for ((b, u), c) in self.base.iter().zip(&self.direction).zip(center) {
            let diff = b - c;
            proj += u * diff;
            r2 += diff * diff;
        }
        Ok(z * z + z * (2.0 * proj) + r2)
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn distance_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    distance_sq(a, b).sqrt()
}
