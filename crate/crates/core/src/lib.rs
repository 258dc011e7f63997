//! Scattered-data interpolation with Generalized MultiQuadrics
//! `phi(r) = (1 + (eps r)^(2k))^beta`, without polynomial augmentation.
//!
//! For non-integer `beta > 1` the interpolation matrix
//! `V_n = [phi(||x_i - x_j||)]` is nonsingular with probability one when the
//! nodes are drawn i.i.d. from any density on an open connected domain.
//! This crate fits such interpolants and checks the claim numerically:
//!
//! * [`kernels`]: the kernel family, its order and its complex continuation
//!   along a line, including the branch point;
//! * [`sampling`]: seeded point sequences on boxes, balls and annular boxes;
//! * [`interp`]: matrix assembly, determinant/rank factorization, and
//!   polynomial-free or polynomial-augmented fits;
//! * [`unisolvence`]: Monte Carlo rank trials, a cofactor determinant
//!   oracle, and the quadratic-in-`phi_n` and branch-point diagnostics.
//!
//! ```
//! use gmq::interp::fit;
//! use gmq::kernels::KernelParams;
//! use gmq::sampling::{sample_points, Density, Domain};
//!
//! let params = KernelParams::theorem_mode(1.0, 2, 1.5)?;
//! let nodes = sample_points(&Domain::unit_box(2), &Density::Uniform, 20, 7)?;
//! let values: Vec<f64> = nodes.iter().map(|x| (x[0] - 0.5 * x[1]).exp()).collect();
//! let s = fit(&params, &nodes, &values)?;
//! assert!(s.nodal_residual(&values)? < 1e-8);
//! # Ok::<(), gmq::Error>(())
//! ```

pub mod error;
pub mod interp;
pub mod kernels;
pub mod sampling;
pub mod unisolvence;

pub use error::{Error, Result};
pub use kernels::{ComplexLine, KernelParams};
pub use num_complex::Complex64;
pub use sampling::{Density, Domain, PointSet};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/branch.md")]
    mod branch {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/factorization.md")]
    mod factorization {}
    #[doc = include_str!("../../../book/src/fitting.md")]
    mod fitting {}
    #[doc = include_str!("../../../book/src/trials.md")]
    mod trials {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
