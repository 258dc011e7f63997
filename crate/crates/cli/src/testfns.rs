//! Built-in smooth test functions for `gmq interp`.

use anyhow::{bail, Result};

pub type TestFn = fn(&[f64]) -> f64;

/// `exp(x_1 - (x_2 + .. + x_d) / 2)`.
pub fn exp_ramp(x: &[f64]) -> f64 {
    (x[0] - 0.5 * x[1..].iter().sum::<f64>()).exp()
}

/// `cos(x_1 + .. + x_d)`.
pub fn cosine(x: &[f64]) -> f64 {
    x.iter().sum::<f64>().cos()
}

/// Franke's bivariate test function.
pub fn franke(x: &[f64]) -> f64 {
    let (a, b) = (9.0 * x[0], 9.0 * x[1]);
    0.75 * (-((a - 2.0).powi(2) + (b - 2.0).powi(2)) / 4.0).exp()
        + 0.75 * (-(a + 1.0).powi(2) / 49.0 - (b + 1.0) / 10.0).exp()
        + 0.5 * (-((a - 7.0).powi(2) + (b - 3.0).powi(2)) / 4.0).exp()
        - 0.2 * (-(a - 4.0).powi(2) - (b - 7.0).powi(2)).exp()
}

pub fn lookup(name: &str, dim: usize) -> Result<TestFn> {
    match name {
        "exp" => Ok(exp_ramp),
        "cosine" => Ok(cosine),
        "franke" if dim == 2 => Ok(franke),
        "franke" => bail!("franke is bivariate, domain has dimension {dim}"),
        other => bail!("unknown test function {other:?} (expected exp, cosine or franke)"),
    }
}
