//! The four subcommands. Each returns an [`Outcome`] or a [`CliError`]
//! carrying its exit code.

use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::Context;
use gmq::sampling::{Density, Domain};
use gmq::unisolvence::TrialConfig;
use gmq::KernelParams;

use crate::config::RunConfig;

pub mod diagnose;
pub mod interp;
pub mod sweep;
pub mod verify;

pub const EXIT_SUCCESS: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// A completed run: either clean, or with a property violation worth exit 1.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Success,
    Violation(String),
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        match self {
            Outcome::Success => EXIT_SUCCESS,
            Outcome::Violation(_) => EXIT_VIOLATION,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_USAGE,
            error: error.into(),
        }
    }

    pub fn violation(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_VIOLATION,
            error: error.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<anyhow::Error> for CliError {
    fn from(error: anyhow::Error) -> Self {
        Self::usage(error)
    }
}

/// Singular systems are exit 1; anything about the input is exit 2.
impl From<gmq::Error> for CliError {
    fn from(error: gmq::Error) -> Self {
        match error {
            gmq::Error::NumericallySingular(_) | gmq::Error::PolynomialDegeneracy { .. } => {
                Self::violation(error)
            }
            other => Self::usage(other),
        }
    }
}

pub type CmdResult = Result<Outcome, CliError>;

/// The configured domain, with its dimension replaced by `dim` when the
/// domain is given by dimension only.
pub(crate) fn domain_for(cfg: &RunConfig, dim: usize) -> Result<Domain, CliError> {
    let mut dc = cfg.domain.clone();
    if dim != dc.dim {
        if !dc.is_dimension_generic() {
            return Err(CliError::usage(anyhow::anyhow!(
                "domain has explicit coordinates in dimension {}, cannot use d = {dim}",
                dc.dim
            )));
        }
        dc.dim = dim;
    }
    Ok(dc.build()?)
}

pub(crate) fn density_for(cfg: &RunConfig, dim: usize) -> Result<Density, CliError> {
    Ok(cfg.density.build(dim)?)
}

pub(crate) fn trial_config(
    cfg: &RunConfig,
    params: KernelParams,
    n: usize,
    dim: usize,
) -> Result<TrialConfig, CliError> {
    let config = TrialConfig {
        domain: domain_for(cfg, dim)?,
        density: density_for(cfg, dim)?,
        params,
        n,
        trials: cfg.verify.trials,
        master_seed: cfg.seed,
        rank_tolerance: cfg.verify.rank_tolerance,
        theorem_mode: cfg.kernel.theorem_mode,
    };
    config.validate()?;
    Ok(config)
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub(crate) fn to_json_pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

/// Median by total order; `NaN` for an empty slice.
pub(crate) fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&mut [1.0, f64::INFINITY]), f64::INFINITY);
        assert!(median(&mut []).is_nan());
    }

    #[test]
    fn error_codes() {
        let e: CliError = gmq::Error::CoincidentPoints {
            i: 0,
            j: 1,
            distance: 0.0,
        }
        .into();
        assert_eq!(e.code, EXIT_USAGE);
        assert!(e.to_string().contains("coincident points"));
        let e: CliError = gmq::Error::PolynomialDegeneracy {
            degree: 1,
            rank: 1,
            required: 3,
        }
        .into();
        assert_eq!(e.code, EXIT_VIOLATION);
    }
}
