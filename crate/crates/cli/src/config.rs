//! Run configuration: a TOML file with one section per concern, overridden
//! by command-line flags. Every key has a default and unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gmq::sampling::{Density, Domain, PiecewiseConstant};
use gmq::KernelParams;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    pub kernel: KernelConfig,
    pub domain: DomainConfig,
    pub density: DensityConfig,
    pub verify: VerifyConfig,
    pub interp: InterpConfig,
    pub diagnose: DiagnoseConfig,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 20240601,
            out: PathBuf::from("gmq-out"),
            threads: 0,
            kernel: KernelConfig::default(),
            domain: DomainConfig::default(),
            density: DensityConfig::default(),
            verify: VerifyConfig::default(),
            interp: InterpConfig::default(),
            diagnose: DiagnoseConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub epsilon: f64,
    pub k: u32,
    pub beta: f64,
    /// Require non-integer `beta > 1`.
    pub theorem_mode: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            k: 2,
            beta: 1.5,
            theorem_mode: true,
        }
    }
}

impl KernelConfig {
    pub fn params(&self) -> Result<KernelParams> {
        let p = KernelParams::new(self.epsilon, self.k, self.beta)?;
        if self.theorem_mode {
            p.check_theorem_mode()?;
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    /// `box`, `ball` or `box_minus_box`.
    pub kind: String,
    /// Dimension of the default unit box (or unit ball).
    pub dim: usize,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub inner_lower: Option<Vec<f64>>,
    pub inner_upper: Option<Vec<f64>>,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            kind: "box".into(),
            dim: 2,
            lower: None,
            upper: None,
            center: None,
            radius: None,
            inner_lower: None,
            inner_upper: None,
        }
    }
}

impl DomainConfig {
    /// Whether the domain is given only by its dimension (so `dim` may be swept).
    pub fn is_dimension_generic(&self) -> bool {
        self.lower.is_none()
            && self.upper.is_none()
            && self.center.is_none()
            && self.inner_lower.is_none()
            && self.inner_upper.is_none()
    }

    pub fn build(&self) -> Result<Domain> {
        let d = self.dim;
        if d == 0 {
            bail!("domain.dim must be at least 1");
        }
        let domain = match self.kind.as_str() {
            "box" => Domain::Box {
                lower: self.lower.clone().unwrap_or_else(|| vec![0.0; d]),
                upper: self.upper.clone().unwrap_or_else(|| vec![1.0; d]),
            },
            "ball" => Domain::Ball {
                center: self.center.clone().unwrap_or_else(|| vec![0.0; d]),
                radius: self.radius.unwrap_or(1.0),
            },
            "box_minus_box" => Domain::BoxMinusBox {
                outer_lower: self.lower.clone().unwrap_or_else(|| vec![0.0; d]),
                outer_upper: self.upper.clone().unwrap_or_else(|| vec![1.0; d]),
                inner_lower: self.inner_lower.clone().unwrap_or_else(|| vec![0.25; d]),
                inner_upper: self.inner_upper.clone().unwrap_or_else(|| vec![0.75; d]),
            },
            other => bail!("unknown domain kind {other:?} (expected box, ball or box_minus_box)"),
        };
        domain.validate()?;
        Ok(domain)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityConfig {
    /// `uniform` or `piecewise`.
    pub kind: String,
    /// Equal-width bin weights used for every axis when `kind = "piecewise"`.
    pub bins: Vec<f64>,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self {
            kind: "uniform".into(),
            bins: vec![1.0],
        }
    }
}

impl DensityConfig {
    pub fn build(&self, dim: usize) -> Result<Density> {
        match self.kind.as_str() {
            "uniform" => Ok(Density::Uniform),
            "piecewise" => {
                let m = PiecewiseConstant::new(self.bins.clone())?;
                Ok(Density::Piecewise(vec![m; dim]))
            }
            other => bail!("unknown density kind {other:?} (expected uniform or piecewise)"),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub n: usize,
    pub trials: usize,
    /// Relative to `sigma_max`; defaults to `n eps`.
    pub rank_tolerance: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n: 10,
            trials: 200,
            rank_tolerance: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterpConfig {
    /// Node counts; more than one gives a nested sequence and an error plot.
    pub n: Vec<usize>,
    /// Built-in test function: `exp`, `cosine` or `franke`.
    pub function: String,
    /// CSV of `x_1,..,x_d,f` rows instead of a built-in function.
    pub data: Option<PathBuf>,
    pub augmented: bool,
    /// Error grid nodes per axis; 0 picks by dimension.
    pub grid: usize,
    pub svg: bool,
}

impl Default for InterpConfig {
    fn default() -> Self {
        Self {
            n: vec![50],
            function: "exp".into(),
            data: None,
            augmented: false,
            grid: 0,
            svg: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseConfig {
    pub k: Vec<u32>,
    pub d: Vec<usize>,
    /// Nodes per geometry for the determinant decomposition (2..=9).
    pub n: usize,
    pub geometries: usize,
    /// Evaluation points per geometry.
    pub points: usize,
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        Self {
            k: vec![1, 2, 3],
            d: vec![1, 2, 3],
            n: 6,
            geometries: 100,
            points: 10,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub n: Option<Vec<usize>>,
    pub d: Option<Vec<usize>>,
    pub epsilon: Option<Vec<f64>>,
    pub k: Option<Vec<u32>>,
    pub beta: Option<Vec<f64>>,
    pub svg: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: None,
            d: None,
            epsilon: None,
            k: None,
            beta: None,
            svg: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_without_file() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.verify.n, 10);
        assert_eq!(c.kernel.k, 2);
        assert!(c.domain.is_dimension_generic());
    }

    #[test]
    fn sections_parse() {
        let c = RunConfig::parse(
            r#"
            seed = 7
            [kernel]
            beta = 2.5
            [domain]
            kind = "ball"
            dim = 3
            radius = 0.5
            [sweep]
            n = [5, 10]
            "#,
        )
        .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.kernel.beta, 2.5);
        assert_eq!(c.kernel.epsilon, 1.0);
        assert_eq!(c.sweep.n, Some(vec![5, 10]));
        assert!(matches!(c.domain.build().unwrap(), Domain::Ball { radius, .. } if radius == 0.5));
    }

    #[test]
    fn misspelled_keys_are_rejected() {
        assert!(RunConfig::parse("sede = 1").is_err());
        assert!(RunConfig::parse("[kernel]\nepsilom = 1.0").is_err());
        assert!(RunConfig::parse("[verfy]\nn = 3").is_err());
    }

    #[test]
    fn theorem_mode_check() {
        let mut k = KernelConfig {
            beta: 0.5,
            ..Default::default()
        };
        assert!(k.params().is_err());
        k.theorem_mode = false;
        assert!(k.params().is_ok());
    }
}
