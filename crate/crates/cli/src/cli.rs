//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, CliError, Outcome, EXIT_USAGE};
use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "gmq",
    version,
    about = "Polynomial-free GMQ interpolation and unisolvence checks"
)]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Allow integer or small beta.
    #[arg(long, global = true)]
    pub no_theorem_mode: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit an interpolant to a built-in function or a data file.
    Interp(InterpArgs),
    /// Monte Carlo check that the interpolation matrix is nonsingular.
    Verify(VerifyArgs),
    /// Determinant identity and branch-point diagnostics.
    Diagnose(DiagnoseArgs),
    /// Cartesian-product sweep of Monte Carlo summaries.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Dimension of the unit box or ball.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub rank_tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct InterpArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Node counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// exp, cosine or franke.
    #[arg(long)]
    pub function: Option<String>,
    /// CSV of x_1,..,x_d,f rows.
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    /// Also fit with a polynomial tail of degree ceil(beta) - 1.
    #[arg(long)]
    pub augmented: bool,
    /// Error grid nodes per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub no_svg: bool,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<usize>>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub geometries: Option<usize>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub beta: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub no_svg: bool,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl KernelArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.kernel.epsilon, self.epsilon);
        set(&mut cfg.kernel.k, self.k);
        set(&mut cfg.kernel.beta, self.beta);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Interp,
    Verify,
    Diagnose,
    Sweep,
}

impl Cli {
    /// Loads the configuration file (if any) and applies the flags on top.
    pub fn resolve(self) -> anyhow::Result<(RunConfig, Which)> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.out, self.out);
        set(&mut cfg.threads, self.threads);
        if self.no_theorem_mode {
            cfg.kernel.theorem_mode = false;
        }
        let which = match self.command {
            Command::Verify(a) => {
                set(&mut cfg.verify.n, a.n);
                set(&mut cfg.verify.trials, a.trials);
                set(&mut cfg.domain.dim, a.dim);
                if a.rank_tolerance.is_some() {
                    cfg.verify.rank_tolerance = a.rank_tolerance;
                }
                a.kernel.apply(&mut cfg);
                Which::Verify
            }
            Command::Interp(a) => {
                set(&mut cfg.interp.n, a.n);
                set(&mut cfg.domain.dim, a.dim);
                set(&mut cfg.interp.function, a.function);
                if a.data.is_some() {
                    cfg.interp.data = a.data;
                }
                cfg.interp.augmented |= a.augmented;
                set(&mut cfg.interp.grid, a.grid);
                if a.no_svg {
                    cfg.interp.svg = false;
                }
                a.kernel.apply(&mut cfg);
                Which::Interp
            }
            Command::Diagnose(a) => {
                set(&mut cfg.diagnose.k, a.k);
                set(&mut cfg.diagnose.d, a.d);
                set(&mut cfg.diagnose.n, a.n);
                set(&mut cfg.diagnose.geometries, a.geometries);
                set(&mut cfg.diagnose.points, a.points);
                set(&mut cfg.kernel.epsilon, a.epsilon);
                set(&mut cfg.kernel.beta, a.beta);
                Which::Diagnose
            }
            Command::Sweep(a) => {
                let s = &mut cfg.sweep;
                if a.n.is_some() {
                    s.n = a.n;
                }
                if a.d.is_some() {
                    s.d = a.d;
                }
                if a.epsilon.is_some() {
                    s.epsilon = a.epsilon;
                }
                if a.k.is_some() {
                    s.k = a.k;
                }
                if a.beta.is_some() {
                    s.beta = a.beta;
                }
                if a.no_svg {
                    s.svg = false;
                }
                set(&mut cfg.verify.trials, a.trials);
                Which::Sweep
            }
        };
        Ok((cfg, which))
    }
}

/// Runs one subcommand inside a pool of `cfg.threads` workers.
pub fn execute(cfg: &RunConfig, which: Which) -> Result<Outcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::usage(anyhow::anyhow!("thread pool: {e}")))?;
    pool.install(|| match which {
        Which::Interp => commands::interp::run(cfg),
        Which::Verify => commands::verify::run(cfg),
        Which::Diagnose => commands::diagnose::run(cfg),
        Which::Sweep => commands::sweep::run(cfg),
    })
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (cfg, which) = match cli.resolve() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    match execute(&cfg, which) {
        Ok(Outcome::Success) => 0,
        Ok(outcome @ Outcome::Violation(_)) => {
            if let Outcome::Violation(msg) = &outcome {
                eprintln!("violation: {msg}");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(args: &[&str]) -> (RunConfig, Which) {
        Cli::try_parse_from(args).unwrap().resolve().unwrap()
    }

    #[test]
    fn flags_override_defaults() {
        let (cfg, which) = resolve(&[
            "gmq",
            "verify",
            "--n",
            "7",
            "--seed",
            "3",
            "--beta",
            "2.5",
            "--threads",
            "2",
        ]);
        assert_eq!(which, Which::Verify);
        assert_eq!(
            (cfg.verify.n, cfg.seed, cfg.kernel.beta, cfg.threads),
            (7, 3, 2.5, 2)
        );
        let (cfg, _) = resolve(&["gmq", "sweep", "--n", "5,10,20"]);
        assert_eq!(cfg.sweep.n, Some(vec![5, 10, 20]));
        let (cfg, _) = resolve(&["gmq", "diagnose", "--k", "1", "--out", "x"]);
        assert_eq!(cfg.diagnose.k, vec![1]);
        assert_eq!(cfg.out, PathBuf::from("x"));
    }

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "seed = 11\n[verify]\nn = 4\ntrials = 9\n").unwrap();
        let p = path.to_str().unwrap();
        let (cfg, _) = resolve(&["gmq", "--config", p, "verify", "--n", "6"]);
        assert_eq!((cfg.seed, cfg.verify.n, cfg.verify.trials), (11, 6, 9));
    }

    #[test]
    fn bad_usage_is_exit_two() {
        assert_eq!(main_with(["gmq", "verify", "--bogus"]), EXIT_USAGE);
        assert_eq!(
            main_with(["gmq", "--config", "/nonexistent/run.toml", "verify"]),
            EXIT_USAGE
        );
    }
}
