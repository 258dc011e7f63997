use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::interp::{assemble, factorize, Factorization, CONDITION_GUARD};
use crate::kernels::KernelParams;
use crate::sampling::{
    closest_pair, derive_seed, distinctness_threshold, format_f64, sample_points, Density, Domain,
};

/// Caps the Monte Carlo matrix order (dense SVD per trial).
pub const MAX_TRIAL_N: usize = 400;

/// One Monte Carlo experiment: `trials` independent draws of `n` nodes.
#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub domain: Domain,
    pub density: Density,
    pub params: KernelParams,
    pub n: usize,
    pub trials: usize,
    pub master_seed: u64,
    /// Relative rank tolerance; `None` means `n eps`.
    pub rank_tolerance: Option<f64>,
    /// Require `beta > 1`, non-integer.
    pub theorem_mode: bool,
}

impl TrialConfig {
    /// Uniform density on the unit box, theorem mode on, default rank tolerance.
    pub fn unit_box(
        dim: usize,
        params: KernelParams,
        n: usize,
        trials: usize,
        master_seed: u64,
    ) -> Self {
        Self {
            domain: Domain::unit_box(dim),
            density: Density::Uniform,
            params,
            n,
            trials,
            master_seed,
            rank_tolerance: None,
            theorem_mode: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_TRIAL_N {
            return Err(Error::InvalidParameter(format!(
                "n must lie in 1..={MAX_TRIAL_N}, got {}",
                self.n
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("need at least one trial".into()));
        }
        if let Some(t) = self.rank_tolerance {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "rank tolerance must be >= 0, got {t}"
                )));
            }
        }
        if self.theorem_mode {
            self.params.check_theorem_mode()?;
        }
        self.domain.validate()
    }

    pub fn effective_rank_tolerance(&self) -> f64 {
        self.rank_tolerance
            .unwrap_or_else(|| Factorization::default_rank_tolerance(self.n))
    }

    /// JSON echo of the configuration for run summaries.
    pub fn echo(&self) -> serde_json::Value {
        json!({
            "domain": self.domain,
            "density": self.density.label(),
            "kernel": self.params,
            "n": self.n,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "rank_tolerance": self.effective_rank_tolerance(),
            "theorem_mode": self.theorem_mode,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankStatus {
    Full,
    Deficient,
    /// Condition number above [`CONDITION_GUARD`]: rank cannot be decided in
    /// double precision.
    Indeterminate,
}

impl RankStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RankStatus::Full => "full",
            RankStatus::Deficient => "deficient",
            RankStatus::Indeterminate => "indeterminate",
        }
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    /// `None` for `n = 1`.
    pub min_dist: Option<f64>,
    /// Two nodes closer than the distinctness threshold; recorded as deficient.
    pub degenerate: bool,
    pub status: RankStatus,
    pub sign: i8,
    pub log_abs_det: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub cond: f64,
    pub millis: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trials: usize,
    pub full: usize,
    pub deficient: usize,
    pub indeterminate: usize,
}

impl TrialSummary {
    pub fn from_records(records: &[TrialRecord]) -> Self {
        let mut s = TrialSummary {
            trials: records.len(),
            ..Default::default()
        };
        for r in records {
            match r.status {
                RankStatus::Full => s.full += 1,
                RankStatus::Deficient => s.deficient += 1,
                RankStatus::Indeterminate => s.indeterminate += 1,
            }
        }
        s
    }

    pub fn merge(&mut self, other: &TrialSummary) {
        self.trials += other.trials;
        self.full += other.full;
        self.deficient += other.deficient;
        self.indeterminate += other.indeterminate;
    }
}

#[derive(Debug, Clone)]
pub struct TrialRun {
    pub config: TrialConfig,
    pub records: Vec<TrialRecord>,
    pub summary: TrialSummary,
}

/// Runs every trial of `config`: sample, assemble, factorize, record.
///
/// Trial `t` draws its nodes from `derive_seed(master_seed, t)`, so the
/// records do not depend on how rayon schedules the work. Records come back
/// in trial order.
pub fn run_trials(config: &TrialConfig) -> Result<TrialRun> {
    config.validate()?;
    let records = (0..config.trials)
        .into_par_iter()
        .map(|t| run_one(config, t))
        .collect::<Result<Vec<_>>>()?;
    let summary = TrialSummary::from_records(&records);
    Ok(TrialRun {
        config: config.clone(),
        records,
        summary,
    })
}

fn run_one(config: &TrialConfig, trial: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    let seed = derive_seed(config.master_seed, trial as u64);
    let ps = sample_points(&config.domain, &config.density, config.n, seed)?;
    let d = ps.dim();
    let pair = if ps.len() >= 2 {
        Some(closest_pair(&ps)?)
    } else {
        None
    };
    let min_dist = pair.map(|(_, _, dist)| dist);
    let degenerate = min_dist.is_some_and(|m| m <= distinctness_threshold(&ps));

    let mut record = TrialRecord {
        trial,
        seed,
        n: config.n,
        d,
        min_dist,
        degenerate,
        status: RankStatus::Deficient,
        sign: 0,
        log_abs_det: f64::NEG_INFINITY,
        sigma_min: 0.0,
        sigma_max: f64::NAN,
        cond: f64::INFINITY,
        millis: 0.0,
    };
    if !degenerate {
        let m = assemble(&config.params, &ps)?;
        let f = factorize(&m, config.effective_rank_tolerance());
        let cond = f.condition();
        record.status = if cond > CONDITION_GUARD {
            RankStatus::Indeterminate
        } else if f.is_full_rank() {
            RankStatus::Full
        } else {
            RankStatus::Deficient
        };
        record.sign = f.sign;
        record.log_abs_det = f.log_abs_det;
        record.sigma_min = f.sigma_min;
        record.sigma_max = f.sigma_max;
        record.cond = cond;
    }
    record.millis = start.elapsed().as_secs_f64() * 1e3;
    Ok(record)
}

/// Header of the trial CSV.
pub const TRIAL_CSV_HEADER: &str =
    "trial,seed,d,n,epsilon,k,beta,min_dist,rank_status,det_sign,logabsdet,sigma_min,sigma_max,cond,millis";

/// Trial records as CSV, one row per trial. `millis` is the only column
/// that varies between identical runs.
pub fn trial_csv(run: &TrialRun) -> String {
    let p = &run.config.params;
    let mut out = String::with_capacity(64 + run.records.len() * 200);
    out.push_str(TRIAL_CSV_HEADER);
    out.push('\n');
    for r in &run.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3}",
            r.trial,
            r.seed,
            r.d,
            r.n,
            format_f64(p.epsilon()),
            p.k(),
            format_f64(p.beta()),
            r.min_dist.map(format_f64).unwrap_or_default(),
            r.status.as_str(),
            r.sign,
            format_f64(r.log_abs_det),
            format_f64(r.sigma_min),
            format_f64(r.sigma_max),
            format_f64(r.cond),
            r.millis,
        );
    }
    out
}

/// `{trials, full, deficient, indeterminate, config_echo}`.
pub fn summary_json(run: &TrialRun) -> serde_json::Value {
    json!({
        "trials": run.summary.trials,
        "full": run.summary.full,
        "deficient": run.summary.deficient,
        "indeterminate": run.summary.indeterminate,
        "config_echo": run.config.echo(),
    })
}
