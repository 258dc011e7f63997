use gmq::unisolvence::{run_trials, summary_json, trial_csv, RankStatus, TrialRun};

use super::{to_json_pretty, trial_config, write_file, CmdResult, Outcome};
use crate::config::RunConfig;

/// Monte Carlo rank check; writes `trials.csv` and `summary.json`.
pub fn run(cfg: &RunConfig) -> CmdResult {
    let params = cfg.kernel.params()?;
    let config = trial_config(cfg, params, cfg.verify.n, cfg.domain.dim)?;
    let run = run_trials(&config)?;
    write_file(&cfg.out, "trials.csv", &trial_csv(&run))?;
    write_file(
        &cfg.out,
        "summary.json",
        &to_json_pretty(&summary_json(&run)),
    )?;
    print!("{}", summary_table(&run));
    if run.summary.deficient > 0 {
        let bad: Vec<String> = run
            .records
            .iter()
            .filter(|r| r.status == RankStatus::Deficient)
            .map(|r| format!("trial {} (seed {})", r.trial, r.seed))
            .collect();
        return Ok(Outcome::Violation(format!(
            "{} rank-deficient trial(s): {}",
            bad.len(),
            bad.join(", ")
        )));
    }
    Ok(Outcome::Success)
}

pub fn summary_table(run: &TrialRun) -> String {
    let c = &run.config;
    let p = &c.params;
    let s = &run.summary;
    let pct = |v: usize| 100.0 * v as f64 / s.trials as f64;
    format!(
        "eps={} k={} beta={} d={} n={} trials={} seed={}\n\
         {:<14}{:>8}{:>9}\n\
         {:<14}{:>8}{:>8.2}%\n\
         {:<14}{:>8}{:>8.2}%\n\
         {:<14}{:>8}{:>8.2}%\n",
        p.epsilon(),
        p.k(),
        p.beta(),
        c.domain.dim(),
        c.n,
        s.trials,
        c.master_seed,
        "status",
        "count",
        "share",
        "full",
        s.full,
        pct(s.full),
        "deficient",
        s.deficient,
        pct(s.deficient),
        "indeterminate",
        s.indeterminate,
        pct(s.indeterminate),
    )
}
