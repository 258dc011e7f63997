use std::fmt::Write as _;

use anyhow::anyhow;
use gmq::sampling::format_f64;
use gmq::unisolvence::{run_trials, TrialSummary};
use gmq::KernelParams;

use super::{median, trial_config, write_file, CliError, CmdResult, Outcome};
use crate::config::RunConfig;
use crate::svg::{line_chart, Series};

pub const SWEEP_CSV_HEADER: &str =
    "n,d,epsilon,k,beta,trials,full,deficient,indeterminate,median_sigma_min,median_cond";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub n: usize,
    pub d: usize,
    pub epsilon: f64,
    pub k: u32,
    pub beta: f64,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub point: GridPoint,
    pub summary: TrialSummary,
    pub median_sigma_min: f64,
    pub median_cond: f64,
}

fn axis<T: Clone>(name: &str, values: &Option<Vec<T>>, base: T) -> Result<Vec<T>, CliError> {
    match values {
        None => Ok(vec![base]),
        Some(v) if v.is_empty() => Err(CliError::usage(anyhow!(
            "empty grid: sweep axis {name} has no values"
        ))),
        Some(v) => Ok(v.clone()),
    }
}

/// Cartesian product of the sweep axes in `n, d, epsilon, k, beta` order;
/// axes left unset take the single configured value.
pub fn grid(cfg: &RunConfig) -> Result<Vec<GridPoint>, CliError> {
    let s = &cfg.sweep;
    let ns = axis("n", &s.n, cfg.verify.n)?;
    let ds = axis("d", &s.d, cfg.domain.dim)?;
    let es = axis("epsilon", &s.epsilon, cfg.kernel.epsilon)?;
    let ks = axis("k", &s.k, cfg.kernel.k)?;
    let bs = axis("beta", &s.beta, cfg.kernel.beta)?;
    let mut out = Vec::with_capacity(ns.len() * ds.len() * es.len() * ks.len() * bs.len());
    for &n in &ns {
        for &d in &ds {
            for &epsilon in &es {
                for &k in &ks {
                    for &beta in &bs {
                        out.push(GridPoint {
                            n,
                            d,
                            epsilon,
                            k,
                            beta,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// One `run_trials` per grid point with the same master seed; writes
/// `sweep.csv` and optionally `sweep.svg`.
pub fn run(cfg: &RunConfig) -> CmdResult {
    let points = grid(cfg)?;
    let mut rows = Vec::with_capacity(points.len());
    for p in &points {
        let params = KernelParams::new(p.epsilon, p.k, p.beta)?;
        let config = trial_config(cfg, params, p.n, p.d)?;
        let run = run_trials(&config)?;
        let mut sig: Vec<f64> = run.records.iter().map(|r| r.sigma_min).collect();
        let mut cond: Vec<f64> = run.records.iter().map(|r| r.cond).collect();
        rows.push(SweepRow {
            point: *p,
            summary: run.summary,
            median_sigma_min: median(&mut sig),
            median_cond: median(&mut cond),
        });
    }
    write_file(&cfg.out, "sweep.csv", &sweep_csv(&rows))?;
    if cfg.sweep.svg {
        write_file(&cfg.out, "sweep.svg", &sweep_svg(cfg, &rows))?;
    }
    println!(
        "{:>5} {:>2} {:>8} {:>2} {:>6} {:>6} {:>5} {:>5} {:>5} {:>11} {:>11}",
        "n", "d", "eps", "k", "beta", "trials", "full", "def", "ind", "med sigma", "med cond"
    );
    for r in &rows {
        let (p, s) = (&r.point, &r.summary);
        println!(
            "{:>5} {:>2} {:>8} {:>2} {:>6} {:>6} {:>5} {:>5} {:>5} {:>11.3e} {:>11.3e}",
            p.n,
            p.d,
            p.epsilon,
            p.k,
            p.beta,
            s.trials,
            s.full,
            s.deficient,
            s.indeterminate,
            r.median_sigma_min,
            r.median_cond
        );
    }
    let deficient: usize = rows.iter().map(|r| r.summary.deficient).sum();
    if deficient > 0 {
        return Ok(Outcome::Violation(format!(
            "{deficient} rank-deficient trial(s) across the sweep"
        )));
    }
    Ok(Outcome::Success)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let (p, s) = (&r.point, &r.summary);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            p.n,
            p.d,
            format_f64(p.epsilon),
            p.k,
            format_f64(p.beta),
            s.trials,
            s.full,
            s.deficient,
            s.indeterminate,
            format_f64(r.median_sigma_min),
            format_f64(r.median_cond),
        );
    }
    out
}

type Axis = (&'static str, bool, fn(&GridPoint) -> f64);

/// Median condition number against the single varied axis, or against the
/// grid index when several axes vary.
fn sweep_svg(cfg: &RunConfig, rows: &[SweepRow]) -> String {
    let s = &cfg.sweep;
    let varied = |len: Option<usize>| len.is_some_and(|l| l > 1);
    let axes: [Axis; 5] = [
        ("n", varied(s.n.as_ref().map(Vec::len)), |p| p.n as f64),
        ("d", varied(s.d.as_ref().map(Vec::len)), |p| p.d as f64),
        ("epsilon", varied(s.epsilon.as_ref().map(Vec::len)), |p| {
            p.epsilon
        }),
        ("k", varied(s.k.as_ref().map(Vec::len)), |p| p.k as f64),
        ("beta", varied(s.beta.as_ref().map(Vec::len)), |p| p.beta),
    ];
    let active: Vec<_> = axes.iter().filter(|a| a.1).collect();
    let (label, points): (&str, Vec<(f64, f64)>) = match active.as_slice() {
        [(name, _, get)] => (
            name,
            rows.iter()
                .map(|r| (get(&r.point), r.median_cond))
                .collect(),
        ),
        _ => (
            "grid point",
            rows.iter()
                .enumerate()
                .map(|(i, r)| (i as f64, r.median_cond))
                .collect(),
        ),
    };
    let series = [Series {
        label: "median cond".into(),
        points,
    }];
    line_chart("Median condition number", label, "cond", &series, true)
}
