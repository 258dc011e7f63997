use anyhow::anyhow;
use gmq::sampling::{derive_seed, sample_points};
use gmq::unisolvence::{
    argument_margin, laplace_quadratic_decompose, per_node_branch_check, reuse_weights,
    with_max_last, MarginCase, ProofCase, MAX_DECOMPOSITION_N,
};
use gmq::KernelParams;
use rayon::prelude::*;
use serde::Serialize;

use super::{density_for, domain_for, to_json_pretty, write_file, CliError, CmdResult, Outcome};
use crate::config::RunConfig;

pub const IDENTITY_TOLERANCE: f64 = 1e-9;
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-12;

/// Worst cases over the geometries of one `(k, d)` pair.
#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub k: u32,
    pub d: usize,
    pub case: ProofCase,
    pub geometries: usize,
    pub max_identity_defect: f64,
    pub branch_entries: usize,
    pub branch_violations: usize,
    /// Entries failing the case's sufficient condition (`Re > 0` or `Im != 0`).
    pub claim_failures: usize,
    pub max_closed_form_defect: Option<f64>,
    pub min_relative_imaginary: f64,
    /// `k >= 2` only.
    pub min_argument_slack: Option<f64>,
    pub argument_outside: usize,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnoseReport {
    pub seed: u64,
    pub epsilon: f64,
    pub beta: f64,
    pub n: usize,
    pub points: usize,
    pub identity_tolerance: f64,
    pub closed_form_tolerance: f64,
    pub max_identity_defect: f64,
    pub total_violations: usize,
    pub pass: bool,
    pub cases: Vec<CaseReport>,
}

#[derive(Default)]
struct GeometryStats {
    defect: f64,
    entries: usize,
    violations: usize,
    claim_failures: usize,
    closed_form: Option<f64>,
    min_imag: f64,
    slack: Option<f64>,
    outside: usize,
}

/// Determinant identity, branch analyticity and argument margins over seeded
/// batteries for every `(k, d)`; writes `diagnose.json`.
pub fn run(cfg: &RunConfig) -> CmdResult {
    let dc = &cfg.diagnose;
    if !(2..=MAX_DECOMPOSITION_N).contains(&dc.n) {
        return Err(CliError::usage(anyhow!(
            "refused: the determinant decomposition uses the cofactor oracle and needs 2 <= n <= {MAX_DECOMPOSITION_N}, got n = {}",
            dc.n
        )));
    }
    if dc.k.is_empty() || dc.d.is_empty() || dc.geometries == 0 || dc.points == 0 {
        return Err(CliError::usage(anyhow!(
            "diagnose needs non-empty k and d lists and positive geometries and points"
        )));
    }
    let mut cases = Vec::new();
    for (ki, &k) in dc.k.iter().enumerate() {
        for (di, &d) in dc.d.iter().enumerate() {
            let params = KernelParams::new(cfg.kernel.epsilon, k, cfg.kernel.beta)?;
            if cfg.kernel.theorem_mode {
                params.check_theorem_mode()?;
            }
            let combo_seed = derive_seed(derive_seed(cfg.seed, ki as u64), di as u64);
            cases.push(run_case(cfg, params, d, combo_seed)?);
        }
    }
    let max_identity_defect = cases
        .iter()
        .map(|c| c.max_identity_defect)
        .fold(0.0, f64::max);
    let total_violations = cases.iter().map(|c| c.failures.len()).sum();
    let report = DiagnoseReport {
        seed: cfg.seed,
        epsilon: cfg.kernel.epsilon,
        beta: cfg.kernel.beta,
        n: dc.n,
        points: dc.points,
        identity_tolerance: IDENTITY_TOLERANCE,
        closed_form_tolerance: CLOSED_FORM_TOLERANCE,
        max_identity_defect,
        total_violations,
        pass: total_violations == 0,
        cases,
    };
    write_file(&cfg.out, "diagnose.json", &to_json_pretty(&report))?;
    print_table(&report);
    if report.pass {
        Ok(Outcome::Success)
    } else {
        let all: Vec<String> = report
            .cases
            .iter()
            .flat_map(|c| {
                c.failures
                    .iter()
                    .map(move |f| format!("k={} d={}: {f}", c.k, c.d))
            })
            .collect();
        Ok(Outcome::Violation(all.join("; ")))
    }
}

fn run_case(
    cfg: &RunConfig,
    params: KernelParams,
    d: usize,
    seed: u64,
) -> Result<CaseReport, CliError> {
    let dc = &cfg.diagnose;
    let domain = domain_for(cfg, d)?;
    let density = density_for(cfg, d)?;
    let case = ProofCase::for_params(&params, d);
    let stats = (0..dc.geometries)
        .into_par_iter()
        .map(|g| -> Result<GeometryStats, CliError> {
            let gseed = derive_seed(seed, g as u64);
            let all = sample_points(&domain, &density, dc.n + dc.points, gseed)?;
            let nodes = all.prefix(dc.n);
            let mut st = GeometryStats {
                min_imag: f64::INFINITY,
                ..Default::default()
            };
            let first = laplace_quadratic_decompose(&params, &nodes, all.point(dc.n))?;
            st.defect = first.relative_defect();
            for x in all.iter().skip(dc.n + 1) {
                st.defect = st
                    .defect
                    .max(reuse_weights(&params, &nodes, &first.weights, x)?.relative_defect());
            }

            let nodes = if d == 1 { with_max_last(&nodes) } else { nodes };
            let report = per_node_branch_check(&params, &nodes, gseed)?;
            st.entries = report.entries.len();
            st.violations = report.violations();
            st.claim_failures = report.claim_failures();
            st.closed_form = report.max_closed_form_defect();
            st.min_imag = report.min_relative_imaginary();
            if params.k() >= 2 {
                let mcase = if d >= 2 {
                    MarginCase::Orthogonal
                } else {
                    MarginCase::OneDimensional
                };
                let last = nodes.point(dc.n - 1);
                for j in 0..dc.n - 1 {
                    let m = argument_margin(&params, distance(last, nodes.point(j)), mcase)?;
                    st.slack = Some(st.slack.map_or(m.slack(), |s: f64| s.min(m.slack())));
                    st.outside += usize::from(!m.inside);
                }
            }
            Ok(st)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut r = CaseReport {
        k: params.k(),
        d,
        case,
        geometries: dc.geometries,
        max_identity_defect: 0.0,
        branch_entries: 0,
        branch_violations: 0,
        claim_failures: 0,
        max_closed_form_defect: None,
        min_relative_imaginary: f64::INFINITY,
        min_argument_slack: None,
        argument_outside: 0,
        failures: Vec::new(),
    };
    for s in &stats {
        r.max_identity_defect = r.max_identity_defect.max(s.defect);
        r.branch_entries += s.entries;
        r.branch_violations += s.violations;
        r.claim_failures += s.claim_failures;
        r.max_closed_form_defect = max_opt(r.max_closed_form_defect, s.closed_form);
        r.min_relative_imaginary = r.min_relative_imaginary.min(s.min_imag);
        r.min_argument_slack = match (r.min_argument_slack, s.slack) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        r.argument_outside += s.outside;
    }
    if r.max_identity_defect > IDENTITY_TOLERANCE {
        r.failures.push(format!(
            "identity defect {:e} above {IDENTITY_TOLERANCE:e}",
            r.max_identity_defect
        ));
    }
    if r.branch_violations > 0 {
        r.failures.push(format!(
            "{} branch analyticity violation(s)",
            r.branch_violations
        ));
    }
    // The one-dimensional entries need only stay off the negative axis; a
    // nonpositive real part there is reported but not a failure.
    if case != ProofCase::OneDimensional && r.claim_failures > 0 {
        r.failures.push(format!(
            "{} entries fail the {case:?} condition",
            r.claim_failures
        ));
    }
    if let Some(c) = r
        .max_closed_form_defect
        .filter(|&c| c > CLOSED_FORM_TOLERANCE)
    {
        r.failures.push(format!(
            "closed-form defect {c:e} above {CLOSED_FORM_TOLERANCE:e}"
        ));
    }
    if r.argument_outside > 0 {
        r.failures.push(format!(
            "{} argument(s) outside (0, pi/k)",
            r.argument_outside
        ));
    }
    Ok(r)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn max_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, y) => x.or(y),
    }
}

fn print_table(r: &DiagnoseReport) {
    println!(
        "{:>2} {:>2} {:<15} {:>11} {:>6} {:>7} {:>11} {:>11} {:>11} {:>5}",
        "k", "d", "case", "defect", "viol", "claim", "closed", "min|Im|", "slack", "ok"
    );
    let e = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.2e}"));
    for c in &r.cases {
        println!(
            "{:>2} {:>2} {:<15} {:>11.3e} {:>6} {:>7} {:>11} {:>11.3e} {:>11} {:>5}",
            c.k,
            c.d,
            format!("{:?}", c.case),
            c.max_identity_defect,
            c.branch_violations,
            format!("{}/{}", c.claim_failures, c.branch_entries),
            e(c.max_closed_form_defect),
            c.min_relative_imaginary,
            e(c.min_argument_slack),
            if c.failures.is_empty() { "yes" } else { "NO" },
        );
    }
    println!(
        "max identity defect {:.3e} (tolerance {:e}); {}",
        r.max_identity_defect,
        r.identity_tolerance,
        if r.pass {
            "all checks passed"
        } else {
            "violations found"
        }
    );
}
