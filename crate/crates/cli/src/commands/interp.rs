use std::fmt::Write as _;
use std::fs;

use anyhow::{anyhow, bail, Context};
use gmq::interp::{error_report, fit, fit_augmented, ErrorStats, Interpolant};
use gmq::sampling::{format_f64, sample_points, Domain, PointSet};
use gmq::KernelParams;

use super::{density_for, domain_for, write_file, CliError, CmdResult, Outcome};
use crate::config::RunConfig;
use crate::svg::{line_chart, Series};
use crate::testfns::{lookup, TestFn};

pub const ERRORS_CSV_HEADER: &str =
    "n,variant,status,data_scale,nodal_residual,side_conditions,max_error,rms_error";

struct Row {
    n: usize,
    variant: &'static str,
    scale: f64,
    result: Result<(Interpolant, Option<ErrorStats>), gmq::Error>,
    residual: f64,
    side: Option<f64>,
}

/// Fits the configured data (plain, and augmented on request) for every node
/// count; writes `interpolant.json`, `errors.csv` and optionally `errors.svg`.
pub fn run(cfg: &RunConfig) -> CmdResult {
    let params = cfg.kernel.params()?;
    let (sets, reference, domain) = match &cfg.interp.data {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading data {}", path.display()))?;
            let (ps, values) =
                parse_data(&text).with_context(|| format!("parsing data {}", path.display()))?;
            (vec![(ps, values)], None, None)
        }
        None => {
            let (sets, f, domain) = builtin_sets(cfg)?;
            (sets, Some(f), Some(domain))
        }
    };
    let grid = match (&reference, &domain) {
        (Some(_), Some(domain)) => Some(error_grid(domain, cfg.interp.grid)?),
        _ => None,
    };

    let mut rows = Vec::new();
    for (ps, values) in &sets {
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        rows.push(evaluate(
            ps,
            values,
            scale,
            "plain",
            fit(&params, ps, values),
            reference,
            grid.as_ref(),
        )?);
        if cfg.interp.augmented {
            rows.push(evaluate(
                ps,
                values,
                scale,
                "augmented",
                fit_augmented(&params, ps, values),
                reference,
                grid.as_ref(),
            )?);
        }
    }

    let mut csv = String::from(ERRORS_CSV_HEADER);
    csv.push('\n');
    let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
    for r in &rows {
        let stats = r.result.as_ref().ok().and_then(|(_, s)| *s);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.variant,
            if r.result.is_ok() { "ok" } else { "refused" },
            format_f64(r.scale),
            opt(r.result.is_ok().then_some(r.residual)),
            opt(r.side),
            opt(stats.map(|s| s.max_error)),
            opt(stats.map(|s| s.rms_error)),
        );
    }
    write_file(&cfg.out, "errors.csv", &csv)?;

    for variant in ["plain", "augmented"] {
        let last = rows
            .iter()
            .rev()
            .find(|r| r.variant == variant && r.result.is_ok());
        if let Some(Row {
            result: Ok((s, _)), ..
        }) = last
        {
            let name = if variant == "plain" {
                "interpolant.json"
            } else {
                "interpolant_augmented.json"
            };
            write_file(&cfg.out, name, &(s.to_json() + "\n"))?;
        }
    }

    if cfg.interp.svg && reference.is_some() && sets.len() > 1 {
        let series: Vec<Series> = ["plain", "augmented"]
            .iter()
            .map(|&v| Series {
                label: format!("{v} rms"),
                points: rows
                    .iter()
                    .filter(|r| r.variant == v)
                    .filter_map(|r| {
                        r.result
                            .as_ref()
                            .ok()
                            .and_then(|(_, s)| *s)
                            .map(|s| (r.n as f64, s.rms_error))
                    })
                    .collect(),
            })
            .filter(|s| !s.points.is_empty())
            .collect();
        let title = format!("RMS error, {}", describe(&params));
        write_file(
            &cfg.out,
            "errors.svg",
            &line_chart(&title, "n", "rms error", &series, true),
        )?;
    }

    println!(
        "{:>6} {:<10} {:>8} {:>12} {:>12}",
        "n", "variant", "status", "residual", "rms"
    );
    for r in &rows {
        let rms = r
            .result
            .as_ref()
            .ok()
            .and_then(|(_, s)| *s)
            .map(|s| format!("{:.3e}", s.rms_error));
        println!(
            "{:>6} {:<10} {:>8} {:>12} {:>12}",
            r.n,
            r.variant,
            if r.result.is_ok() { "ok" } else { "refused" },
            if r.result.is_ok() {
                format!("{:.3e}", r.residual)
            } else {
                "-".into()
            },
            rms.unwrap_or_else(|| "-".into()),
        );
    }

    let refused: Vec<String> = rows
        .iter()
        .filter_map(|r| {
            r.result
                .as_ref()
                .err()
                .map(|e| format!("n={} {}: {e}", r.n, r.variant))
        })
        .collect();
    for r in &rows {
        if let Err(gmq::Error::NumericallySingular(f)) = &r.result {
            eprintln!(
                "n={} {}: sign={} log|det|={:e} sigma_min={:e} sigma_max={:e} rank={}/{} tol={:e}",
                r.n,
                r.variant,
                f.sign,
                f.log_abs_det,
                f.sigma_min,
                f.sigma_max,
                f.rank,
                f.n,
                f.rank_tolerance
            );
        }
    }
    if refused.is_empty() {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::Violation(refused.join("; ")))
    }
}

fn evaluate(
    ps: &PointSet,
    values: &[f64],
    scale: f64,
    variant: &'static str,
    fitted: gmq::Result<Interpolant>,
    reference: Option<TestFn>,
    grid: Option<&PointSet>,
) -> Result<Row, CliError> {
    let mut row = Row {
        n: ps.len(),
        variant,
        scale,
        result: Err(gmq::Error::Parse(String::new())),
        residual: f64::NAN,
        side: None,
    };
    match fitted {
        Ok(s) => {
            row.residual = s.nodal_residual(values)?;
            row.side = s
                .moment_residuals()
                .map(|m| m.iter().fold(0.0f64, |a, v| a.max(v.abs())));
            let stats = match (reference, grid) {
                (Some(f), Some(g)) => Some(error_report(&s, f, g)?),
                _ => None,
            };
            row.result = Ok((s, stats));
        }
        Err(e @ (gmq::Error::NumericallySingular(_) | gmq::Error::PolynomialDegeneracy { .. })) => {
            row.result = Err(e);
        }
        Err(e) => return Err(e.into()),
    }
    Ok(row)
}

type Sets = (Vec<(PointSet, Vec<f64>)>, TestFn, Domain);

/// Nested node sets: every count is a prefix of one draw of the largest.
fn builtin_sets(cfg: &RunConfig) -> Result<Sets, CliError> {
    let mut ns = cfg.interp.n.clone();
    ns.sort_unstable();
    ns.dedup();
    let Some(&largest) = ns.last() else {
        return Err(CliError::usage(anyhow!("interp.n is empty")));
    };
    if ns[0] == 0 {
        return Err(CliError::usage(anyhow!("node counts must be positive")));
    }
    let dim = cfg.domain.dim;
    let f = lookup(&cfg.interp.function, dim)?;
    let domain = domain_for(cfg, dim)?;
    let all = sample_points(&domain, &density_for(cfg, dim)?, largest, cfg.seed)?;
    let sets = ns
        .iter()
        .map(|&n| {
            let ps = all.prefix(n);
            let values = ps.iter().map(f).collect();
            (ps, values)
        })
        .collect();
    Ok((sets, f, domain))
}

/// Tensor grid over the bounding box, keeping points of the domain; box
/// domains keep their boundary.
pub fn error_grid(domain: &Domain, per_axis: usize) -> Result<PointSet, CliError> {
    let dim = domain.dim();
    let per_axis = match per_axis {
        0 => match dim {
            1 => 2001,
            2 => 101,
            3 => 26,
            _ => 8,
        },
        m => m,
    };
    let (lower, upper) = domain.bounding_box();
    let grid = PointSet::grid(&lower, &upper, per_axis)?;
    if matches!(domain, Domain::Box { .. }) {
        return Ok(grid);
    }
    let inside: Vec<Vec<f64>> = grid
        .iter()
        .filter(|x| domain.contains(x))
        .map(<[f64]>::to_vec)
        .collect();
    if inside.is_empty() {
        return Err(CliError::usage(anyhow!(
            "error grid has no points inside the domain"
        )));
    }
    Ok(PointSet::from_points(&inside)?)
}

/// Rows of `x_1,..,x_d,f`. Blank lines and `#` comments are skipped, as is
/// a leading header line that does not parse as numbers.
pub fn parse_data(text: &str) -> anyhow::Result<(PointSet, Vec<f64>)> {
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: Result<Vec<f64>, _> =
            line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let row = match parsed {
            Ok(r) => r,
            Err(_) if width.is_none() && points.is_empty() => continue,
            Err(e) => bail!("line {}: {e}", lineno + 1),
        };
        if row.len() < 2 {
            bail!(
                "line {}: need at least one coordinate and a value",
                lineno + 1
            );
        }
        if *width.get_or_insert(row.len()) != row.len() {
            bail!(
                "line {}: expected {} columns, found {}",
                lineno + 1,
                width.unwrap(),
                row.len()
            );
        }
        if row.iter().any(|v| !v.is_finite()) {
            bail!("line {}: non-finite entry", lineno + 1);
        }
        let (x, f) = row.split_at(row.len() - 1);
        points.push(x.to_vec());
        values.push(f[0]);
    }
    if points.is_empty() {
        bail!("no data rows");
    }
    Ok((PointSet::from_points(&points)?, values))
}

fn describe(params: &KernelParams) -> String {
    format!(
        "eps={} k={} beta={}",
        params.epsilon(),
        params.k(),
        params.beta()
    )
}
