//! Acceptance suite. Each test prints one `criterion N: PASS` or
//! `criterion N: FAIL` line and fails when the criterion does not hold.
//!
//! Run with `cargo test -p gmq-cli --release --test acceptance -- --nocapture --test-threads 1`.

use std::process::Command;

use gmq::interp::{assemble, error_report, factorize, fit, fit_augmented, Factorization};
use gmq::sampling::{derive_seed, sample_points, Density, Domain, PointSet};
use gmq::unisolvence::{
    argument_margin, det_oracle, laplace_quadratic_decompose, per_node_branch_check, reuse_weights,
    run_trials, with_max_last, BranchClass, MarginCase, TrialConfig,
};
use gmq::{Complex64, ComplexLine, Error, KernelParams};
use gmq_cli::testfns::exp_ramp;

const SEED: u64 = 20240601;

fn report(criterion: u32, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn grid_params() -> Vec<(usize, KernelParams)> {
    let mut out = Vec::new();
    for d in 1..=3 {
        for k in 1..=3 {
            for beta in [1.5, 2.5, 2.3] {
                for eps in [0.5, 1.0, 2.0] {
                    out.push((d, KernelParams::theorem_mode(eps, k, beta).unwrap()));
                }
            }
        }
    }
    out
}

fn unit_points(dim: usize, n: usize, seed: u64) -> PointSet {
    sample_points(&Domain::unit_box(dim), &Density::Uniform, n, seed).unwrap()
}

#[test]
fn criterion_01_monte_carlo_unisolvence() {
    let (mut trials, mut deficient, mut indeterminate) = (0usize, 0usize, 0usize);
    let mut worst = Vec::new();
    for (i, (d, params)) in grid_params().into_iter().enumerate() {
        for n in [5, 10, 20] {
            let config = TrialConfig::unit_box(
                d,
                params,
                n,
                200,
                derive_seed(SEED, i as u64 * 100 + n as u64),
            );
            let run = run_trials(&config).unwrap();
            trials += run.summary.trials;
            deficient += run.summary.deficient;
            indeterminate += run.summary.indeterminate;
            if run.summary.indeterminate > 0 {
                worst.push((
                    run.summary.indeterminate,
                    d,
                    params.k(),
                    params.beta(),
                    params.epsilon(),
                    n,
                ));
            }
        }
    }
    worst.sort_by_key(|w| std::cmp::Reverse(w.0));
    for (count, d, k, beta, eps, n) in worst.iter().take(5) {
        println!("  indeterminate {count}/200 at d={d} k={k} beta={beta} eps={eps} n={n}");
    }
    let rate = indeterminate as f64 / trials as f64;
    report(
        1,
        deficient == 0 && rate < 0.01,
        &format!(
            "{trials} trials, {deficient} deficient, indeterminate rate {:.2}%",
            100.0 * rate
        ),
    );
}

#[test]
fn criterion_02_base_case_and_pair_sign() {
    let (mut ones, mut ones_bad, mut pairs, mut pairs_bad) = (0, 0, 0, 0);
    for (i, (d, params)) in grid_params().into_iter().enumerate() {
        let run = run_trials(&TrialConfig::unit_box(
            d,
            params,
            1,
            200,
            derive_seed(SEED, 2 * i as u64),
        ))
        .unwrap();
        ones += run.records.len();
        ones_bad += run.records.iter().filter(|r| r.log_abs_det != 0.0).count();
        let run = run_trials(&TrialConfig::unit_box(
            d,
            params,
            2,
            200,
            derive_seed(SEED, 2 * i as u64 + 1),
        ))
        .unwrap();
        pairs += run.records.len();
        for r in run.records.iter().filter(|r| r.sign != -1) {
            pairs_bad += 1;
            println!(
                "  n=2 sign {} at d={d} k={} beta={} eps={} min_dist={:e}",
                r.sign,
                params.k(),
                params.beta(),
                params.epsilon(),
                r.min_dist.unwrap_or(f64::NAN)
            );
        }
    }
    report(
        2,
        ones_bad == 0 && pairs_bad == 0,
        &format!(
            "n=1: {ones_bad}/{ones} with log|det| != 0; n=2: {pairs_bad}/{pairs} with sign != -1"
        ),
    );
}

#[test]
fn criterion_03_quadratic_identity() {
    let mut max_defect = 0.0f64;
    let mut checks = 0;
    for n in 2..=9 {
        for g in 0..20u64 {
            let d = 1 + (g % 3) as usize;
            let k = 1 + ((g / 3) % 3) as u32;
            let params =
                KernelParams::theorem_mode(1.0, k, [1.5, 2.5, 2.3][(g % 3) as usize]).unwrap();
            let seed = derive_seed(SEED, (n * 100) as u64 + g);
            let all = unit_points(d, n + 50, seed);
            let nodes = all.prefix(n);
            let first = laplace_quadratic_decompose(&params, &nodes, all.point(n)).unwrap();
            max_defect = max_defect.max(first.relative_defect());
            for x in all.iter().skip(n + 1) {
                max_defect = max_defect.max(
                    reuse_weights(&params, &nodes, &first.weights, x)
                        .unwrap()
                        .relative_defect(),
                );
            }
            checks += 50;
        }
    }
    report(
        3,
        max_defect <= 1e-9,
        &format!("{checks} evaluations, max relative defect {max_defect:.3e}"),
    );
}

#[test]
fn criterion_04_oracle_equivalence() {
    let mut worst = 0.0f64;
    let mut sign_mismatch = 0;
    for i in 0..100u64 {
        let n = 1 + (i % 8) as usize;
        let (d, params) = grid_params()[((i * 37) % 81) as usize];
        let m = assemble(&params, &unit_points(d, n, derive_seed(SEED, 400 + i))).unwrap();
        let f = factorize(&m, Factorization::default_rank_tolerance(n));
        let oracle = det_oracle(&m).unwrap();
        if f.sign as f64 != oracle.signum() {
            sign_mismatch += 1;
        }
        let rel = (f.determinant() - oracle).abs() / oracle.abs();
        if rel > 1e-9 {
            println!(
                "  n={n} d={d} k={} eps={} beta={}: relative difference {rel:.2e}, condition {:.2e}",
                params.k(),
                params.epsilon(),
                params.beta(),
                f.condition()
            );
        }
        worst = worst.max(rel);
    }
    report(
        4,
        sign_mismatch == 0 && worst <= 1e-9,
        &format!("100 matrices, {sign_mismatch} sign mismatches, max relative determinant difference {worst:.3e}"),
    );
}

#[test]
fn criterion_05_proof_case_diagnostics() {
    let geometries = 100u64;
    let n = 10;

    // (a) k = 1
    let (mut a_fail, mut a_closed) = (0, 0.0f64);
    for g in 0..geometries {
        let d = 1 + (g % 3) as usize;
        let params = KernelParams::theorem_mode([0.5, 1.0, 2.0][(g % 3) as usize], 1, 1.5).unwrap();
        let nodes = unit_points(d, n, derive_seed(SEED, 500 + g));
        let nodes = if d == 1 { with_max_last(&nodes) } else { nodes };
        let r = per_node_branch_check(&params, &nodes, g).unwrap();
        let last = nodes.point(n - 1);
        for e in &r.entries {
            let r2: f64 = last
                .iter()
                .zip(nodes.point(e.j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let expected = params.epsilon().powi(2) * r2;
            if !(e.re > 0.0 && (e.re - expected).abs() <= 1e-12 * expected.max(1.0)) {
                a_fail += 1;
            }
        }
        a_closed = a_closed.max(r.max_closed_form_defect().unwrap());
    }
    let a_pass = a_fail == 0 && a_closed <= 1e-12;
    println!("  (a) k=1: {a_fail} entries off eps^2 R^2 > 0, closed-form defect {a_closed:.3e}");

    // (b) k in 2..=6, d >= 2, orthogonal direction; (c) d = 1, x_n maximal, u = 1
    let (mut b_entries, mut b_fail, mut c_entries, mut c_fail, mut c_violation) = (0, 0, 0, 0, 0);
    let (mut d_checked, mut d_outside, mut d_slack) = (0, 0, f64::INFINITY);
    for g in 0..geometries {
        let k = 2 + (g % 5) as u32;
        let params = KernelParams::theorem_mode([0.5, 1.0, 2.0][(g % 3) as usize], k, 1.5).unwrap();
        for d in [2 + (g % 2) as usize, 1] {
            let nodes = unit_points(d, n, derive_seed(SEED, 600 + 10 * g + d as u64));
            let nodes = if d == 1 { with_max_last(&nodes) } else { nodes };
            let r = per_node_branch_check(&params, &nodes, g).unwrap();
            if d >= 2 {
                b_entries += r.entries.len();
                b_fail += r
                    .entries
                    .iter()
                    .filter(|e| !e.has_nonzero_imaginary())
                    .count();
            } else {
                c_entries += r.entries.len();
                c_fail += r.entries.iter().filter(|e| !(e.re > 0.0)).count();
                c_violation += r
                    .entries
                    .iter()
                    .filter(|e| e.class == BranchClass::Violation)
                    .count();
            }
            let case = if d >= 2 {
                MarginCase::Orthogonal
            } else {
                MarginCase::OneDimensional
            };
            let last = nodes.point(n - 1);
            for j in 0..n - 1 {
                let r: f64 = last
                    .iter()
                    .zip(nodes.point(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let m = argument_margin(&params, r, case).unwrap();
                d_checked += 1;
                d_outside += usize::from(!m.inside);
                d_slack = d_slack.min(m.slack());
            }
        }
    }
    println!("  (b) k>=2, d>=2: {b_fail}/{b_entries} entries with |Im| at or below the margin");
    println!(
        "  (c) k>=2, d=1: {c_fail}/{c_entries} entries with Re <= 0 ({c_violation} on the negative real axis)"
    );
    println!(
        "  (d) argument margin: {d_outside}/{d_checked} outside (0, pi/k), min slack {d_slack:.3e}"
    );
    let violations = usize::from(!a_pass) + b_fail + c_fail + d_outside;
    report(
        5,
        violations == 0,
        &format!("{violations} violations over (a)-(d)"),
    );
}

#[test]
fn criterion_06_branch_point() {
    let mut max_root = 0.0f64;
    let mut raised = 0;
    let mut finite = 0;
    let mut cases = 0;
    for k in 1..=6 {
        for eps in [0.5, 1.0, 2.0] {
            let params = KernelParams::new(eps, k, 1.5).unwrap();
            let z = params.branch_point();
            max_root = max_root.max(((z * eps).powi(2 * k as i32) + 1.0).norm());
            let base = vec![0.3, 0.6];
            let line = ComplexLine::new(base.clone(), vec![0.6, 0.8]).unwrap();
            cases += 1;
            if matches!(
                params.complex_line_eval(&line, z, &base),
                Err(Error::BranchViolation { .. })
            ) {
                raised += 1;
            }
            for s in [1.0 + 1e-3, 1.0 - 1e-3] {
                if let Ok(v) = params.complex_line_eval(&line, z * s, &base) {
                    finite += usize::from(v.re.is_finite() && v.im.is_finite());
                }
            }
        }
    }
    report(
        6,
        max_root <= 1e-14 && raised == cases && finite == 2 * cases,
        &format!("max |(eps z*)^2k + 1| = {max_root:.2e}; violation raised {raised}/{cases}; finite nearby {finite}/{}", 2 * cases),
    );
}

#[test]
fn criterion_07_complex_real_consistency() {
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let d = 1 + (i % 3) as usize;
        let params = KernelParams::new(
            [0.5, 1.0, 2.0][(i % 3) as usize],
            1 + (i % 6) as u32,
            [1.5, 2.5, 2.3, -0.5][(i % 4) as usize],
        )
        .unwrap();
        let pts = unit_points(d, 3, derive_seed(SEED, 700 + i));
        let raw = pts.point(2).iter().map(|v| v - 0.5).collect::<Vec<_>>();
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        let u: Vec<f64> = raw.iter().map(|v| v / norm).collect();
        let line = ComplexLine::new(pts.point(0).to_vec(), u).unwrap();
        let t = 4.0 * (pts.point(1)[0] - 0.5);
        let z = params
            .complex_line_eval(&line, Complex64::new(t, 0.0), pts.point(1))
            .unwrap();
        let r = params.center_eval(&line.at(t), pts.point(1)).unwrap();
        worst = worst.max((z - r).norm() / r.abs());
    }
    report(
        7,
        worst <= 1e-12,
        &format!("100 configurations, max relative difference {worst:.3e}"),
    );
}

struct NestedRun {
    rms: Vec<Option<f64>>,
    max_residual: f64,
    unexpected: Option<String>,
}

fn nested_run(k: u32, seed: u64) -> NestedRun {
    let params = KernelParams::theorem_mode(1.0, k, 1.5).unwrap();
    let all = unit_points(2, 100, seed);
    let grid = PointSet::grid(&[0.0, 0.0], &[1.0, 1.0], 101).unwrap();
    let mut out = NestedRun {
        rms: Vec::new(),
        max_residual: 0.0,
        unexpected: None,
    };
    for n in [25, 50, 100] {
        let ps = all.prefix(n);
        let values: Vec<f64> = ps.iter().map(exp_ramp).collect();
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        match fit(&params, &ps, &values) {
            Ok(s) => {
                out.max_residual = out
                    .max_residual
                    .max(s.nodal_residual(&values).unwrap() / scale);
                out.rms
                    .push(Some(error_report(&s, exp_ramp, &grid).unwrap().rms_error));
            }
            Err(Error::NumericallySingular(_)) => out.rms.push(None),
            Err(e) => {
                out.unexpected = Some(e.to_string());
                out.rms.push(None);
            }
        }
    }
    out
}

/// Non-increasing over the fits that succeeded; a refusal at the guard
/// ends the sequence.
fn non_increasing(rms: &[Option<f64>]) -> bool {
    let solved: Vec<f64> = rms.iter().map_while(|r| *r).collect();
    solved.windows(2).all(|w| w[1] <= w[0])
}

#[test]
fn criterion_08_interpolation_sanity() {
    let mut pass = true;
    let mut detail = Vec::new();
    for k in [1, 2] {
        let run = nested_run(k, SEED);
        let fmt: Vec<String> = run
            .rms
            .iter()
            .map(|r| r.map_or("guard".into(), |v| format!("{v:.3e}")))
            .collect();
        let ok = run.unexpected.is_none() && run.max_residual <= 1e-8 && non_increasing(&run.rms);
        println!(
            "  k={k}: rms over n=25,50,100: {}; max residual/scale {:.2e}",
            fmt.join(", "),
            run.max_residual
        );
        if let Some(e) = &run.unexpected {
            println!("  k={k}: unexpected error {e}");
        }
        let increases = (0..20)
            .filter(|&s| !non_increasing(&nested_run(k, derive_seed(SEED, 800 + s)).rms))
            .count();
        println!("  k={k}: {increases}/20 further seeds show an rms increase");
        pass &= ok;
        detail.push(format!(
            "k={k} {}",
            if ok {
                "ok"
            } else {
                "not monotone or residual too large"
            }
        ));
    }
    report(8, pass, &detail.join(", "));
}

#[test]
fn criterion_09_plain_versus_augmented() {
    let mut worst_residual = 0.0f64;
    let mut worst_side = 0.0f64;
    let mut failures = Vec::new();
    let mut max_cond = 0.0f64;
    for k in [1, 2] {
        let params = KernelParams::theorem_mode(1.0, k, 1.5).unwrap();
        for s in 0..50u64 {
            let ps = unit_points(2, 30, derive_seed(SEED, 900 + 100 * k as u64 + s));
            let values: Vec<f64> = ps.iter().map(exp_ramp).collect();
            let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let m = assemble(&params, &ps).unwrap();
            max_cond =
                max_cond.max(factorize(&m, Factorization::default_rank_tolerance(30)).condition());
            match fit(&params, &ps, &values) {
                Ok(p) => {
                    worst_residual = worst_residual.max(p.nodal_residual(&values).unwrap() / scale)
                }
                Err(e) => failures.push(format!("k={k} set {s} plain: {e}")),
            }
            match fit_augmented(&params, &ps, &values) {
                Ok(a) => {
                    worst_residual = worst_residual.max(a.nodal_residual(&values).unwrap() / scale);
                    assert_eq!(a.tail().unwrap().degree(), 1);
                    let c1: f64 = a.coefficients().iter().map(|c| c.abs()).sum();
                    let tail = a.tail().unwrap();
                    let pmax = ps
                        .iter()
                        .flat_map(|x| tail.basis.eval(x))
                        .fold(0.0f64, |m, v| m.max(v.abs()));
                    for r in a.moment_residuals().unwrap() {
                        worst_side = worst_side.max(r.abs() / (c1 * pmax));
                    }
                }
                Err(e) => failures.push(format!("k={k} set {s} augmented: {e}")),
            }
        }
    }
    for f in failures.iter().take(5) {
        println!("  {f}");
    }
    report(
        9,
        failures.is_empty() && worst_residual <= 1e-8 && worst_side <= 1e-9,
        &format!(
            "100 sets, {} refusals, max residual/scale {worst_residual:.2e}, max side condition {worst_side:.2e}, max plain cond {max_cond:.2e}",
            failures.len()
        ),
    );
}

fn verify_csv(threads: usize, out: &std::path::Path) -> String {
    let status = Command::new(env!("CARGO_BIN_EXE_gmq"))
        .args([
            "verify",
            "--n",
            "20",
            "--trials",
            "300",
            "--seed",
            "77",
            "--threads",
        ])
        .arg(threads.to_string())
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let csv = std::fs::read_to_string(out.join("trials.csv")).unwrap();
    csv.lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<String> = [(1, "a"), (1, "b"), (4, "c"), (4, "d")]
        .iter()
        .map(|&(t, name)| verify_csv(t, &dir.path().join(name)))
        .collect();
    let same = runs.windows(2).all(|w| w[0] == w[1]);
    report(
        10,
        same && runs[0].lines().count() == 301,
        &format!("4 runs (threads 1, 1, 4, 4), timing column stripped, identical: {same}"),
    );
}
