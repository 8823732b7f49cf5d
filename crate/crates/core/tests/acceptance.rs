//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use clap::Parser;
use fractrans::analysis::{
    arctan_sample_spec, check_arctan_inverse_floor, check_h_bounds, check_h_euler_bound, check_h_euler_order,
    check_y_bounds, convergence_experiment, covariance_experiment, lipschitz_experiment, slope_report,
    transport_marginal_ks, ConvergenceConfig, CovarianceTolerance, SampleSpec,
};
use fractrans::cli::{resolve_config, run_command, Cli};
use fractrans::doss_sussmann::{compose_x, euler_y, CoefficientSet, EulerGridH, HEvaluator};
use fractrans::fbm::{lipschitz_audit, normalization_c, sample_bn, uniform_grid, ApproxParams, HistoryCoupling};
use fractrans::quadrature::adaptive;
use fractrans::{BoundReport, RngSeed};
use statrs::function::gamma::gamma;

type Outcome = Result<String, String>;

const SEED: u64 = 20_240_917;

fn fixed_tolerance(abs: f64) -> CovarianceTolerance {
    CovarianceTolerance {
        se_mult: 0.0,
        bias: abs,
    }
}

fn require(reports: &[BoundReport]) -> Result<(), String> {
    match reports.iter().find(|r| !r.pass) {
        Some(r) => Err(r.to_string()),
        None => Ok(()),
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    if elapsed.as_secs_f64() < limit_s {
        Ok(())
    } else {
        Err(format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64()))
    }
}

fn transport_marginal_law() -> Outcome {
    let t0 = Instant::now();
    let r = transport_marginal_ks(100.0, 1.0, 2000, SEED).map_err(|e| e.to_string())?;
    within(t0.elapsed(), 10.0)?;
    require(std::slice::from_ref(&r))?;
    Ok(format!("D = {:.4} < {:.4}", r.measured, r.bound))
}

/// `∫_{-∞}^0 ((1-s)^q - (-s)^q)² ds + 1/(2H)`, integrated directly.
fn unit_variance_integral(h: f64) -> std::result::Result<f64, String> {
    let q = h - 0.5;
    // g(x) = (1+x)^q - x^q for x > 0, written to avoid cancellation at large x
    let g = |x: f64| if x == 0.0 { 0.0 } else { x.powf(q) * (q * (1.0 / x).ln_1p()).exp_m1() };
    // x = u^6 on [0, 1] and x = v^-6 on [1, ∞) smooth out both endpoint powers
    let near = adaptive(|u: f64| if u == 0.0 { 0.0 } else { g(u.powi(6)).powi(2) * 6.0 * u.powi(5) }, 0.0, 1.0, 1e-13);
    let far = adaptive(
        |v: f64| if v == 0.0 { 0.0 } else { g(v.powi(-6)).powi(2) * 6.0 * v.powi(-7) },
        0.0,
        1.0,
        1e-13,
    );
    match (near, far) {
        (Ok(a), Ok(b)) => Ok(a + b + 1.0 / (2.0 * h)),
        (Err(e), _) | (_, Err(e)) => Err(format!("H={h}: {e}")),
    }
}

fn normalization() -> Outcome {
    let mut detail = Vec::new();
    for h in [0.3, 0.6, 0.75] {
        let c = normalization_c(h).map_err(|e| e.to_string())?;
        let identity = c * c * unit_variance_integral(h)?;
        let closed = 2.0 * h * gamma(1.5 - h) / (gamma(h + 0.5) * gamma(2.0 - 2.0 * h));
        if (identity - 1.0).abs() > 1e-8 || (c * c - closed).abs() > 1e-8 * closed {
            return Err(format!("H={h}: C_H²·Var = {identity}, C_H² = {} vs {closed}", c * c));
        }
        let p = ApproxParams::with_defaults(h, 0.3, 50).map_err(|e| e.to_string())?;
        let r = covariance_experiment(&p, 4000, &[1.0], SEED, fixed_tolerance(0.1)).map_err(|e| e.to_string())?;
        require(std::slice::from_ref(&r))?;
        detail.push(format!("H={h}: |C²V-1|={:.1e} |var-1|={:.3}", (identity - 1.0).abs(), r.measured));
    }
    Ok(detail.join("; "))
}

fn covariance() -> Outcome {
    let t0 = Instant::now();
    let mut detail = Vec::new();
    for h in [0.3, 0.75] {
        let p = ApproxParams::new(h, 0.3, 0.1, -1.0, 50, 1.0).map_err(|e| e.to_string())?;
        let r = covariance_experiment(&p, 4000, &[0.25, 0.5, 0.75, 1.0], SEED + 1, fixed_tolerance(0.1))
            .map_err(|e| e.to_string())?;
        require(std::slice::from_ref(&r))?;
        detail.push(format!("H={h}: max err {:.4}", r.measured));
    }
    within(t0.elapsed(), 300.0)?;
    Ok(detail.join("; "))
}

fn lipschitz_no_growth() -> Outcome {
    let mut detail = Vec::new();
    for h in [0.3, 0.75] {
        let base = ApproxParams::with_defaults(h, 0.3, 8).map_err(|e| e.to_string())?;
        let (audits, r) = lipschitz_experiment(&base, &[8, 16, 32, 64], SEED, 10.0).map_err(|e| e.to_string())?;
        require(std::slice::from_ref(&r))?;
        require(&audits.iter().map(|a| a.report()).collect::<Vec<_>>())?;
        detail.push(format!("H={h}: max/min K = {:.2}", r.measured));
    }
    Ok(detail.join("; "))
}

fn flow_properties() -> Outcome {
    let spec = SampleSpec::default();
    if spec.len() < 1000 {
        return Err(format!("sample grid has only {} points", spec.len()));
    }
    let mut reports = check_h_bounds(&CoefficientSet::sin_cos(0.1), &spec).map_err(|e| e.to_string())?;
    reports.push(check_arctan_inverse_floor(&arctan_sample_spec()).map_err(|e| e.to_string())?);
    require(&reports)?;
    if let Some(r) = reports.iter().find(|r| r.context.contains("violations=") && !r.context.contains("violations=0")) {
        return Err(format!("violations recorded: {r}"));
    }
    Ok(format!("{} reports on {} points, zero violations", reports.len(), spec.len()))
}

fn euler_flow_error() -> Outcome {
    let c = CoefficientSet::sin_cos(0.0);
    let mut reports = Vec::new();
    for (n, l) in [(1, 2), (2, 4), (2, 8)] {
        reports.push(check_h_euler_bound(&c, n, l).map_err(|e| e.to_string())?);
    }
    let order = check_h_euler_order(&c, 2, &[4, 8, 16], 0.9).map_err(|e| e.to_string())?;
    reports.push(order.clone());
    require(&reports)?;
    Ok(format!("bounds hold, order in l = {:.3}", order.measured))
}

fn pathwise_y_bounds() -> Outcome {
    let c = CoefficientSet::sin_cos(0.1);
    let (mut count, mut vacuous) = (0, Vec::new());
    for (n, m) in [(8u64, 64u64), (16, 256)] {
        let p = ApproxParams::with_defaults(0.75, 0.3, n).map_err(|e| e.to_string())?;
        let grid = uniform_grid(1.0, m as usize);
        for r in 0..10 {
            let d = sample_bn(&p, RngSeed::new(SEED, r), &grid, HistoryCoupling::Endpoint).map_err(|e| e.to_string())?;
            let k = lipschitz_audit(&d, &p).map_err(|e| e.to_string())?.k_hat;
            let reports = check_y_bounds(&c, n, m, p.beta, &d, k).map_err(|e| e.to_string())?;
            require(&reports)?;
            // the error bound only speaks for n > N; outside that it is reported as +inf
            if reports.iter().any(|r| r.bound.is_infinite()) {
                vacuous.push(format!("path {r} n={n}"));
            }
            count += reports.len();
        }
    }
    Ok(format!("{count} pathwise reports hold; n <= N on [{}]", vacuous.join(", ")))
}

fn same_driver_convergence() -> Outcome {
    let t0 = Instant::now();
    let cfg = ConvergenceConfig {
        base: ApproxParams::with_defaults(0.75, 0.3, 8).map_err(|e| e.to_string())?,
        ns: vec![8, 16, 32, 64],
        m: None,
        replicas: 20,
        master_seed: SEED,
        coeffs: CoefficientSet::sin_cos(0.1),
        coupling: HistoryCoupling::Endpoint,
    };
    let out = convergence_experiment(&cfg).map_err(|e| e.to_string())?;
    let slope = slope_report("x_rate_slope", &out.x_table, -0.5);
    require(std::slice::from_ref(&slope))?;
    let x_paths: Vec<BoundReport> = out.reports.iter().filter(|r| r.name.starts_with("x_")).cloned().collect();
    require(&x_paths)?;
    within(t0.elapsed(), 600.0)?;
    Ok(format!("slope {:.3}, {} per-path bounds hold", slope.measured, x_paths.len()))
}

fn linear_exactness() -> Outcome {
    let (b0, c, x0) = (0.7, -1.3, 0.25);
    let coeffs = CoefficientSet::linear(b0, c, x0);
    let mut worst = 0.0_f64;
    for n in [8u64, 16] {
        let p = ApproxParams::with_defaults(0.75, 0.3, n).map_err(|e| e.to_string())?;
        let m = n * n;
        let grid = uniform_grid(1.0, m as usize);
        let eh = EulerGridH::new(coeffs.clone(), n);
        for r in 0..5 {
            let d = sample_bn(&p, RngSeed::new(SEED, r), &grid, HistoryCoupling::Endpoint).map_err(|e| e.to_string())?;
            let y = euler_y(&coeffs, n, m, &d).map_err(|e| e.to_string())?;
            let x = compose_x(HEvaluator::Euler(&eh), &y, &d).map_err(|e| e.to_string())?;
            let ys = y.y.as_deref().unwrap_or(&[]);
            let xs = x.x.as_deref().unwrap_or(&[]);
            for i in 0..grid.len() {
                if ys[i].abs() > n as f64 || d.values[i].abs() > n as f64 {
                    return Err(format!("path left the square at t={}", grid[i]));
                }
                let exact = x0 + b0 * grid[i] + c * d.values[i];
                worst = worst.max((xs[i] - exact).abs());
            }
        }
    }
    if worst <= 1e-10 {
        Ok(format!("max deviation {worst:.2e}"))
    } else {
        Err(format!("max deviation {worst:.3e} > 1e-10"))
    }
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .map(|it| {
            it.filter_map(|e| e.ok())
                .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap_or_default()))
                .collect()
        })
        .unwrap_or_default();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [(&str, &[&str]); 4] = [
        ("gen-fbm", &["--set", "grid_points=128"]),
        ("solve", &["--set", "n=8"]),
        ("validate", &["--set", "validate_ns=8,16", "--set", "validate_paths=3", "--set", "sample_points=16"]),
        (
            "converge",
            &["--set", "n_sweep=4,8,16", "--set", "replicas=4", "--set", "cov_replicas=200", "--set", "cov_se_mult=4"],
        ),
    ];
    let mut total = 0;
    for (cmd, extra) in runs {
        let mut dirs = Vec::new();
        for k in 0..2 {
            let dir = tmp.path().join(format!("{cmd}-{k}"));
            let mut args = vec!["fractrans".to_string(), cmd.to_string(), "--out".into(), dir.display().to_string()];
            args.extend(extra.iter().map(|s| s.to_string()));
            let cli = Cli::try_parse_from(args).map_err(|e| e.to_string())?;
            let cfg = resolve_config(&cli, std::iter::empty::<(String, String)>()).map_err(|e| e.to_string())?;
            let outcome = run_command(cli.command, &cfg).map_err(|e| format!("{cmd}: {e}"))?;
            outcome.write_to(&cfg.out_dir()).map_err(|e| e.to_string())?;
            dirs.push(read_dir_sorted(&dir));
        }
        if dirs[0].is_empty() {
            return Err(format!("{cmd} wrote no files"));
        }
        if dirs[0] != dirs[1] {
            return Err(format!("{cmd} outputs differ between runs"));
        }
        total += dirs[0].len();
    }
    Ok(format!("{total} files byte-identical across two runs"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("transport_marginal_law", transport_marginal_law),
        ("normalization", normalization),
        ("covariance", covariance),
        ("lipschitz_no_growth", lipschitz_no_growth),
        ("flow_properties", flow_properties),
        ("euler_flow_error", euler_flow_error),
        ("pathwise_y_bounds", pathwise_y_bounds),
        ("same_driver_convergence", same_driver_convergence),
        ("linear_exactness", linear_exactness),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1} s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1} s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
