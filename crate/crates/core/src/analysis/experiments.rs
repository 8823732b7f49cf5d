//! Monte Carlo experiments. Replica `r` always draws from stream `r` of the
//! master seed, so results do not depend on the thread count.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::analysis::bounds::PathConstants;
use crate::analysis::metrics::{pairwise_sum, sup_diff, RateRow, RateTable};
use crate::doss_sussmann::{compose_x, euler_y, solve_y, CoefficientSet, EulerGridH, HEvaluator, HFlow, DEFAULT_FLOW_TOL};
use crate::error::{Error, Result};
use crate::fbm::{fbm_covariance, lipschitz_audit, lipschitz_sweep, sample_bn, uniform_grid, ApproxParams, HistoryCoupling, LipschitzAudit};
use crate::report::BoundReport;
use crate::rng::RngSeed;
use crate::transport::generate_forward;

/// Asymptotic Kolmogorov–Smirnov coefficient at the 1% level.
pub const KS_C_1PCT: f64 = 1.628;

/// `sup_x |F_emp(x) - F(x)|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("KS statistic of an empty sample".into()));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() as f64;
    Ok(v.iter().enumerate().fold(0.0_f64, |d, (i, x)| {
        let f = cdf(*x);
        d.max((i as f64 + 1.0) / k - f).max(f - i as f64 / k)
    }))
}

/// Stephens' finite-sample critical value `c / (√k + 0.12 + 0.11/√k)`.
pub fn ks_critical(k: usize, c_alpha: f64) -> f64 {
    let s = (k as f64).sqrt();
    c_alpha / (s + 0.12 + 0.11 / s)
}

fn check_replicas(replicas: usize, min: usize) -> Result<()> {
    if replicas == 0 {
        return Err(Error::invalid("replicas", "must be positive"));
    }
    if replicas < min {
        return Err(Error::InsufficientData(format!("need at least {min} replicas, got {replicas}")));
    }
    Ok(())
}

/// KS test of `Z(t) / √t` against `N(0, 1)` for a forward transport
/// process of the given rate, at the 1% level.
pub fn transport_marginal_ks(rate: f64, t: f64, replicas: usize, master_seed: u64) -> Result<BoundReport> {
    check_replicas(replicas, 1)?;
    let samples = (0..replicas as u64)
        .into_par_iter()
        .map(|r| generate_forward(rate, t, RngSeed::new(master_seed, r))?.eval(t).map(|z| z / t.sqrt()))
        .collect::<Result<Vec<f64>>>()?;
    let normal = Normal::standard();
    let d = ks_statistic(&samples, |x| normal.cdf(x))?;
    Ok(BoundReport::new(
        "transport_marginal_ks",
        d,
        ks_critical(replicas, KS_C_1PCT),
        format!("rate={rate} t={t} replicas={replicas} seed={master_seed}"),
    ))
}

/// Tolerance `se_mult · max standard error + bias`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceTolerance {
    pub se_mult: f64,
    pub bias: f64,
}

impl Default for CovarianceTolerance {
    fn default() -> Self {
        Self {
            se_mult: 3.0,
            bias: 0.02,
        }
    }
}

/// Monte Carlo covariance of `B^n` on `grid` (times in `(0, T]`) against the
/// fBm covariance. `measured` is the largest entrywise error.
pub fn covariance_experiment(
    params: &ApproxParams,
    replicas: usize,
    grid: &[f64],
    master_seed: u64,
    tol: CovarianceTolerance,
) -> Result<BoundReport> {
    check_replicas(replicas, 2)?;
    params.validate()?;
    if grid.is_empty() || grid.iter().any(|t| !(*t > 0.0 && *t <= params.horizon)) {
        return Err(Error::invalid("grid", "covariance times must lie in (0, T]"));
    }
    let mut full = vec![0.0];
    full.extend_from_slice(grid);
    let paths = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            sample_bn(params, RngSeed::new(master_seed, r), &full, HistoryCoupling::Endpoint).map(|d| d.values[1..].to_vec())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let k = grid.len();
    let rf = replicas as f64;
    let means: Vec<f64> = (0..k)
        .map(|i| pairwise_sum(&paths.iter().map(|p| p[i]).collect::<Vec<_>>()) / rf)
        .collect();
    let mut worst = (0.0_f64, 0, 0);
    let mut max_se = 0.0_f64;
    for i in 0..k {
        for j in 0..=i {
            let prods: Vec<f64> = paths.iter().map(|p| (p[i] - means[i]) * (p[j] - means[j])).collect();
            let cov = pairwise_sum(&prods) / (rf - 1.0);
            let var = pairwise_sum(&prods.iter().map(|x| (x - cov) * (x - cov)).collect::<Vec<_>>()) / (rf - 1.0);
            max_se = max_se.max((var / rf).sqrt());
            let err = (cov - fbm_covariance(params.hurst, grid[i], grid[j])?).abs();
            if !(err <= worst.0) {
                worst = (err, i, j);
            }
        }
    }
    let bound = tol.se_mult * max_se + tol.bias;
    Ok(BoundReport::new(
        "covariance_error",
        worst.0,
        bound,
        format!(
            "H={} beta={} a={} n={} replicas={replicas} seed={master_seed} worst at (t={}, s={}) max_se={max_se:.4e}",
            params.hurst, params.beta, params.a, params.n, grid[worst.1], grid[worst.2]
        ),
    ))
}

/// Audits `K̂` of one driver per `n` on the `T/n²` grid and checks the spread.
pub fn lipschitz_experiment(
    base: &ApproxParams,
    ns: &[u64],
    master_seed: u64,
    max_ratio: f64,
) -> Result<(Vec<LipschitzAudit>, BoundReport)> {
    let audits = ns
        .iter()
        .map(|&n| {
            let p = base.with_n(n)?;
            let grid = uniform_grid(p.horizon, (n * n) as usize);
            let d = sample_bn(&p, RngSeed::new(master_seed, 0), &grid, HistoryCoupling::Endpoint)?;
            lipschitz_audit(&d, &p)
        })
        .collect::<Result<Vec<_>>>()?;
    let report = lipschitz_sweep(&audits, max_ratio)?;
    Ok((audits, report))
}

/// Same-driver convergence sweep of `h^n(Y^{n,m}, B^n)` to `h(Y^n, B^n)`.
#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    /// `n` is ignored; each sweep point substitutes its own.
    pub base: ApproxParams,
    pub ns: Vec<u64>,
    /// Euler time steps; `None` means `n²`.
    pub m: Option<u64>,
    pub replicas: usize,
    pub master_seed: u64,
    pub coeffs: CoefficientSet,
    pub coupling: HistoryCoupling,
}

/// Rate tables for the `X` and `Y` errors and one pathwise bound report per
/// replica and sweep point.
#[derive(Debug, Clone)]
pub struct ConvergenceOutcome {
    pub x_table: RateTable,
    pub y_table: RateTable,
    pub reports: Vec<BoundReport>,
}

struct ReplicaResult {
    x_err: f64,
    y_err: f64,
    reports: [BoundReport; 2],
}

fn convergence_replica(cfg: &ConvergenceConfig, p: &ApproxParams, m: u64, r: u64) -> Result<ReplicaResult> {
    let n = p.n;
    let seed = RngSeed::new(cfg.master_seed, r);
    let grid = uniform_grid(p.horizon, m as usize);
    let driver = sample_bn(p, seed, &grid, cfg.coupling)?;
    let k_hat = lipschitz_audit(&driver, p)?.k_hat;
    let reference = solve_y(&cfg.coeffs, &driver, p.horizon / m as f64)?;
    let euler = euler_y(&cfg.coeffs, n, m, &driver)?;
    let flow = HFlow::new(cfg.coeffs.clone(), DEFAULT_FLOW_TOL);
    let grid_h = EulerGridH::new(cfg.coeffs.clone(), n);
    let x_tilde = compose_x(HEvaluator::Exact(&flow), &reference, &driver)?;
    let x_euler = compose_x(HEvaluator::Euler(&grid_h), &euler, &driver)?;
    let x_err = sup_diff(x_tilde.primary(), x_euler.primary());
    let y_err = sup_diff(
        reference.y.as_deref().unwrap_or(&[]),
        euler.y.as_deref().unwrap_or(&[]),
    );
    let pc = PathConstants::compute(&cfg.coeffs, n, m, p.beta, p.horizon, driver.sup_abs(), k_hat);
    let ctx = format!("preset={} seed={}:{r} {}", cfg.coeffs.name, cfg.master_seed, pc.describe());
    Ok(ReplicaResult {
        x_err,
        y_err,
        reports: [
            BoundReport::new("x_same_driver_rate", x_err, pc.x_rate_bound(), ctx.clone()),
            BoundReport::new("y_same_driver_rate", y_err, pc.y_rate_bound(), ctx),
        ],
    })
}

pub fn convergence_experiment(cfg: &ConvergenceConfig) -> Result<ConvergenceOutcome> {
    if cfg.ns.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "a convergence sweep needs at least 3 values of n, got {}",
            cfg.ns.len()
        )));
    }
    check_replicas(cfg.replicas, 1)?;
    let mut x_rows = Vec::with_capacity(cfg.ns.len());
    let mut y_rows = Vec::with_capacity(cfg.ns.len());
    let mut reports = Vec::new();
    for &n in &cfg.ns {
        let p = cfg.base.with_n(n)?;
        let m = cfg.m.unwrap_or(n * n);
        let results = (0..cfg.replicas as u64)
            .into_par_iter()
            .map(|r| convergence_replica(cfg, &p, m, r))
            .collect::<Result<Vec<_>>>()?;
        let xs: Vec<f64> = results.iter().map(|r| r.x_err).collect();
        let ys: Vec<f64> = results.iter().map(|r| r.y_err).collect();
        x_rows.push(RateRow::from_errors(n, &xs));
        y_rows.push(RateRow::from_errors(n, &ys));
        reports.extend(results.into_iter().flat_map(|r| r.reports));
    }
    Ok(ConvergenceOutcome {
        x_table: RateTable::new(x_rows)?,
        y_table: RateTable::new(y_rows)?,
        reports,
    })
}

/// `slope <= max_slope` for the fitted mean error; fails without a fit.
pub fn slope_report(name: &str, table: &RateTable, max_slope: f64) -> BoundReport {
    let slope = table.fit.map_or(f64::NAN, |f| f.slope);
    let ns: Vec<String> = table.rows.iter().map(|r| r.n.to_string()).collect();
    BoundReport::new(
        name,
        slope,
        max_slope,
        format!("fitted log-log slope of mean error over n in [{}]", ns.join(" ")),
    )
}
