use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{
    arctan_sample_spec, check_arctan_inverse_floor, check_h_bounds, check_h_euler_bound, check_h_euler_order,
    check_y_bounds, convergence_experiment, covariance_experiment, lipschitz_experiment, slope_report,
    ConvergenceConfig, SampleSpec,
};
use crate::cli::config::ExperimentConfig;
use crate::doss_sussmann::{
    compose_x, euler_y, solve_y, symmetric_grid, validate_coeffs, CoefficientRegistry, EulerGridH, HEvaluator, HFlow,
    DEFAULT_FLOW_TOL,
};
use crate::error::{Error, Result};
use crate::fbm::{exact_fbm, lipschitz_audit, sample_bn, uniform_grid, MAX_EXACT_POINTS};
use crate::report::{reports_to_csv, BoundReport};
use crate::rng::RngSeed;

/// Files and reports produced by one command, before anything is written.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<(String, String)>,
    pub reports: Vec<BoundReport>,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    fn file(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body));
    }

    fn with_reports_csv(mut self) -> Self {
        if !self.reports.is_empty() {
            let csv = reports_to_csv(&self.reports);
            self.file("reports.csv", csv);
        }
        self
    }

    /// Writes every file into `dir`. On failure the files written so far are
    /// removed again.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, body) in &self.files {
            let path = dir.join(name);
            if let Err(e) = fs::write(&path, body) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(Error::Io(format!("cannot write {}: {e}", path.display())));
            }
            written.push(path);
        }
        Ok(written)
    }
}

pub fn cmd_gen_fbm(cfg: &ExperimentConfig) -> Result<Outcome> {
    let n = cfg.u64("n")?;
    let p = cfg.params(n)?;
    let grid = uniform_grid(p.horizon, cfg.usize("grid_points")?);
    let seed = RngSeed::new(cfg.seed()?, 0);
    let which = cfg.raw("driver");
    let mut out = Outcome::default();
    if which != "exact" {
        let d = sample_bn(&p, seed, &grid, cfg.coupling()?)?;
        out.file("driver_transport.csv", d.to_csv());
    }
    if which != "transport" {
        if grid.len() > MAX_EXACT_POINTS {
            return Err(Error::Configuration(format!(
                "key `grid_points`: exact sampling supports at most {} intervals",
                MAX_EXACT_POINTS - 1
            )));
        }
        let d = exact_fbm(p.hurst, &grid, seed)?;
        out.file("driver_exact.csv", d.to_csv());
    }
    Ok(out)
}

pub fn cmd_solve(cfg: &ExperimentConfig) -> Result<Outcome> {
    let registry = CoefficientRegistry::default();
    let c = cfg.coefficients(&registry)?;
    let n = cfg.u64("n")?;
    let m = cfg.m_for(n)?;
    let p = cfg.params(n)?;
    let grid = uniform_grid(p.horizon, m as usize);
    let driver = sample_bn(&p, RngSeed::new(cfg.seed()?, 0), &grid, cfg.coupling()?)?;
    let reference = solve_y(&c, &driver, p.horizon / m as f64)?;
    let euler = euler_y(&c, n, m, &driver)?;
    let flow = HFlow::new(c.clone(), DEFAULT_FLOW_TOL);
    let grid_h = EulerGridH::new(c.clone(), n);
    let x_tilde = compose_x(HEvaluator::Exact(&flow), &reference, &driver)?;
    let x_euler = compose_x(HEvaluator::Euler(&grid_h), &euler, &driver)?;
    let k_hat = lipschitz_audit(&driver, &p)?.k_hat;

    let mut out = Outcome::default();
    out.reports.push(validate_coeffs(&c, &symmetric_grid(10.0, 2001)));
    out.reports.extend(check_y_bounds(&c, n, m, p.beta, &driver, k_hat)?);
    out.file("driver.csv", driver.to_csv());
    out.file("y_reference.csv", reference.to_csv());
    out.file("x_tilde.csv", x_tilde.to_csv());
    out.file("x_euler.csv", x_euler.to_csv());
    Ok(out.with_reports_csv())
}

pub fn cmd_validate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let registry = CoefficientRegistry::default();
    let c = cfg.coefficients(&registry)?;
    let spec = cfg.sample_spec()?;
    let seed = cfg.seed()?;
    let mut out = Outcome::default();

    out.reports.push(validate_coeffs(&c, &symmetric_grid(10.0, 2001)));
    out.reports.extend(check_h_bounds(&c, &spec)?);
    out.reports.push(check_arctan_inverse_floor(&SampleSpec {
        points: spec.points,
        ..arctan_sample_spec()
    })?);
    for (n, l) in cfg.pair_list("euler_pairs")? {
        out.reports.push(check_h_euler_bound(&c, n, l)?);
    }
    out.reports.push(check_h_euler_order(
        &c,
        cfg.u64("euler_order_n")?,
        &cfg.u64_list("euler_order_ls")?,
        cfg.f64("order_floor")?,
    )?);

    let lip_ns = cfg.u64_list("lipschitz_ns")?;
    let base = cfg.params(*lip_ns.first().unwrap_or(&cfg.u64("n")?))?;
    let (_, lip) = lipschitz_experiment(&base, &lip_ns, seed, cfg.f64("lipschitz_max_ratio")?)?;
    out.reports.push(lip);

    let paths = cfg.usize("validate_paths")? as u64;
    let coupling = cfg.coupling()?;
    for n in cfg.u64_list("validate_ns")? {
        let p = cfg.params(n)?;
        let m = cfg.m_for(n)?;
        let grid = uniform_grid(p.horizon, m as usize);
        for r in 0..paths {
            let driver = sample_bn(&p, RngSeed::new(seed, r), &grid, coupling)?;
            let k_hat = lipschitz_audit(&driver, &p)?.k_hat;
            out.reports.extend(check_y_bounds(&c, n, m, p.beta, &driver, k_hat)?);
        }
    }
    Ok(out.with_reports_csv())
}

pub fn cmd_converge(cfg: &ExperimentConfig) -> Result<Outcome> {
    let registry = CoefficientRegistry::default();
    let ns = cfg.u64_list("n_sweep")?;
    let base = cfg.params(*ns.first().unwrap_or(&cfg.u64("n")?))?;
    let conv = ConvergenceConfig {
        base,
        ns,
        m: if cfg.raw("m").is_empty() { None } else { Some(cfg.u64("m")?) },
        replicas: cfg.usize("replicas")?,
        master_seed: cfg.seed()?,
        coeffs: cfg.coefficients(&registry)?,
        coupling: cfg.coupling()?,
    };
    let outcome = convergence_experiment(&conv)?;
    let cov = covariance_experiment(
        &cfg.params(cfg.u64("cov_n")?)?,
        cfg.usize("cov_replicas")?,
        &cfg.f64_list("cov_grid")?,
        conv.master_seed,
        cfg.covariance_tolerance()?,
    )?;

    let mut out = Outcome::default();
    if let Some(fit) = outcome.x_table.fit {
        out.notes.push(format!(
            "X error: slope {:.4}, intercept {:.4}, residual {:.3e}",
            fit.slope, fit.intercept, fit.residual
        ));
    }
    if let Some(fit) = outcome.y_table.fit {
        out.notes.push(format!("Y error: slope {:.4}", fit.slope));
    }
    let exact_case = outcome.x_table.rows.iter().all(|r| r.max_err <= 1e-10);
    if exact_case {
        out.notes
            .push("errors at rounding level: the scheme is exact for these coefficients, slope check skipped".into());
    } else {
        out.reports.push(slope_report("x_rate_slope", &outcome.x_table, cfg.f64("max_slope")?));
    }
    out.reports.extend(outcome.reports);
    out.reports.push(cov);
    out.file("rate_table.csv", outcome.x_table.to_csv());
    out.file("rate_table_y.csv", outcome.y_table.to_csv());
    if cfg.bool("svg")? {
        out.file("rate_plot.svg", outcome.x_table.to_svg());
    }
    Ok(out.with_reports_csv())
}
