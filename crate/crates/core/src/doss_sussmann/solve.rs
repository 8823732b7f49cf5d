//! The random ODE `Y' = f(Y, B_t)` and the composition `X = h(Y, B)`.

use std::fmt::{self, Write as _};

use crate::doss_sussmann::coeffs::{symmetric_grid, validate_coeffs, CoefficientSet};
use crate::doss_sussmann::flow::{f_euler, f_exact, EulerGridH, HFlow, DEFAULT_FLOW_TOL};
use crate::error::{Error, Result};
use crate::fbm::{DriverKind, DriverPath};
use crate::ode::rk4_step;

/// Which scheme produced a [`SolutionPath`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// RK4 solution of `Y' = f(Y, B_t)` with the exact flow.
    ReferenceY,
    /// Euler scheme with `f^n` and `m` time steps.
    EulerY { n: u64, m: u64 },
    /// Exact flow composed with a solution driven by an exact fBm sample, or
    /// with an Euler `Y`.
    XExactH,
    /// `h^n(Y^{n,m}, B^n)`; the default pairing is `m = n²`.
    XEuler { n: u64, m: u64 },
    /// `h(Y^n, B^n)` with the reference `Y`.
    XTilde { n: u64 },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::ReferenceY => f.write_str("reference-Y"),
            Provenance::EulerY { n, m } => write!(f, "euler-Y(n={n},m={m})"),
            Provenance::XExactH => f.write_str("X-exact-h"),
            Provenance::XEuler { n, m } => write!(f, "X-euler(n={n},m={m})"),
            Provenance::XTilde { n } => write!(f, "X-tilde(n={n})"),
        }
    }
}

/// A solution sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPath {
    pub grid: Vec<f64>,
    pub y: Option<Vec<f64>>,
    pub x: Option<Vec<f64>>,
    pub provenance: Provenance,
}

impl SolutionPath {
    /// The X series if present, else Y.
    pub fn primary(&self) -> &[f64] {
        self.x.as_deref().or(self.y.as_deref()).unwrap_or(&[])
    }

    /// CSV with a provenance header and columns `t,Y,X`; absent series are
    /// left empty.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# provenance={}\nt,Y,X\n", self.provenance);
        for (i, t) in self.grid.iter().enumerate() {
            let y = self.y.as_ref().map(|v| v[i].to_string()).unwrap_or_default();
            let x = self.x.as_ref().map(|v| v[i].to_string()).unwrap_or_default();
            let _ = writeln!(out, "{t},{y},{x}");
        }
        out
    }
}

fn check_coeffs(c: &CoefficientSet) -> Result<()> {
    let report = validate_coeffs(c, &symmetric_grid(10.0, 2001));
    if !report.pass {
        return Err(Error::invalid("coefficients", report.context));
    }
    Ok(())
}

fn step_count(horizon: f64, step: f64) -> Result<usize> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid("step", format!("must be positive, got {step}")));
    }
    let k = (horizon / step).round();
    if k < 1.0 || ((k * step - horizon).abs() > 1e-9 * horizon.max(1.0)) {
        return Err(Error::invalid(
            "step",
            format!("{step} does not divide the horizon {horizon}"),
        ));
    }
    Ok(k as usize)
}

/// Reference solution of `Y' = f(Y, B_t)` by classical RK4 with the driver
/// linearly interpolated. The output grid is the RK4 grid.
pub fn solve_y(c: &CoefficientSet, driver: &DriverPath, step: f64) -> Result<SolutionPath> {
    solve_y_with_tol(c, driver, step, DEFAULT_FLOW_TOL)
}

/// [`solve_y`] with an explicit flow tolerance.
pub fn solve_y_with_tol(c: &CoefficientSet, driver: &DriverPath, step: f64, tol: f64) -> Result<SolutionPath> {
    check_coeffs(c)?;
    let horizon = driver.horizon();
    let k = step_count(horizon, step)?;
    let h = horizon / k as f64;
    let rhs = |t: f64, y: f64| -> Result<f64> {
        let b = driver.value_at(t.min(horizon))?;
        f_exact(c, y, b, tol)
    };
    let mut grid = Vec::with_capacity(k + 1);
    let mut ys = Vec::with_capacity(k + 1);
    let mut y = c.x0;
    grid.push(0.0);
    ys.push(y);
    for i in 0..k {
        let t = i as f64 * h;
        y = rk4_step(&rhs, t, y, h)?;
        grid.push((i + 1) as f64 * h);
        ys.push(y);
    }
    Ok(SolutionPath {
        grid,
        y: Some(ys),
        x: None,
        provenance: Provenance::ReferenceY,
    })
}

/// Euler scheme `Y_{k+1} = Y_k + r_m f^n(Y_k, B_{t_k})` with `r_m = T/m`.
pub fn euler_y(c: &CoefficientSet, n: u64, m: u64, driver: &DriverPath) -> Result<SolutionPath> {
    if m == 0 {
        return Err(Error::invalid("m", "must be positive"));
    }
    let horizon = driver.horizon();
    let r = horizon / m as f64;
    let mut grid = Vec::with_capacity(m as usize + 1);
    let mut ys = Vec::with_capacity(m as usize + 1);
    let mut y = c.x0;
    for k in 0..=m {
        let t = if k == m { horizon } else { k as f64 * r };
        grid.push(t);
        ys.push(y);
        if k < m {
            let b = driver.value_at(t)?;
            y += r * f_euler(c, n, y, b);
        }
    }
    Ok(SolutionPath {
        grid,
        y: Some(ys),
        x: None,
        provenance: Provenance::EulerY { n, m },
    })
}

/// Which flow to compose with.
#[derive(Debug, Clone, Copy)]
pub enum HEvaluator<'a> {
    Exact(&'a HFlow),
    Euler(&'a EulerGridH),
}

fn same_grid(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0))
}

/// Pointwise `X_t = h(Y_t, B_t)` on the shared grid.
pub fn compose_x(h: HEvaluator<'_>, y: &SolutionPath, driver: &DriverPath) -> Result<SolutionPath> {
    let ys = y
        .y
        .as_ref()
        .ok_or_else(|| Error::Configuration("composition needs a Y series".into()))?;
    if !same_grid(&y.grid, &driver.grid) {
        return Err(Error::Configuration(format!(
            "Y grid ({} points) and driver grid ({} points) differ",
            y.grid.len(),
            driver.grid.len()
        )));
    }
    let n_of_driver = driver.params.map(|p| p.n);
    let (xs, provenance) = match h {
        HEvaluator::Exact(flow) => {
            let xs = ys
                .iter()
                .zip(&driver.values)
                .map(|(&yv, &b)| flow.h(yv, b))
                .collect::<Result<Vec<f64>>>()?;
            let provenance = match (y.provenance, driver.kind, n_of_driver) {
                (Provenance::ReferenceY, DriverKind::TransportApprox, Some(n)) => Provenance::XTilde { n },
                _ => Provenance::XExactH,
            };
            (xs, provenance)
        }
        HEvaluator::Euler(grid_h) => {
            let Provenance::EulerY { n, m } = y.provenance else {
                return Err(Error::Configuration(
                    "the Euler flow composes with an Euler Y solution".into(),
                ));
            };
            if n != grid_h.n {
                return Err(Error::Configuration(format!(
                    "Euler flow resolution {} differs from the Y scheme's n = {n}",
                    grid_h.n
                )));
            }
            let xs = ys.iter().zip(&driver.values).map(|(&yv, &b)| grid_h.h(yv, b)).collect();
            (xs, Provenance::XEuler { n, m })
        }
    };
    Ok(SolutionPath {
        grid: y.grid.clone(),
        y: Some(ys.clone()),
        x: Some(xs),
        provenance,
    })
}
