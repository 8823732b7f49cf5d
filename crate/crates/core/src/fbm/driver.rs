use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::fbm::params::ApproxParams;
use crate::rng::RngSeed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriverKind {
    TransportApprox,
    ExactFbm,
}

impl fmt::Display for DriverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DriverKind::TransportApprox => "transport-approx",
            DriverKind::ExactFbm => "exact-fbm",
        })
    }
}

/// A driving path sampled on a time grid, linearly interpolated in between.
#[derive(Debug, Clone, PartialEq)]
pub struct DriverPath {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: DriverKind,
    pub hurst: f64,
    /// Present for transport-approx drivers.
    pub params: Option<ApproxParams>,
    pub seed: Option<RngSeed>,
    /// Largest grid slope `|Δv| / Δt`, for transport-approx drivers.
    pub lipschitz_certificate: Option<f64>,
}

/// `m + 1` equally spaced points on `[0, horizon]`.
pub fn uniform_grid(horizon: f64, m: usize) -> Vec<f64> {
    let m = m.max(1);
    (0..=m).map(|k| horizon * k as f64 / m as f64).collect()
}

pub(crate) fn check_grid(grid: &[f64], horizon: Option<f64>) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Configuration("empty time grid".into()));
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::Configuration(format!(
            "time grid must be strictly increasing, found {} then {}",
            w[0], w[1]
        )));
    }
    if !(grid[0] >= 0.0) {
        return Err(Error::Configuration(format!("grid starts at negative time {}", grid[0])));
    }
    if let Some(h) = horizon {
        let last = *grid.last().unwrap_or(&0.0);
        if last > h * (1.0 + 1e-12) {
            return Err(Error::Configuration(format!("grid reaches {last} beyond horizon {h}")));
        }
    }
    Ok(())
}

/// Largest `|v[i+1] - v[i]| / (t[i+1] - t[i])`.
pub fn max_grid_slope(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| (v[1] - v[0]).abs() / (t[1] - t[0]))
        .fold(0.0, f64::max)
}

/// Linear interpolation of `(grid, values)` at `t`.
pub fn interpolate(grid: &[f64], values: &[f64], t: f64) -> Result<f64> {
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    if !(t >= lo && t <= hi) {
        return Err(Error::Domain(format!("t = {t} outside grid range [{lo}, {hi}]")));
    }
    let i = grid.partition_point(|g| *g <= t);
    if i == 0 {
        return Ok(values[0]);
    }
    if i == grid.len() {
        return Ok(values[grid.len() - 1]);
    }
    let (t0, t1) = (grid[i - 1], grid[i]);
    let w = (t - t0) / (t1 - t0);
    Ok(values[i - 1] + w * (values[i] - values[i - 1]))
}

impl DriverPath {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.grid.last().unwrap_or(&0.0)
    }

    pub fn value_at(&self, t: f64) -> Result<f64> {
        interpolate(&self.grid, &self.values, t)
    }

    /// Maximum of |value| over the grid (exact for the interpolant).
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// CSV with `#` metadata lines and columns `t,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# kind={}", self.kind);
        let _ = writeln!(out, "# H={}", self.hurst);
        if let Some(p) = &self.params {
            let _ = writeln!(out, "# beta={}", p.beta);
            let _ = writeln!(out, "# a={}", p.a);
            let _ = writeln!(out, "# n={}", p.n);
            let _ = writeln!(out, "# T={}", p.horizon);
        }
        if let Some(s) = &self.seed {
            let _ = writeln!(out, "# seed={}:{}", s.master_seed, s.stream_index);
        }
        out.push_str("t,value\n");
        for (t, v) in self.grid.iter().zip(&self.values) {
            let _ = writeln!(out, "{t},{v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_bounds() {
        let g = [0.0, 0.5, 1.0];
        let v = [0.0, 1.0, -1.0];
        assert_eq!(interpolate(&g, &v, 0.25).unwrap(), 0.5);
        assert_eq!(interpolate(&g, &v, 1.0).unwrap(), -1.0);
        assert_eq!(interpolate(&g, &v, 0.75).unwrap(), 0.0);
        assert!(interpolate(&g, &v, 1.5).is_err());
        assert_eq!(max_grid_slope(&g, &v), 4.0);
    }

    #[test]
    fn grid_checks() {
        assert!(check_grid(&[0.0, 0.5, 0.5], None).is_err());
        assert!(check_grid(&[0.0, 2.0], Some(1.0)).is_err());
        assert!(check_grid(&uniform_grid(1.0, 8), Some(1.0)).is_ok());
        assert_eq!(uniform_grid(2.0, 4), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }
}
