use crate::error::{Error, Result};
use crate::fbm::driver::{max_grid_slope, DriverKind, DriverPath};
use crate::fbm::params::ApproxParams;
use crate::report::BoundReport;

/// Grid Lipschitz constant of a transport-approx driver, rescaled by
/// `n^(1 + beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzAudit {
    pub n: u64,
    pub beta: f64,
    /// `max |Δv| / Δt` over the grid.
    pub max_slope: f64,
    /// `max_slope / n^(1 + beta)`.
    pub k_hat: f64,
}

impl LipschitzAudit {
    pub fn scale(&self) -> f64 {
        (self.n as f64).powf(1.0 + self.beta)
    }

    /// `max_slope <= k_hat n^(1+beta)`; holds by construction up to rounding.
    pub fn report(&self) -> BoundReport {
        let bound = self.k_hat * self.scale() * (1.0 + 4.0 * f64::EPSILON);
        BoundReport::new(
            "grid_lipschitz",
            self.max_slope,
            bound,
            format!("n={} beta={} k_hat={}", self.n, self.beta, self.k_hat),
        )
    }
}

pub fn lipschitz_audit(driver: &DriverPath, params: &ApproxParams) -> Result<LipschitzAudit> {
    if driver.kind != DriverKind::TransportApprox {
        return Err(Error::NotApplicable(format!(
            "Lipschitz audit needs a transport-approx driver, got {}",
            driver.kind
        )));
    }
    let max_slope = max_grid_slope(&driver.grid, &driver.values);
    Ok(LipschitzAudit {
        n: params.n,
        beta: params.beta,
        max_slope,
        k_hat: max_slope / params.lipschitz_scale(),
    })
}

/// Across an n-sweep, the spread `max k_hat / min k_hat` must stay below
/// `max_ratio`.
pub fn lipschitz_sweep(audits: &[LipschitzAudit], max_ratio: f64) -> Result<BoundReport> {
    if audits.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "a growth check needs at least 2 sweep points, got {}",
            audits.len()
        )));
    }
    let hi = audits.iter().map(|a| a.k_hat).fold(f64::NEG_INFINITY, f64::max);
    let lo = audits.iter().map(|a| a.k_hat).fold(f64::INFINITY, f64::min);
    let ratio = if hi == 0.0 { 1.0 } else { hi / lo };
    let listing: Vec<String> = audits.iter().map(|a| format!("{}:{:.4}", a.n, a.k_hat)).collect();
    Ok(BoundReport::new(
        "lipschitz_growth",
        ratio,
        max_ratio,
        format!("k_hat by n [{}]", listing.join(" ")),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::driver::uniform_grid;

    fn flat(p: &ApproxParams, kind: DriverKind) -> DriverPath {
        let grid = uniform_grid(1.0, 10);
        DriverPath {
            values: vec![0.0; grid.len()],
            grid,
            kind,
            hurst: p.hurst,
            params: Some(*p),
            seed: None,
            lipschitz_certificate: None,
        }
    }

    #[test]
    fn zero_driver_has_zero_constant() {
        let p = ApproxParams::with_defaults(0.75, 0.3, 8).unwrap();
        let a = lipschitz_audit(&flat(&p, DriverKind::TransportApprox), &p).unwrap();
        assert_eq!(a.k_hat, 0.0);
        assert!(a.report().pass);
    }

    #[test]
    fn exact_driver_not_applicable() {
        let p = ApproxParams::with_defaults(0.75, 0.3, 8).unwrap();
        assert!(matches!(
            lipschitz_audit(&flat(&p, DriverKind::ExactFbm), &p),
            Err(Error::NotApplicable(_))
        ));
    }
}
