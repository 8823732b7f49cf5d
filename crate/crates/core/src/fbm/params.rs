use crate::error::{Error, Result};

/// Default left endpoint of the finite history window.
pub const DEFAULT_A: f64 = -1.0;

/// Parameters of the transport approximation of fBm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxParams {
    pub hurst: f64,
    pub beta: f64,
    pub delta: f64,
    /// Left end of the finite history window, negative.
    pub a: f64,
    /// Transport speed.
    pub n: u64,
    pub horizon: f64,
}

impl ApproxParams {
    /// Validated constructor.
    pub fn new(hurst: f64, beta: f64, delta: f64, a: f64, n: u64, horizon: f64) -> Result<Self> {
        let p = Self {
            hurst,
            beta,
            delta,
            a,
            n,
            horizon,
        };
        p.validate()?;
        Ok(p)
    }

    /// `a = -1`, unit horizon and the midpoint default for `delta`.
    pub fn with_defaults(hurst: f64, beta: f64, n: u64) -> Result<Self> {
        Self::new(hurst, beta, default_delta(beta), DEFAULT_A, n, 1.0)
    }

    pub fn with_n(&self, n: u64) -> Result<Self> {
        Self::new(self.hurst, self.beta, self.delta, self.a, n, self.horizon)
    }

    pub fn validate(&self) -> Result<()> {
        let Self {
            hurst,
            beta,
            delta,
            a,
            n,
            horizon,
        } = *self;
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::invalid("hurst", format!("must lie in (0, 1), got {hurst}")));
        }
        if hurst == 0.5 {
            return Err(Error::invalid("hurst", "H = 1/2 has no transport approximation here"));
        }
        let gap = (hurst - 0.5).abs();
        if !(beta > gap && beta < 0.5) {
            return Err(Error::invalid(
                "beta",
                format!("need |H - 1/2| = {gap} < beta < 1/2, got {beta}"),
            ));
        }
        if !(delta > 0.0 && delta < beta) {
            return Err(Error::invalid("delta", format!("need 0 < delta < beta, got {delta}")));
        }
        if !(beta + delta < 0.5) {
            return Err(Error::invalid(
                "delta",
                format!("need beta + delta < 1/2, got {}", beta + delta),
            ));
        }
        if !(a < 0.0 && a.is_finite()) {
            return Err(Error::invalid("a", format!("must be negative, got {a}")));
        }
        if n == 0 {
            return Err(Error::invalid("n", "must be positive"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("horizon", format!("must be positive, got {horizon}")));
        }
        let eps = self.epsilon_n();
        let floor = a.max(1.0 / a);
        if !(eps > floor && eps < 0.0) {
            return Err(Error::invalid(
                "n",
                format!("cutoff {eps} must lie in ({floor}, 0); increase n"),
            ));
        }
        Ok(())
    }

    /// Cutoff level `-n^(-beta / |H - 1/2|)`.
    pub fn epsilon_n(&self) -> f64 {
        epsilon_n(self.hurst, self.beta, self.n)
    }

    pub fn q(&self) -> f64 {
        self.hurst - 0.5
    }

    /// `n^(1 + beta)`, the scale of the driver's Lipschitz constant.
    pub fn lipschitz_scale(&self) -> f64 {
        (self.n as f64).powf(1.0 + self.beta)
    }
}

/// `-n^(-beta / |H - 1/2|)`.
pub fn epsilon_n(hurst: f64, beta: f64, n: u64) -> f64 {
    -(n as f64).powf(-beta / (hurst - 0.5).abs())
}

/// Midpoint of the admissible range `(0, min(beta, 1/2 - beta))`.
pub fn default_delta(beta: f64) -> f64 {
    0.5 * beta.min(0.5 - beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cutoff_examples() {
        let p = ApproxParams::with_defaults(0.75, 0.4, 10).unwrap();
        assert_relative_eq!(p.epsilon_n(), -(10f64.powf(-1.6)), max_relative = 1e-15);
        assert_relative_eq!(p.epsilon_n(), -0.025119, epsilon = 1e-6);
        assert_eq!(epsilon_n(0.3, 0.25, 16), -0.03125);
    }

    #[test]
    fn constraint_chain_rejected() {
        assert!(matches!(
            ApproxParams::with_defaults(0.5, 0.3, 10),
            Err(Error::InvalidParameter { name: "hurst", .. })
        ));
        assert!(matches!(
            ApproxParams::with_defaults(0.9, 0.3, 10),
            Err(Error::InvalidParameter { name: "beta", .. })
        ));
        assert!(matches!(
            ApproxParams::new(0.75, 0.3, 0.25, -1.0, 10, 1.0),
            Err(Error::InvalidParameter { name: "delta", .. })
        ));
        assert!(matches!(
            ApproxParams::new(0.75, 0.3, 0.05, 1.0, 10, 1.0),
            Err(Error::InvalidParameter { name: "a", .. })
        ));
        // n = 1 puts the cutoff on a = -1
        assert!(matches!(
            ApproxParams::with_defaults(0.75, 0.3, 1),
            Err(Error::InvalidParameter { name: "n", .. })
        ));
    }
}
