use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::report::BoundReport;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Coefficients `σ`, `b` of the SDE with their derivatives and declared bounds.
///
/// The bounds are `|b| <= m1`, `|σ'| <= m2`, `|σ''| <= m3`, `|b'| <= m4`
/// (hence `b` is `m4`-Lipschitz) and `|σ| <= m5`.
#[derive(Clone)]
pub struct CoefficientSet {
    pub name: String,
    pub sigma: ScalarFn,
    pub dsigma: ScalarFn,
    pub d2sigma: ScalarFn,
    pub b: ScalarFn,
    pub db: ScalarFn,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    pub m5: f64,
    pub x0: f64,
}

impl fmt::Debug for CoefficientSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSet")
            .field("name", &self.name)
            .field("m1", &self.m1)
            .field("m2", &self.m2)
            .field("m3", &self.m3)
            .field("m4", &self.m4)
            .field("m5", &self.m5)
            .field("x0", &self.x0)
            .finish_non_exhaustive()
    }
}

fn constant(c: f64) -> ScalarFn {
    Arc::new(move |_| c)
}

impl CoefficientSet {
    /// `max(m2, m5)`.
    pub fn m_bar(&self) -> f64 {
        self.m2.max(self.m5)
    }

    /// `max(m1, ..., m5)`.
    pub fn m_max(&self) -> f64 {
        [self.m1, self.m2, self.m3, self.m4, self.m5]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    /// `σ ≡ c`, `b ≡ b0`.
    pub fn linear(b0: f64, c: f64, x0: f64) -> Self {
        Self {
            name: "linear".into(),
            sigma: constant(c),
            dsigma: constant(0.0),
            d2sigma: constant(0.0),
            b: constant(b0),
            db: constant(0.0),
            m1: b0.abs(),
            m2: 0.0,
            m3: 0.0,
            m4: 0.0,
            m5: c.abs(),
            x0,
        }
    }

    /// `σ = sin`, `b = cos`, all bounds 1.
    pub fn sin_cos(x0: f64) -> Self {
        Self {
            name: "sin-cos".into(),
            sigma: Arc::new(f64::sin),
            dsigma: Arc::new(f64::cos),
            d2sigma: Arc::new(|x: f64| -x.sin()),
            b: Arc::new(f64::cos),
            db: Arc::new(|x: f64| -x.sin()),
            m1: 1.0,
            m2: 1.0,
            m3: 1.0,
            m4: 1.0,
            m5: 1.0,
            x0,
        }
    }

    /// `σ = arctan`, `b = cos`. `|σ''|` peaks at `3√3/8`.
    pub fn arctan_demo(x0: f64) -> Self {
        Self {
            name: "arctan-demo".into(),
            sigma: Arc::new(f64::atan),
            dsigma: Arc::new(|x: f64| 1.0 / (1.0 + x * x)),
            d2sigma: Arc::new(|x: f64| -2.0 * x / ((1.0 + x * x) * (1.0 + x * x))),
            b: Arc::new(f64::cos),
            db: Arc::new(|x: f64| -x.sin()),
            m1: 1.0,
            m2: 1.0,
            m3: 3.0 * 3f64.sqrt() / 8.0,
            m4: 1.0,
            m5: std::f64::consts::FRAC_PI_2,
            x0,
        }
    }
}

/// Arguments shared by preset constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresetArgs {
    pub b0: f64,
    pub c: f64,
    pub x0: f64,
}

impl Default for PresetArgs {
    fn default() -> Self {
        Self {
            b0: 1.0,
            c: 1.0,
            x0: 0.1,
        }
    }
}

pub type PresetFn = fn(&PresetArgs) -> CoefficientSet;

/// Named coefficient presets; users can register their own.
#[derive(Clone)]
pub struct CoefficientRegistry {
    presets: BTreeMap<String, PresetFn>,
}

impl Default for CoefficientRegistry {
    fn default() -> Self {
        let mut r = Self {
            presets: BTreeMap::new(),
        };
        r.register("linear", |a| CoefficientSet::linear(a.b0, a.c, a.x0));
        r.register("sin-cos", |a| CoefficientSet::sin_cos(a.x0));
        r.register("arctan-demo", |a| CoefficientSet::arctan_demo(a.x0));
        r
    }
}

impl CoefficientRegistry {
    pub fn register(&mut self, name: &str, ctor: PresetFn) {
        self.presets.insert(name.to_string(), ctor);
    }

    pub fn names(&self) -> Vec<&str> {
        self.presets.keys().map(String::as_str).collect()
    }

    pub fn build(&self, name: &str, args: &PresetArgs) -> Result<CoefficientSet> {
        let ctor = self.presets.get(name).ok_or_else(|| {
            Error::Configuration(format!(
                "unknown coefficient preset `{name}` (known: {})",
                self.names().join(", ")
            ))
        })?;
        Ok(ctor(args))
    }
}

/// Evenly spaced sample grid on `[-half_width, half_width]`.
pub fn symmetric_grid(half_width: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points)
        .map(|i| -half_width + 2.0 * half_width * i as f64 / (points - 1) as f64)
        .collect()
}

/// Samples `|σ|, |σ'|, |σ''|, |b|, |b'|` on `sample_grid` and compares them
/// with the declared bounds.
///
/// `measured` is the largest sampled value over the worst quantity and
/// `bound` its declared bound; the context lists every violated quantity
/// with a witness point.
pub fn validate_coeffs(c: &CoefficientSet, sample_grid: &[f64]) -> BoundReport {
    let checks: [(&str, &ScalarFn, f64); 5] = [
        ("|b|<=M1", &c.b, c.m1),
        ("|sigma'|<=M2", &c.dsigma, c.m2),
        ("|sigma''|<=M3", &c.d2sigma, c.m3),
        ("|b'|<=M4", &c.db, c.m4),
        ("|sigma|<=M5", &c.sigma, c.m5),
    ];
    let mut worst: Option<(f64, f64, f64)> = None;
    let mut violations = Vec::new();
    for (label, f, bound) in checks {
        let mut peak = (0.0_f64, f64::NAN);
        for &x in sample_grid {
            let v = f(x).abs();
            let v = if v.is_nan() { f64::INFINITY } else { v };
            if v >= peak.0 {
                peak = (v, x);
            }
        }
        let excess = peak.0 - bound;
        if !(excess <= 0.0) {
            violations.push(format!("{label} fails at x={} ({} > {bound})", peak.1, peak.0));
        }
        if worst.is_none_or(|(e, _, _)| !(excess <= e)) {
            worst = Some((excess, peak.0, bound));
        }
    }
    let (_, measured, bound) = worst.unwrap_or((0.0, 0.0, 0.0));
    let context = if violations.is_empty() {
        format!("preset={} points={}", c.name, sample_grid.len())
    } else {
        format!("preset={} {}", c.name, violations.join("; "))
    };
    BoundReport::new("coefficient_bounds", measured, bound, context)
}
