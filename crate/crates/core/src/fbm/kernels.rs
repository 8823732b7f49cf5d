//! Mandelbrot–van Ness kernels and their antiderivatives.
//!
//! With `q = H - 1/2`:
//! * `f_t(s) = (t - s)^q - (-s)^q` for `s < 0 <= t`,
//! * `g_t(s) = (t - s)^q` for `s < t`,
//! * `ψ_t(s)`, the weight of the time-inverted history segment on `[1/a, 0)`.
//!
//! Differences of nearby powers are evaluated through `expm1`/`ln_1p` so that
//! far-history values (`|s| >> t`) keep full relative precision.

use crate::error::{Error, Result};
use crate::fbm::params::ApproxParams;
use crate::quadrature;
use crate::transport::Kernel;

fn check_hurst(hurst: f64) -> Result<()> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::Domain(format!("H = {hurst} outside (0, 1)")));
    }
    Ok(())
}

/// `(t - s)^p - (-s)^p` for `s < 0 <= t`, accurate for `-s >> t`.
#[inline]
fn power_gap(p: f64, t: f64, s: f64) -> f64 {
    let r = -s;
    r.powf(p) * (p * (t / r).ln_1p()).exp_m1()
}

/// `f_t(s)`.
pub fn kernel_f(hurst: f64, t: f64, s: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if !(t >= 0.0) || !(s < 0.0) {
        return Err(Error::Domain(format!("f_t(s) needs t >= 0 and s < 0, got t = {t}, s = {s}")));
    }
    Ok(power_gap(hurst - 0.5, t, s))
}

/// `g_t(s)`.
pub fn kernel_g(hurst: f64, t: f64, s: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if !(s < t) {
        return Err(Error::Domain(format!("g_t(s) needs s < t, got t = {t}, s = {s}")));
    }
    Ok((t - s).powf(hurst - 0.5))
}

/// `∂f_t/∂s = q[(-s)^(q-1) - (t - s)^(q-1)]`.
pub fn kernel_df(hurst: f64, t: f64, s: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if !(t >= 0.0) || !(s < 0.0) {
        return Err(Error::Domain(format!("∂f_t(s) needs t >= 0 and s < 0, got t = {t}, s = {s}")));
    }
    let q = hurst - 0.5;
    Ok(-q * power_gap(q - 1.0, t, s))
}

/// Covariance of fBm, `(s^2H + t^2H - |s - t|^2H) / 2`.
pub fn fbm_covariance(hurst: f64, s: f64, t: f64) -> Result<f64> {
    if !(s >= 0.0 && t >= 0.0) {
        return Err(Error::Domain(format!("times must be nonnegative, got s = {s}, t = {t}")));
    }
    let e = 2.0 * hurst;
    Ok(0.5 * (s.powf(e) + t.powf(e) - (s - t).abs().powf(e)))
}

/// The constant `C_H` making `Var(B^H_1) = 1`.
///
/// Integrates `f_1²` over `(-∞, 0)` (split at -1, the tail mapped by
/// `s = -1/w`) with tanh-sinh quadrature and adds `∫_0^1 g_1² = 1/(2H)`.
pub fn normalization_c(hurst: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if hurst == 0.5 {
        return Err(Error::Domain("C_H is not defined by this representation at H = 1/2".into()));
    }
    let q = hurst - 0.5;
    let tol = 1e-13;
    let near = quadrature::tanh_sinh(
        |s| {
            let v = power_gap(q, 1.0, s);
            v * v
        },
        -1.0,
        0.0,
        tol,
    )?;
    let tail = quadrature::tanh_sinh(
        |w: f64| {
            let v = power_gap(q, 1.0, -1.0 / w);
            v * v / (w * w)
        },
        0.0,
        1.0,
        tol,
    )?;
    Ok(1.0 / (near + tail + 1.0 / (2.0 * hurst)).sqrt())
}

/// Pointwise kernels for one Hurst index, with the normalisation constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSet {
    pub hurst: f64,
    pub c_h: f64,
}

impl KernelSet {
    pub fn new(hurst: f64) -> Result<Self> {
        Ok(Self {
            hurst,
            c_h: normalization_c(hurst)?,
        })
    }
    pub fn f(&self, t: f64, s: f64) -> Result<f64> {
        kernel_f(self.hurst, t, s)
    }
    pub fn g(&self, t: f64, s: f64) -> Result<f64> {
        kernel_g(self.hurst, t, s)
    }
    pub fn df(&self, t: f64, s: f64) -> Result<f64> {
        kernel_df(self.hurst, t, s)
    }
}

/// `g_t(s + shift) = (t - shift - s)^q` with antiderivative
/// `-(t - shift - s)^(q+1) / (q + 1)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ShiftedG {
    pub q: f64,
    /// `t - shift`.
    pub top: f64,
}

impl Kernel for ShiftedG {
    fn value(&self, s: f64) -> f64 {
        (self.top - s).powf(self.q)
    }
    fn primitive(&self, s: f64) -> Option<f64> {
        let d = (self.top - s).max(0.0);
        Some(-d.powf(self.q + 1.0) / (self.q + 1.0))
    }
}

/// `f_t` on `s <= 0` with antiderivative `[(-s)^(q+1) - (t-s)^(q+1)] / (q+1)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HistoryF {
    pub q: f64,
    pub t: f64,
}

impl Kernel for HistoryF {
    fn value(&self, s: f64) -> f64 {
        power_gap(self.q, self.t, s)
    }
    fn primitive(&self, s: f64) -> Option<f64> {
        let p = self.q + 1.0;
        if s >= 0.0 {
            return Some(-self.t.powf(p) / p);
        }
        Some(-power_gap(p, self.t, s) / p)
    }
}

/// Antiderivative of `u ↦ u ∂f_t(u)`:
/// `F(u) = q/(q+1) [(-u)^(q+1) - (t-u)^(q+1)] + t (t-u)^q`, for `u < 0`.
#[inline]
fn weighted_primitive(q: f64, t: f64, u: f64) -> f64 {
    let r = -u;
    let l = (t / r).ln_1p();
    r.powf(q) * (-q / (q + 1.0) * r * ((q + 1.0) * l).exp_m1() + t * (q * l).exp())
}

/// `ψ_t` on `[1/a, 0]` together with its antiderivative.
///
/// `ψ_t(s) = F(1/s') - F(a)` with `s' = min(s, ε_n)` when `H > 1/2` and
/// `s' = s` otherwise. An antiderivative is `Ψ(s) = s ψ_t(s) - f_t(1/s)`
/// below the cap and linear above it.
#[derive(Debug, Clone, Copy)]
pub struct ThirdSegment {
    q: f64,
    t: f64,
    a: f64,
    inv_a: f64,
    cap: Option<f64>,
    f_at_a: f64,
}

impl ThirdSegment {
    pub fn new(params: &ApproxParams, t: f64) -> Self {
        let q = params.q();
        Self {
            q,
            t,
            a: params.a,
            inv_a: 1.0 / params.a,
            cap: (q > 0.0).then(|| params.epsilon_n()),
            f_at_a: weighted_primitive(q, t, params.a),
        }
    }

    fn reciprocal(&self, s: f64) -> f64 {
        if s == self.inv_a {
            self.a
        } else {
            1.0 / s
        }
    }

    /// `ψ_t(s)` for `s` in `[1/a, 0]`; the value at 0 is the left limit.
    pub fn psi(&self, s: f64) -> f64 {
        let s = match self.cap {
            Some(c) => s.min(c),
            None => s,
        };
        if s >= 0.0 {
            // only reachable without a cap, where F(-∞) = 0
            return -self.f_at_a;
        }
        weighted_primitive(self.q, self.t, self.reciprocal(s)) - self.f_at_a
    }

    fn uncapped_primitive(&self, s: f64) -> f64 {
        if s >= 0.0 {
            return 0.0;
        }
        let u = self.reciprocal(s);
        let fu = if self.t == 0.0 { 0.0 } else { power_gap(self.q, self.t, u) };
        s * (weighted_primitive(self.q, self.t, u) - self.f_at_a) - fu
    }

    /// An antiderivative `Ψ` of `ψ_t` on `[1/a, 0]`.
    pub fn big_psi(&self, s: f64) -> f64 {
        match self.cap {
            Some(c) if s > c => self.uncapped_primitive(c) + (s - c) * self.psi(c),
            _ => self.uncapped_primitive(s),
        }
    }

    /// `∫_{1/a}^0 ψ_t(s) ds`.
    pub fn total_mass(&self) -> f64 {
        self.big_psi(0.0) - self.big_psi(self.inv_a)
    }
}

impl Kernel for ThirdSegment {
    fn value(&self, s: f64) -> f64 {
        self.psi(s)
    }
    fn primitive(&self, s: f64) -> Option<f64> {
        Some(self.big_psi(s))
    }
}

fn check_third_segment(params: &ApproxParams, t: f64, s: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t = {t} must be nonnegative")));
    }
    let lo = 1.0 / params.a;
    if !(s >= lo && s < 0.0) {
        return Err(Error::Domain(format!("s = {s} outside [{lo}, 0)")));
    }
    Ok(())
}

/// Inner weight of the time-inverted history segment at `(t, s)`, in
/// closed form.
pub fn third_segment_kernel(params: &ApproxParams, t: f64, s: f64) -> Result<f64> {
    check_third_segment(params, t, s)?;
    Ok(ThirdSegment::new(params, t).psi(s))
}

/// Same quantity as [`third_segment_kernel`] by adaptive quadrature of
/// `∫_a^{1/s'} u ∂f_t(u) du`, in the variable `x = ln(-u)`.
pub fn third_segment_kernel_quadrature(params: &ApproxParams, t: f64, s: f64, tol: f64) -> Result<f64> {
    check_third_segment(params, t, s)?;
    let s = if params.q() > 0.0 { s.min(params.epsilon_n()) } else { s };
    let q = params.q();
    let x_lo = (-params.a).ln();
    let x_hi = (-1.0 / s).ln();
    let integrand = |x: f64| {
        let r = x.exp();
        // u ∂f(u) du with u = -r, du = -r dx
        let df = -q * power_gap(q - 1.0, t, -r);
        (-r) * df * (-r)
    };
    quadrature::adaptive(integrand, x_lo, x_hi, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pointwise_examples() {
        assert_eq!(kernel_g(0.75, 2.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(kernel_f(0.75, 1.0, -1.0).unwrap(), 2f64.powf(0.25) - 1.0, max_relative = 1e-14);
        assert_relative_eq!(kernel_f(0.75, 1.0, -1.0).unwrap(), 0.18921, epsilon = 1e-5);
        assert_relative_eq!(kernel_g(0.3, 1.0, 0.5).unwrap(), 1.14870, epsilon = 1e-5);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(kernel_f(0.75, 1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(kernel_f(0.75, -1.0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(kernel_g(0.75, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(kernel_df(0.3, 1.0, 0.5), Err(Error::Domain(_))));
        assert!(matches!(normalization_c(0.5), Err(Error::Domain(_))));
        assert!(matches!(normalization_c(1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn far_history_decay() {
        for h in [0.3, 0.6, 0.75, 0.9] {
            let v = kernel_f(h, 1.0, -1e6).unwrap();
            assert!(v.abs() < 1e-3, "H = {h}: f_1(-1e6) = {v}");
        }
    }

    #[test]
    fn primitive_of_history_kernel_matches_value() {
        let k = HistoryF { q: 0.25, t: 0.7 };
        let h = 1e-6;
        for s in [-3.0, -1.0, -0.2] {
            let d = (k.primitive(s + h).unwrap() - k.primitive(s - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(d, k.value(s), max_relative = 1e-7);
        }
    }

    #[test]
    fn third_segment_vanishes_at_left_end_and_at_t_zero() {
        let p = ApproxParams::with_defaults(0.75, 0.3, 50).unwrap();
        assert_eq!(third_segment_kernel(&p, 0.6, -1.0).unwrap(), 0.0);
        assert_eq!(third_segment_kernel(&p, 0.0, -0.5).unwrap(), 0.0);
        assert!(third_segment_kernel(&p, 0.6, 0.0).is_err());
    }
}
