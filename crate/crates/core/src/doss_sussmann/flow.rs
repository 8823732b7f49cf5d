//! The flow `h(x, y)` of `∂h/∂y = σ(h)`, `h(x, 0) = x`, and its Euler
//! grid approximation.

use crate::doss_sussmann::coeffs::CoefficientSet;
use crate::error::{Error, Result};
use crate::ode::Dopri5;

/// Default tolerance of the flow integrator.
pub const DEFAULT_FLOW_TOL: f64 = 1e-12;

/// Flow value with the quantities needed by the derivative bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowValue {
    pub h: f64,
    /// `I = ∫_0^y σ'(h(x, u)) du`.
    pub integral: f64,
    /// `∂h/∂x = exp(I)`.
    pub dh_dx1: f64,
    /// `∂I/∂x = ∫_0^y σ''(h(x, u)) exp(I(x, u)) du`.
    pub di_dx1: f64,
}

impl FlowValue {
    /// `(∂h/∂x)^{-1} = exp(-I)`.
    pub fn inv_dh_dx1(&self) -> f64 {
        (-self.integral).exp()
    }
}

/// Integrates the augmented state `(h, I, ∂I/∂x)` in `y` with adaptive DOPRI5.
pub fn h_flow(c: &CoefficientSet, x: f64, y: f64, tol: f64) -> Result<FlowValue> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::Domain(format!("flow needs finite arguments, got ({x}, {y})")));
    }
    let state = if y == 0.0 {
        [x, 0.0, 0.0]
    } else {
        let rhs = |_u: f64, s: &[f64; 3]| [(c.sigma)(s[0]), (c.dsigma)(s[0]), (c.d2sigma)(s[0]) * s[1].exp()];
        Dopri5::new(tol).solve(rhs, 0.0, [x, 0.0, 0.0], y)?
    };
    Ok(FlowValue {
        h: state[0],
        integral: state[1],
        dh_dx1: state[1].exp(),
        di_dx1: state[2],
    })
}

/// `exp(-I(x, y)) b(h(x, y))`, the drift of the random ODE for `Y`.
pub fn f_exact(c: &CoefficientSet, x: f64, y: f64, tol: f64) -> Result<f64> {
    let v = h_flow(c, x, y, tol)?;
    Ok(v.inv_dh_dx1() * (c.b)(v.h))
}

/// Reusable exact-flow evaluator.
#[derive(Debug, Clone)]
pub struct HFlow {
    pub coeffs: CoefficientSet,
    pub tol: f64,
}

impl HFlow {
    pub fn new(coeffs: CoefficientSet, tol: f64) -> Self {
        Self { coeffs, tol }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<FlowValue> {
        h_flow(&self.coeffs, x, y, self.tol)
    }

    pub fn h(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.eval(x, y)?.h)
    }

    pub fn f(&self, x: f64, y: f64) -> Result<f64> {
        f_exact(&self.coeffs, x, y, self.tol)
    }
}

fn in_square(n: u64, x: f64, y: f64) -> bool {
    let n = n as f64;
    x.abs() <= n && y.abs() <= n
}

/// Walks the Euler recursion of step `1/n` from `y = 0` towards `y`.
///
/// Calls `cell(h_start, width)` for every full or partial cell traversed and
/// returns the interpolated value at `y`. Assumes `(x, y)` in the square.
fn euler_walk<F: FnMut(f64, f64)>(c: &CoefficientSet, n: u64, x: f64, y: f64, mut cell: F) -> f64 {
    let r = 1.0 / n as f64;
    let dir = if y < 0.0 { -1.0 } else { 1.0 };
    let reach = y.abs();
    let steps = ((reach * n as f64).floor() as u64).min(n * n);
    let mut h = x;
    for _ in 0..steps {
        cell(h, r);
        h += dir * r * (c.sigma)(h);
    }
    let rest = reach - steps as f64 * r;
    if rest > 0.0 {
        cell(h, rest);
        h += dir * rest * (c.sigma)(h);
    }
    h
}

/// `h^n(x, y)`: Euler recursion with step `1/n` on `[-n, n]`, linear in `y`
/// inside each cell, and 0 outside the square `[-n, n]²`.
pub fn h_euler(c: &CoefficientSet, n: u64, x: f64, y: f64) -> f64 {
    if n == 0 || !in_square(n, x, y) {
        return 0.0;
    }
    euler_walk(c, n, x, y, |_, _| {})
}

/// `exp(-∫_0^y σ'(h^n(x, u)) du) b(h^n(x, y))`.
///
/// `h^n(x, ·)` is linear inside each grid cell, so the integral is taken by
/// Simpson's rule cell by cell. Where `h^n` vanishes (outside the square) the
/// integrand is the constant `σ'(0)`.
pub fn f_euler(c: &CoefficientSet, n: u64, x: f64, y: f64) -> f64 {
    if n == 0 {
        return (-(c.dsigma)(0.0) * y).exp() * (c.b)(0.0);
    }
    let nf = n as f64;
    let dir = if y < 0.0 { -1.0 } else { 1.0 };
    let mut integral = 0.0;
    let h_end;
    if x.abs() > nf {
        integral = (c.dsigma)(0.0) * y;
        h_end = 0.0;
    } else {
        let inside = y.clamp(-nf, nf);
        let h_inside = euler_walk(c, n, x, inside, |h0, w| {
            let slope = dir * (c.sigma)(h0);
            let mid = h0 + 0.5 * w * slope;
            let end = h0 + w * slope;
            let s = w / 6.0 * ((c.dsigma)(h0) + 4.0 * (c.dsigma)(mid) + (c.dsigma)(end));
            integral += dir * s;
        });
        if y.abs() > nf {
            integral += (c.dsigma)(0.0) * (y - inside);
            h_end = 0.0;
        } else {
            h_end = h_inside;
        }
    }
    (-integral).exp() * (c.b)(h_end)
}

/// Reusable Euler-grid evaluator for a fixed resolution `n`.
#[derive(Debug, Clone)]
pub struct EulerGridH {
    pub coeffs: CoefficientSet,
    pub n: u64,
}

impl EulerGridH {
    pub fn new(coeffs: CoefficientSet, n: u64) -> Self {
        Self { coeffs, n }
    }

    pub fn h(&self, x: f64, y: f64) -> f64 {
        h_euler(&self.coeffs, self.n, x, y)
    }

    pub fn f(&self, x: f64, y: f64) -> f64 {
        f_euler(&self.coeffs, self.n, x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_sigma_is_a_translation() {
        let c = CoefficientSet::linear(0.3, 0.7, 0.0);
        let v = h_flow(&c, 1.5, -2.0, 1e-12).unwrap();
        assert_relative_eq!(v.h, 1.5 - 1.4, epsilon = 1e-12);
        assert_eq!(v.dh_dx1, 1.0);
        assert_relative_eq!(h_euler(&c, 4, 1.5, -2.3), 1.5 - 0.7 * 2.3, epsilon = 1e-12);
        assert_relative_eq!(f_euler(&c, 4, 1.5, -2.3), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn sine_flow_closed_form() {
        let c = CoefficientSet::sin_cos(0.0);
        let v = h_flow(&c, 1.0, 0.5, 1e-12).unwrap();
        let exact = 2.0 * ((0.5f64).tan() * 0.5f64.exp()).atan();
        assert_relative_eq!(v.h, exact, max_relative = 1e-10);
        assert_relative_eq!(v.h, 1.466404, epsilon = 1e-6);
        for y in [-3.0, 0.7, 5.0] {
            assert_eq!(h_flow(&c, 0.0, y, 1e-12).unwrap().h, 0.0);
        }
    }

    #[test]
    fn euler_hand_recursion() {
        let c = CoefficientSet::sin_cos(0.0);
        let one = 1.0 + 0.5 * 1.0f64.sin();
        let two = one + 0.5 * one.sin();
        assert_relative_eq!(h_euler(&c, 2, 1.0, 1.0), two, max_relative = 1e-15);
        assert_relative_eq!(two, 1.915116, epsilon = 1e-6);
        assert_eq!(h_euler(&c, 2, 3.0, 0.0), 0.0);
        assert_eq!(h_euler(&c, 2, 1.0, 0.0), 1.0);
    }

    #[test]
    fn exact_and_euler_drift_agree() {
        let c = CoefficientSet::sin_cos(0.0);
        let exact = f_exact(&c, 1.0, 0.5, 1e-12).unwrap();
        let integral = h_flow(&c, 1.0, 0.5, 1e-12).unwrap().integral;
        let oracle = crate::quadrature::adaptive(
            |u| c.dsigma.as_ref()(2.0 * ((0.5f64).tan() * u.exp()).atan()),
            0.0,
            0.5,
            1e-13,
        )
        .unwrap();
        assert_relative_eq!(integral, oracle, max_relative = 1e-9);
        assert!((exact - f_euler(&c, 64, 1.0, 0.5)).abs() < 5e-3);
    }
}
