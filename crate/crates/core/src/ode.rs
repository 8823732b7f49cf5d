//! Explicit Runge–Kutta integrators.
//!
//! [`Dopri5`] is the adaptive Dormand–Prince 5(4) pair with its fourth-order
//! continuous extension; [`rk4_step`] is the classical fixed-step method.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 200_000;

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone)]
struct DenseStep<const N: usize> {
    t0: f64,
    h: f64,
    coeffs: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        std::array::from_fn(|i| {
            r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])))
        })
    }
}

/// Piecewise quartic interpolant of an adaptive solution.
#[derive(Debug, Clone)]
pub struct DenseSolution<const N: usize> {
    t_start: f64,
    t_end: f64,
    start: [f64; N],
    end: [f64; N],
    steps: Vec<DenseStep<N>>,
}

impl<const N: usize> DenseSolution<N> {
    pub fn span(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    pub fn end_state(&self) -> [f64; N] {
        self.end
    }

    /// State at `t` (must lie in the integrated span).
    pub fn eval(&self, t: f64) -> Result<[f64; N]> {
        let (a, b) = (self.t_start.min(self.t_end), self.t_start.max(self.t_end));
        if t < a || t > b {
            return Err(Error::Domain(format!(
                "dense output requested at {t}, outside [{a}, {b}]"
            )));
        }
        if self.steps.is_empty() {
            return Ok(self.start);
        }
        let forward = self.t_end >= self.t_start;
        // steps are ordered along the direction of integration
        let idx = self.steps.partition_point(|s| {
            let end = s.t0 + s.h;
            if forward {
                end < t
            } else {
                end > t
            }
        });
        let step = &self.steps[idx.min(self.steps.len() - 1)];
        Ok(step.eval(t))
    }
}

/// Adaptive Dormand–Prince 5(4) integrator.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
}

impl Dopri5 {
    pub fn new(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
        }
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t1` and returns the end state.
    pub fn solve<const N: usize, F>(&self, f: F, t0: f64, y0: [f64; N], t1: f64) -> Result<[f64; N]>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        self.run(f, t0, y0, t1, false).map(|d| d.end_state())
    }

    /// Integrates and keeps the continuous extension of every accepted step.
    pub fn solve_dense<const N: usize, F>(
        &self,
        f: F,
        t0: f64,
        y0: [f64; N],
        t1: f64,
    ) -> Result<DenseSolution<N>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        self.run(f, t0, y0, t1, true)
    }

    fn run<const N: usize, F>(
        &self,
        f: F,
        t0: f64,
        y0: [f64; N],
        t1: f64,
        dense: bool,
    ) -> Result<DenseSolution<N>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut out = DenseSolution {
            t_start: t0,
            t_end: t1,
            start: y0,
            end: y0,
            steps: Vec::new(),
        };
        if t0 == t1 {
            return Ok(out);
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::invalid("tol", "must be positive"));
        }
        let dir = (t1 - t0).signum();
        let span = (t1 - t0).abs();
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut h = self.initial_step(&f, t, &y, &k1, dir, span);
        for _ in 0..MAX_STEPS {
            let remaining = (t1 - t).abs();
            if remaining <= 0.0 {
                out.end = y;
                return Ok(out);
            }
            let mut last = false;
            if h.abs() >= remaining {
                h = dir * remaining;
                last = true;
            }
            let axpy = |terms: &[(f64, &[f64; N])]| -> [f64; N] {
                std::array::from_fn(|i| {
                    y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>()
                })
            };
            let k2 = f(t + C2 * h, &axpy(&[(A21, &k1)]));
            let k3 = f(t + C3 * h, &axpy(&[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * h, &axpy(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                t + C5 * h,
                &axpy(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                &axpy(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let t_new = if last { t1 } else { t + h };
            let k7 = f(t_new, &y_new);
            let mut err_sq = 0.0;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err_sq += (e / scale).powi(2);
            }
            let err = (err_sq / N as f64).sqrt();
            if !err.is_finite() {
                h *= 0.1;
                if h.abs() < 1e-14 * span.max(1.0) {
                    return Err(Error::Integration {
                        at: t,
                        reason: "non-finite derivative".into(),
                    });
                }
                continue;
            }
            if err <= 1.0 {
                if dense {
                    let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
                    let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
                    let r4: [f64; N] = std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]);
                    let r5: [f64; N] = std::array::from_fn(|i| {
                        h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                    });
                    out.steps.push(DenseStep {
                        t0: t,
                        h,
                        coeffs: [y, ydiff, bspl, r4, r5],
                    });
                }
                t = t_new;
                y = y_new;
                k1 = k7;
                if last {
                    out.end = y;
                    return Ok(out);
                }
            }
            let factor = if err == 0.0 {
                10.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 10.0)
            };
            h *= factor;
            if h.abs() < 1e-14 * span.max(1.0) {
                return Err(Error::Integration {
                    at: t,
                    reason: "step size underflow".into(),
                });
            }
        }
        Err(Error::Integration {
            at: t,
            reason: format!("exceeded {MAX_STEPS} steps"),
        })
    }

    fn initial_step<const N: usize, F>(
        &self,
        f: &F,
        t: f64,
        y: &[f64; N],
        k1: &[f64; N],
        dir: f64,
        span: f64,
    ) -> f64
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let norm = |v: &[f64; N]| -> f64 {
            let s: f64 = (0..N)
                .map(|i| (v[i] / (self.atol + self.rtol * y[i].abs())).powi(2))
                .sum();
            (s / N as f64).sqrt()
        };
        let d0 = norm(y);
        let d1 = norm(k1);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(span);
        let y1: [f64; N] = std::array::from_fn(|i| y[i] + dir * h0 * k1[i]);
        let k2 = f(t + dir * h0, &y1);
        let diff: [f64; N] = std::array::from_fn(|i| k2[i] - k1[i]);
        let d2 = norm(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        dir * (100.0 * h0).min(h1).min(span)
    }
}

/// One classical fourth-order Runge–Kutta step for a scalar ODE.
pub fn rk4_step<F: Fn(f64, f64) -> Result<f64>>(f: &F, t: f64, y: f64, h: f64) -> Result<f64> {
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, y + 0.5 * h * k1)?;
    let k3 = f(t + 0.5 * h, y + 0.5 * h * k2)?;
    let k4 = f(t + h, y + h * k3)?;
    Ok(y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}
