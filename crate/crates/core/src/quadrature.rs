//! Numerical integration on finite intervals.
//!
//! Two engines are provided:
//! * [`adaptive`]: globally adaptive Gauss–Kronrod (7/15 points) bisection,
//!   for smooth integrands;
//! * [`tanh_sinh`]: double-exponential quadrature, for integrands with
//!   integrable power singularities at the endpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Default relative tolerance used across the crate.
pub const DEFAULT_TOL: f64 = 1e-10;

const MAX_SUBDIVISIONS: usize = 4000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod evaluation: (estimate, error estimate, integral of |f|).
fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = kronrod.abs();
    let mut fv = [0.0; 14];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let value = kronrod * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    (value, error, resabs)
}

/// Globally adaptive Gauss–Kronrod quadrature of `f` over `[lo, hi]`.
///
/// Converges when the summed error estimate is below
/// `tol * max(|I|, 1e-3 * ∫|f|)`. On failure the error carries the
/// subinterval with the largest remaining error.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if lo == hi {
        return Ok(0.0);
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    let (value, error, resabs) = kronrod15(&f, lo, hi);
    let target = |total: f64| tol * total.abs().max(1e-3 * resabs);
    if !value.is_finite() {
        return Err(Error::QuadratureFailure {
            lo,
            hi,
            estimate: value,
            error,
            tol,
        });
    }
    if error <= target(value) {
        return Ok(value);
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        lo,
        hi,
        value,
        error,
    });
    let mut total = value;
    let mut total_err = error;
    for _ in 0..MAX_SUBDIVISIONS {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        let (v1, e1, _) = kronrod15(&f, worst.lo, mid);
        let (v2, e2, _) = kronrod15(&f, mid, worst.hi);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            lo: worst.lo,
            hi: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            lo: mid,
            hi: worst.hi,
            value: v2,
            error: e2,
        });
        if !total.is_finite() {
            break;
        }
        if total_err <= target(total) {
            // re-sum to shed the drift of the running totals
            return Ok(heap.iter().map(|s| s.value).sum());
        }
    }
    let worst = heap.peek().copied().expect("heap is never empty");
    Err(Error::QuadratureFailure {
        lo: worst.lo,
        hi: worst.hi,
        estimate: total,
        error: total_err,
        tol,
    })
}

/// Tanh-sinh quadrature of `f` over `[lo, hi]`.
///
/// `f` is never evaluated at the endpoints; abscissae are computed from the
/// nearest endpoint so that singular integrands see accurate distances.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if lo == hi {
        return Ok(0.0);
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    let half = 0.5 * (hi - lo);
    const T_MAX: f64 = 4.0;
    const MAX_LEVEL: u32 = 12;
    let node = |t: f64| -> f64 {
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        // distance from the nearest endpoint, in units of the half-length
        let dist = 2.0 * e / (1.0 + e);
        let weight = std::f64::consts::FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        let x = if t >= 0.0 {
            hi - half * dist
        } else {
            lo + half * dist
        };
        if weight == 0.0 || x <= lo.min(hi) || x >= lo.max(hi) {
            return 0.0;
        }
        weight * f(x)
    };
    let mut h = 1.0;
    let mut sum = node(0.0);
    let mut k = 1.0;
    while k * h <= T_MAX {
        sum += node(k * h) + node(-k * h);
        k += 1.0;
    }
    let mut estimate = half * h * sum;
    for _ in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut k = 1.0;
        while k * h <= T_MAX {
            sum += node(k * h) + node(-k * h);
            k += 2.0;
        }
        let next = half * h * sum;
        let diff = (next - estimate).abs();
        estimate = next;
        if !estimate.is_finite() {
            break;
        }
        if diff <= tol * estimate.abs().max(f64::MIN_POSITIVE) {
            return Ok(estimate);
        }
    }
    Err(Error::QuadratureFailure {
        lo,
        hi,
        estimate,
        error: f64::NAN,
        tol,
    })
}
