//! Uniform transport processes.
//!
//! A transport path starts at 0 and moves with velocity `+rate` or `-rate`
//! (fair coin), reversing direction after i.i.d. Exponential(`rate²`) holding
//! times. A path is parametrized by an interval `[u, v]` of the real line; a
//! forward path is anchored at `u` and runs to the right, a backward path is
//! anchored at `v` and runs to the left.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::rng::{Component, RngSeed};

/// Which endpoint of the interval carries the value 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Anchored at the left endpoint, elapsed time increases to the right.
    Forward,
    /// Anchored at the right endpoint, elapsed time increases to the left.
    Backward,
}

/// How Stieltjes integrals against a path are evaluated piece by piece.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Quadrature {
    /// Use the kernel's antiderivative when it has one, adaptive otherwise.
    #[default]
    ClosedForm,
    /// Always integrate numerically to the given relative tolerance.
    Adaptive { tol: f64 },
}


/// A deterministic integrand `k(s)`.
pub trait Kernel {
    fn value(&self, s: f64) -> f64;

    /// Antiderivative at `s`, if the kernel family has one in closed form.
    fn primitive(&self, _s: f64) -> Option<f64> {
        None
    }
}

/// Kernel from a closure, without antiderivative.
pub struct FnKernel<F>(pub F);

impl<F: Fn(f64) -> f64> Kernel for FnKernel<F> {
    fn value(&self, s: f64) -> f64 {
        (self.0)(s)
    }
}

/// Kernel from a closure plus its antiderivative.
pub struct FnKernelWithPrimitive<F, G> {
    pub value: F,
    pub primitive: G,
}

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> Kernel for FnKernelWithPrimitive<F, G> {
    fn value(&self, s: f64) -> f64 {
        (self.value)(s)
    }
    fn primitive(&self, s: f64) -> Option<f64> {
        Some((self.primitive)(s))
    }
}

/// One linear piece of a path, in real-time order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub start_value: f64,
    pub slope: f64,
}

/// A continuous piecewise-linear path on a bounded interval.
///
/// Implemented by [`TransportPath`] and by the null path [`ZeroPath`].
pub trait LinearPath {
    fn interval(&self) -> (f64, f64);
    fn orientation(&self) -> Orientation;
    /// Nominal speed of the path.
    fn rate(&self) -> f64;
    /// Breakpoints in increasing order, including both interval endpoints.
    fn knots(&self) -> &[f64];
    /// Path values at the knots.
    fn knot_values(&self) -> &[f64];
    /// Slope of the piece between knot `i` and knot `i + 1`.
    fn slope(&self, piece: usize) -> f64;

    fn piece_count(&self) -> usize {
        self.knots().len() - 1
    }

    fn segments(&self) -> Box<dyn Iterator<Item = Segment> + '_> {
        let knots = self.knots();
        let values = self.knot_values();
        Box::new((0..self.piece_count()).map(move |i| Segment {
            start: knots[i],
            end: knots[i + 1],
            start_value: values[i],
            slope: self.slope(i),
        }))
    }
}

/// Sampled uniform transport process.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPath {
    rate: f64,
    initial_sign: f64,
    gaps: Vec<f64>,
    horizon: f64,
    orientation: Orientation,
    interval: (f64, f64),
    knots: Vec<f64>,
    values: Vec<f64>,
    // slope sign of the first piece in real-time order
    first_slope_sign: f64,
}

impl TransportPath {
    /// Builds a path from explicit holding times.
    ///
    /// `gaps` are the successive holding times measured from the anchor; the
    /// last reversal must lie at or beyond `horizon` (the tail piece is cut at
    /// the horizon). `anchor` is the interval endpoint carrying value 0.
    pub fn from_gaps(
        rate: f64,
        initial_sign: i8,
        gaps: Vec<f64>,
        horizon: f64,
        orientation: Orientation,
        anchor: f64,
    ) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::invalid("rate", format!("must be positive, got {rate}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("horizon", format!("must be positive, got {horizon}")));
        }
        if initial_sign != 1 && initial_sign != -1 {
            return Err(Error::invalid("initial_sign", "must be +1 or -1"));
        }
        if let Some(g) = gaps.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(Error::invalid("gaps", format!("holding times must be positive, got {g}")));
        }
        let total: f64 = gaps.iter().sum();
        if total < horizon {
            return Err(Error::invalid(
                "gaps",
                format!("holding times sum to {total}, short of horizon {horizon}"),
            ));
        }
        // elapsed-time reversal points strictly inside (0, horizon)
        let mut elapsed = Vec::with_capacity(gaps.len() + 1);
        elapsed.push(0.0);
        let mut acc = 0.0;
        for g in &gaps {
            acc += g;
            if acc >= horizon {
                break;
            }
            elapsed.push(acc);
        }
        elapsed.push(horizon);
        // values in elapsed time, built piece by piece from the gaps
        let sign0 = f64::from(initial_sign);
        let mut w = Vec::with_capacity(elapsed.len());
        w.push(0.0);
        let mut sign = sign0;
        for i in 0..elapsed.len() - 1 {
            let len = if i < gaps.len() && i + 2 < elapsed.len() {
                gaps[i]
            } else {
                elapsed[i + 1] - elapsed[i]
            };
            let next = w[i] + sign * rate * len;
            w.push(next);
            sign = -sign;
        }
        let pieces = elapsed.len() - 1;
        let (interval, knots, values, first_slope_sign) = match orientation {
            Orientation::Forward => {
                let u = anchor;
                let knots: Vec<f64> = elapsed.iter().map(|e| u + e).collect();
                ((u, u + horizon), knots, w, sign0)
            }
            Orientation::Backward => {
                let v = anchor;
                let knots: Vec<f64> = elapsed.iter().rev().map(|e| v - e).collect();
                let values: Vec<f64> = w.into_iter().rev().collect();
                // in real time the last elapsed piece comes first and its slope flips
                let last_elapsed_sign = if (pieces - 1) % 2 == 0 { sign0 } else { -sign0 };
                ((v - horizon, v), knots, values, -last_elapsed_sign)
            }
        };
        Ok(Self {
            rate,
            initial_sign: sign0,
            gaps,
            horizon,
            orientation,
            interval,
            knots,
            values,
            first_slope_sign,
        })
    }

    pub fn initial_sign(&self) -> i8 {
        self.initial_sign as i8
    }

    /// Holding times measured from the anchor.
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Elapsed times (from the anchor) of the reversals inside the horizon.
    pub fn reversal_times(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut acc = 0.0;
        for g in &self.gaps {
            acc += g;
            if acc >= self.horizon {
                break;
            }
            out.push(acc);
        }
        out
    }

    /// Value at `t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        eval_path(self, t)
    }

    /// Exact maximum of |path| over its interval.
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// CSV dump: `piece_index,start_time,end_time,start_value,slope`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("piece_index,start_time,end_time,start_value,slope\n");
        for (i, s) in self.segments().enumerate() {
            let _ = writeln!(out, "{i},{},{},{},{}", s.start, s.end, s.start_value, s.slope);
        }
        out
    }
}

impl LinearPath for TransportPath {
    fn interval(&self) -> (f64, f64) {
        self.interval
    }
    fn orientation(&self) -> Orientation {
        self.orientation
    }
    fn rate(&self) -> f64 {
        self.rate
    }
    fn knots(&self) -> &[f64] {
        &self.knots
    }
    fn knot_values(&self) -> &[f64] {
        &self.values
    }
    fn slope(&self, piece: usize) -> f64 {
        if piece.is_multiple_of(2) {
            self.first_slope_sign * self.rate
        } else {
            -self.first_slope_sign * self.rate
        }
    }
}

/// The identically-zero path on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroPath {
    rate: f64,
    orientation: Orientation,
    knots: [f64; 2],
    values: [f64; 2],
}

impl ZeroPath {
    pub fn new(rate: f64, interval: (f64, f64), orientation: Orientation) -> Self {
        Self {
            rate,
            orientation,
            knots: [interval.0, interval.1],
            values: [0.0, 0.0],
        }
    }
}

impl LinearPath for ZeroPath {
    fn interval(&self) -> (f64, f64) {
        (self.knots[0], self.knots[1])
    }
    fn orientation(&self) -> Orientation {
        self.orientation
    }
    fn rate(&self) -> f64 {
        self.rate
    }
    fn knots(&self) -> &[f64] {
        &self.knots
    }
    fn knot_values(&self) -> &[f64] {
        &self.values
    }
    fn slope(&self, _piece: usize) -> f64 {
        0.0
    }
}

/// Draws a transport path with speed `rate` over an interval of length
/// `horizon` anchored at `anchor`.
pub fn generate_transport(
    rate: f64,
    horizon: f64,
    orientation: Orientation,
    anchor: f64,
    seed: RngSeed,
    component: Component,
) -> Result<TransportPath> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::invalid("rate", format!("must be positive, got {rate}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::invalid("horizon", format!("must be positive, got {horizon}")));
    }
    let mut rng = seed.rng(component);
    let initial_sign: i8 = if rng.random::<bool>() { 1 } else { -1 };
    let exp = Exp::new(rate * rate).map_err(|e| Error::invalid("rate", e.to_string()))?;
    let expected = (rate * rate * horizon).ceil() as usize + 8;
    let mut gaps = Vec::with_capacity(expected + expected / 8);
    let mut total = 0.0;
    while total < horizon {
        let g: f64 = exp.sample(&mut rng);
        if g > 0.0 {
            total += g;
            gaps.push(g);
        }
    }
    TransportPath::from_gaps(rate, initial_sign, gaps, horizon, orientation, anchor)
}

/// Forward path on `[0, horizon]`.
pub fn generate_forward(rate: f64, horizon: f64, seed: RngSeed) -> Result<TransportPath> {
    generate_transport(rate, horizon, Orientation::Forward, 0.0, seed, Component::Forward)
}

/// Value of a piecewise-linear path at `t`.
pub fn eval_path<P: LinearPath + ?Sized>(path: &P, t: f64) -> Result<f64> {
    let (u, v) = path.interval();
    if !(t >= u && t <= v) {
        return Err(Error::Domain(format!("t = {t} outside path interval [{u}, {v}]")));
    }
    let knots = path.knots();
    let values = path.knot_values();
    match path.orientation() {
        Orientation::Forward => {
            let i = knots.partition_point(|k| *k <= t).saturating_sub(1).min(knots.len() - 2);
            Ok(values[i] + path.slope(i) * (t - knots[i]))
        }
        Orientation::Backward => {
            // interpolate from the right end of the piece, which is nearer the anchor
            let i = knots.partition_point(|k| *k < t).clamp(1, knots.len() - 1);
            Ok(values[i] - path.slope(i - 1) * (knots[i] - t))
        }
    }
}

/// Stieltjes integral `∫_lo^hi kernel(s) dZ(s)` against a piecewise-linear path.
///
/// Per piece the integral is `slope · ∫ kernel`, taken from the kernel's
/// antiderivative or by adaptive quadrature as selected by `quad`.
pub fn integrate_against<P, K>(path: &P, kernel: &K, lo: f64, hi: f64, quad: Quadrature) -> Result<f64>
where
    P: LinearPath + ?Sized,
    K: Kernel + ?Sized,
{
    let (u, v) = path.interval();
    if lo > hi {
        return Err(Error::Domain(format!("empty range [{lo}, {hi}]")));
    }
    if lo < u || hi > v {
        return Err(Error::Domain(format!(
            "range [{lo}, {hi}] outside path interval [{u}, {v}]"
        )));
    }
    if lo == hi {
        return Ok(0.0);
    }
    let knots = path.knots();
    let first = knots.partition_point(|k| *k <= lo).saturating_sub(1);
    let closed_form = matches!(quad, Quadrature::ClosedForm) && kernel.primitive(lo).is_some();
    let tol = match quad {
        Quadrature::Adaptive { tol } => tol,
        Quadrature::ClosedForm => quadrature::DEFAULT_TOL,
    };
    let mut total = 0.0;
    let mut left = lo;
    let mut left_primitive = if closed_form {
        kernel.primitive(lo).unwrap_or(0.0)
    } else {
        0.0
    };
    for i in first..knots.len() - 1 {
        if left >= hi {
            break;
        }
        let right = knots[i + 1].min(hi);
        if right <= left {
            continue;
        }
        let slope = path.slope(i);
        if closed_form {
            let right_primitive = kernel.primitive(right).unwrap_or(0.0);
            if slope != 0.0 {
                total += slope * (right_primitive - left_primitive);
            }
            left_primitive = right_primitive;
        } else if slope != 0.0 {
            total += slope * quadrature::adaptive(|s| kernel.value(s), left, right, tol)?;
        }
        left = right;
    }
    Ok(total)
}

/// Exact maximum of |path| over its interval.
pub fn sup_abs<P: LinearPath + ?Sized>(path: &P) -> f64 {
    path.knot_values().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
