//! Pathwise and pointwise bound checkers.
//!
//! Every checker evaluates both sides of an inequality on sampled inputs and
//! returns [`BoundReport`]s. Ratio-type reports compare `lhs / rhs` against
//! `1 + RATIO_SLACK`; the slack absorbs integrator error at points where the
//! inequality is an equality (e.g. `x = 0` for `σ = sin`).

use crate::analysis::metrics::{rate_fit, sup_diff};
use crate::doss_sussmann::{euler_y, h_euler, h_flow, solve_y, CoefficientSet, FlowValue, DEFAULT_FLOW_TOL};
use crate::error::{Error, Result};
use crate::fbm::DriverPath;
use crate::report::BoundReport;

/// Relative slack for inequalities that can hold with equality.
pub const RATIO_SLACK: f64 = 1e-8;

/// Pair partner offset: `x_i` is paired with `x_{(i + PAIR_SHIFT) mod k}`.
pub const PAIR_SHIFT: usize = 7;

/// Tensor grid of sample points `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Points per axis.
    pub points: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            x_range: (-3.0, 3.0),
            y_range: (-3.0, 3.0),
            points: 32,
        }
    }
}

fn axis(range: (f64, f64), k: usize) -> Vec<f64> {
    let k = k.max(2);
    (0..k)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / (k - 1) as f64)
        .collect()
}

impl SampleSpec {
    pub fn xs(&self) -> Vec<f64> {
        axis(self.x_range, self.points)
    }

    pub fn ys(&self) -> Vec<f64> {
        axis(self.y_range, self.points)
    }

    pub fn len(&self) -> usize {
        self.points.max(2).pow(2)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Worst `lhs / rhs` over a sample, with a violation count.
struct RatioTracker {
    worst: f64,
    at: (f64, f64),
    violations: usize,
    count: usize,
}

impl RatioTracker {
    fn new() -> Self {
        Self {
            worst: 0.0,
            at: (f64::NAN, f64::NAN),
            violations: 0,
            count: 0,
        }
    }

    fn push(&mut self, lhs: f64, rhs: f64, at: (f64, f64)) {
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs <= 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
        self.count += 1;
        if ratio > 1.0 + RATIO_SLACK {
            self.violations += 1;
        }
        if ratio >= self.worst {
            self.worst = ratio;
            self.at = at;
        }
    }

    fn report(&self, name: &str, preset: &str) -> BoundReport {
        BoundReport::new(
            name,
            self.worst,
            1.0 + RATIO_SLACK,
            format!(
                "preset={preset} lhs/rhs worst at (x={}, y={}) points={} violations={}",
                self.at.0, self.at.1, self.count, self.violations
            ),
        )
    }
}

/// Flow values on the tensor grid, indexed `[i][j]` for `(xs[i], ys[j])`.
fn flow_table(c: &CoefficientSet, xs: &[f64], ys: &[f64]) -> Result<Vec<Vec<FlowValue>>> {
    xs.iter()
        .map(|&x| ys.iter().map(|&y| h_flow(c, x, y, DEFAULT_FLOW_TOL)).collect())
        .collect()
}

/// The eight derivative and Lipschitz properties of the flow `h`, plus the
/// identity `∂h/∂x = exp(I)` checked against central differences.
pub fn check_h_bounds(c: &CoefficientSet, spec: &SampleSpec) -> Result<Vec<BoundReport>> {
    let xs = spec.xs();
    let ys = spec.ys();
    let k = xs.len();
    let table = flow_table(c, &xs, &ys)?;
    let (m1, m2, m3, m4, m5) = (c.m1, c.m2, c.m3, c.m4, c.m5);
    let mut items: Vec<RatioTracker> = (0..8).map(|_| RatioTracker::new()).collect();
    let f_of = |v: &FlowValue| v.inv_dh_dx1() * (c.b)(v.h);

    for i in 0..k {
        let i2 = (i + PAIR_SHIFT) % k;
        for j in 0..ys.len() {
            let j2 = (j + PAIR_SHIFT) % ys.len();
            let (x, y) = (xs[i], ys[j]);
            let v = &table[i][j];
            let w = &table[i2][j];
            let ay = y.abs();
            let dx = (x - xs[i2]).abs();
            let dy = (y - ys[j2]).abs();
            let grow = (m2 * ay).exp();
            let at = (x, y);
            items[0].push(v.dh_dx1.abs(), grow, at);
            items[1].push(v.inv_dh_dx1(), grow, at);
            items[2].push(v.inv_dh_dx1() * v.di_dx1.abs(), m3 * ay * grow * grow, at);
            items[3].push((v.h - w.h).abs(), grow * dx, at);
            items[4].push(
                (v.inv_dh_dx1() - w.inv_dh_dx1()).abs(),
                m3 * ay * grow * grow * dx,
                at,
            );
            items[5].push(((c.b)(v.h) - (c.b)(w.h)).abs(), m4 * grow * dx, at);
            items[6].push(((c.b)(v.h) - (c.b)(table[i][j2].h)).abs(), m4 * m5 * dy, at);
            items[7].push((f_of(v) - f_of(w)).abs(), grow * grow * (m1 * m3 * ay + m4) * dx, at);
        }
    }

    let names = [
        "h_dx_growth",
        "h_dx_inverse_growth",
        "h_dx_inverse_derivative",
        "h_lipschitz_x",
        "h_dx_inverse_lipschitz_x",
        "drift_of_h_lipschitz_x",
        "drift_of_h_lipschitz_y",
        "random_ode_drift_lipschitz_x",
    ];
    let mut reports: Vec<BoundReport> = items.iter().zip(names).map(|(t, n)| t.report(n, &c.name)).collect();
    reports.push(derivative_identity(c, &xs, &ys, &table)?);
    Ok(reports)
}

/// Relative gap between a central difference of `h` in `x` and `exp(I)`.
fn derivative_identity(c: &CoefficientSet, xs: &[f64], ys: &[f64], table: &[Vec<FlowValue>]) -> Result<BoundReport> {
    const STEP: f64 = 1e-5;
    const TOL: f64 = 1e-5;
    let mut worst = 0.0_f64;
    let mut at = (f64::NAN, f64::NAN);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let hp = h_flow(c, x + STEP, y, 1e-13)?.h;
            let hm = h_flow(c, x - STEP, y, 1e-13)?.h;
            let fd = (hp - hm) / (2.0 * STEP);
            let exact = table[i][j].dh_dx1;
            let rel = (fd - exact).abs() / exact.abs().max(f64::MIN_POSITIVE);
            if !(rel <= worst) {
                worst = rel;
                at = (x, y);
            }
        }
    }
    Ok(BoundReport::new(
        "h_dx_finite_difference",
        worst,
        TOL,
        format!("preset={} worst at (x={}, y={}) step={STEP}", c.name, at.0, at.1),
    ))
}

/// For `σ = arctan`, `x < 0`, `y < 0`: `exp(-I) >= exp(|y| / (1 + x²))`.
///
/// This lower bound defeats a uniform bound on `exp(-I)` without the `|y|`
/// growth. Reported as `rhs / lhs <= 1`.
pub fn check_arctan_inverse_floor(spec: &SampleSpec) -> Result<BoundReport> {
    if !(spec.x_range.1 < 0.0 && spec.y_range.1 < 0.0) {
        return Err(Error::invalid("sample_spec", "needs x < 0 and y < 0 on the whole grid"));
    }
    let c = CoefficientSet::arctan_demo(0.0);
    let mut tracker = RatioTracker::new();
    for x in spec.xs() {
        for y in spec.ys() {
            let v = h_flow(&c, x, y, DEFAULT_FLOW_TOL)?;
            tracker.push((y.abs() / (1.0 + x * x)).exp(), v.inv_dh_dx1(), (x, y));
        }
    }
    Ok(tracker.report("arctan_inverse_derivative_floor", &c.name))
}

/// Sample region for the arctan floor check.
pub fn arctan_sample_spec() -> SampleSpec {
    SampleSpec {
        x_range: (-3.0, -0.05),
        y_range: (-3.0, -0.05),
        points: 32,
    }
}

/// `M̄² (n / l) exp(M̄ n)`.
pub fn h_euler_bound(c: &CoefficientSet, n: u64, l: u64) -> f64 {
    let mb = c.m_bar();
    let n = n as f64;
    mb * mb * (n / l as f64) * (mb * n).exp()
}

/// Lattice of step `1 / (2 l)` on `[-n, n]`: every Euler node and cell midpoint.
pub fn square_lattice(n: u64, l: u64) -> Vec<f64> {
    let k = 4 * n * l;
    (0..=k).map(|i| -(n as f64) + i as f64 / (2 * l) as f64).collect()
}

/// Worst `|h^n - h|` per lattice refinement, with the point where it occurs.
type GapTable = (Vec<f64>, Vec<(f64, f64)>);

fn max_euler_gap(c: &CoefficientSet, ls: &[u64], pts: &[f64]) -> Result<GapTable> {
    let mut worst = vec![0.0_f64; ls.len()];
    let mut at = vec![(f64::NAN, f64::NAN); ls.len()];
    for &x in pts {
        for &y in pts {
            let exact = h_flow(c, x, y, DEFAULT_FLOW_TOL)?.h;
            for (k, &l) in ls.iter().enumerate() {
                let e = (exact - h_euler(c, l, x, y)).abs();
                let e = if e.is_nan() { f64::INFINITY } else { e };
                if e >= worst[k] {
                    worst[k] = e;
                    at[k] = (x, y);
                }
            }
        }
    }
    Ok((worst, at))
}

/// `sup |h - h^l|` over `[-n, n]²` against `M̄² (n / l) exp(M̄ n)`, `l > n`.
pub fn check_h_euler_bound(c: &CoefficientSet, n: u64, l: u64) -> Result<BoundReport> {
    if n == 0 || l <= n {
        return Err(Error::invalid("l", format!("need l > n >= 1, got n={n} l={l}")));
    }
    let pts = square_lattice(n, l);
    let (worst, at) = max_euler_gap(c, &[l], &pts)?;
    Ok(BoundReport::new(
        "h_euler_gap",
        worst[0],
        h_euler_bound(c, n, l),
        format!(
            "preset={} n={n} l={l} points={} worst at (x={}, y={})",
            c.name,
            pts.len() * pts.len(),
            at[0].0,
            at[0].1
        ),
    ))
}

/// Empirical order of `sup |h - h^l|` in `l` on the lattice of the finest
/// `l`, compared against `min_order`.
pub fn check_h_euler_order(c: &CoefficientSet, n: u64, ls: &[u64], min_order: f64) -> Result<BoundReport> {
    if ls.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "order check needs at least 2 values of l, got {}",
            ls.len()
        )));
    }
    if let Some(l) = ls.iter().find(|l| **l <= n) {
        return Err(Error::invalid("l", format!("need l > n = {n}, got {l}")));
    }
    let finest = *ls.iter().max().unwrap_or(&1);
    let pts = square_lattice(n, finest);
    let (worst, _) = max_euler_gap(c, ls, &pts)?;
    let lf: Vec<f64> = ls.iter().map(|l| *l as f64).collect();
    let listing: Vec<String> = ls.iter().zip(&worst).map(|(l, e)| format!("{l}:{e:.3e}")).collect();
    // errors at rounding level mean the scheme is exact; no order to fit
    let exact = worst.iter().all(|e| *e <= 1e-13);
    let order = match rate_fit(&lf, &worst) {
        _ if exact => f64::INFINITY,
        Ok(fit) => -fit.slope,
        Err(_) => f64::NAN,
    };
    Ok(BoundReport::at_least(
        "h_euler_order",
        order,
        min_order,
        format!("preset={} n={n} sup error by l [{}]", c.name, listing.join(" ")),
    ))
}

/// The random variables of the pathwise error bounds, computed from
/// measurable path statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConstants {
    pub n: u64,
    pub m: u64,
    pub beta: f64,
    pub horizon: f64,
    /// `‖B^n‖_∞`.
    pub norm_b: f64,
    /// Audited Lipschitz constant of `B^n` in units of `n^(1+β)`.
    pub k_hat: f64,
    /// Radius of a square containing `(Y^{n,m}_t, B^n_t)`.
    pub big_n: f64,
    pub z1: f64,
    pub z2: f64,
    /// Uniform-in-`n` constant of the `n^-(1-β)` bound at `m = n²`.
    pub z3: f64,
    /// `exp(M2 N)`, the `x`-Lipschitz constant of `h` on the square.
    pub z5: f64,
    /// `M̄² N exp(M̄ N)`.
    pub z6: f64,
    pub j: f64,
}

impl PathConstants {
    pub fn compute(c: &CoefficientSet, n: u64, m: u64, beta: f64, horizon: f64, norm_b: f64, k_hat: f64) -> Self {
        let (m1, m2, m3, m4, m5) = (c.m1, c.m2, c.m3, c.m4, c.m5);
        let mb = c.m_bar();
        let mm = c.m_max();
        let t = horizon;
        let nf = n as f64;
        let e_b = (m2 * norm_b).exp();
        let big_n = norm_b.max(c.x0.abs() + t * m1 * e_b);
        let z1 = e_b * e_b * (m1 * m3 * norm_b + m4);
        let z2 = (m1 * m2 + m5 * m4) * e_b;
        let r_m = t / m as f64;
        let j = z1 * m1 * e_b * r_m
            + z2 * k_hat * nf.powf(1.0 + beta) * r_m
            + mb * mb * e_b * (mb * big_n).exp() * (m1 * m3 * norm_b + m4) * big_n / nf;
        let e = |k: f64| (k * mm * big_n).exp();
        let inner = t * e(2.0) * (mm * mm * big_n + mm);
        let z3 = (e(3.0) * (mm.powi(3) * big_n + mm * mm) * t
            + 2.0 * mm * mm * k_hat * e(1.0) * t
            + mm * mm * big_n * e(2.0) * (mm * mm * big_n + mm))
            * t
            * inner.exp();
        Self {
            n,
            m,
            beta,
            horizon,
            norm_b,
            k_hat,
            big_n,
            z1,
            z2,
            z3,
            z5: (m2 * big_n).exp(),
            z6: mb * mb * big_n * (mb * big_n).exp(),
            j,
        }
    }

    /// The bounds need `n > N`.
    pub fn applicable(&self) -> bool {
        (self.n as f64) > self.big_n
    }

    /// `J T exp(Z1 T)`, or `∞` when `n <= N`.
    pub fn y_error_bound(&self) -> f64 {
        if self.applicable() {
            self.j * self.horizon * (self.z1 * self.horizon).exp()
        } else {
            f64::INFINITY
        }
    }

    /// `Z3 n^-(1-β)`, or `∞` when `n <= N`.
    pub fn y_rate_bound(&self) -> f64 {
        if self.applicable() {
            self.z3 * (self.n as f64).powf(-(1.0 - self.beta))
        } else {
            f64::INFINITY
        }
    }

    /// `Z5 Z3 n^-(1-β) + Z6 / n` for `sup |h(Y^n, B^n) - h^n(Y^{n,n²}, B^n)|`.
    pub fn x_rate_bound(&self) -> f64 {
        if self.applicable() {
            self.z5 * self.y_rate_bound() + self.z6 / self.n as f64
        } else {
            f64::INFINITY
        }
    }

    pub fn describe(&self) -> String {
        let mut s = format!(
            "n={} m={} |B|={:.6} K={:.6} N={:.6} Z1={:.4e} Z2={:.4e} Z3={:.4e} J={:.4e}",
            self.n, self.m, self.norm_b, self.k_hat, self.big_n, self.z1, self.z2, self.z3, self.j
        );
        if !self.applicable() {
            s.push_str(" bound inapplicable: n <= N");
        } else if !self.z3.is_finite() {
            s.push_str(" Z3 overflows: rate bound vacuous");
        }
        s
    }
}

/// Boundedness of the Euler `Y` and the pathwise error of `Y^{n,m}`
/// against the reference `Y^n` on the same driver.
///
/// `driver` should be sampled on the `m`-step grid. `k_hat` is the audited
/// Lipschitz constant of the driver.
pub fn check_y_bounds(c: &CoefficientSet, n: u64, m: u64, beta: f64, driver: &DriverPath, k_hat: f64) -> Result<Vec<BoundReport>> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("n", "n and m must be positive"));
    }
    let t = driver.horizon();
    let euler = euler_y(c, n, m, driver)?;
    let reference = solve_y(c, driver, t / m as f64)?;
    let ye = euler.y.as_deref().unwrap_or(&[]);
    let yr = reference.y.as_deref().unwrap_or(&[]);
    let norm_b = driver.sup_abs();
    let pc = PathConstants::compute(c, n, m, beta, t, norm_b, k_hat);
    let seed = driver
        .seed
        .map(|s| format!(" seed={}:{}", s.master_seed, s.stream_index))
        .unwrap_or_default();
    let sup_y = ye.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let bounded = BoundReport::new(
        "y_euler_bounded",
        sup_y,
        c.x0.abs() + t * c.m1 * (c.m2 * norm_b).exp(),
        format!("preset={} n={n} m={m} |B|={norm_b}{seed}", c.name),
    );
    let error = BoundReport::new(
        "y_euler_error",
        sup_diff(ye, yr),
        pc.y_error_bound(),
        format!("preset={} {}{seed}", c.name, pc.describe()),
    );
    Ok(vec![bounded, error])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sin_flow_satisfies_all_items() {
        let spec = SampleSpec {
            points: 12,
            ..SampleSpec::default()
        };
        let reports = check_h_bounds(&CoefficientSet::sin_cos(0.1), &spec).unwrap();
        assert_eq!(reports.len(), 9);
        for r in &reports {
            assert!(r.pass, "{r}");
        }
    }

    #[test]
    fn broken_bound_is_caught() {
        let mut c = CoefficientSet::sin_cos(0.1);
        c.m2 = 0.5;
        let spec = SampleSpec {
            points: 8,
            ..SampleSpec::default()
        };
        let reports = check_h_bounds(&c, &spec).unwrap();
        assert!(!reports[0].pass);
        assert!(reports[0].context.contains("violations="));
    }

    #[test]
    fn euler_bound_value_and_linear_exactness() {
        let c = CoefficientSet::sin_cos(0.0);
        assert_relative_eq!(h_euler_bound(&c, 1, 2), 0.5 * std::f64::consts::E, epsilon = 1e-15);
        let r = check_h_euler_bound(&c, 1, 2).unwrap();
        assert!(r.pass, "{r}");
        let lin = CoefficientSet::linear(1.0, 0.8, 0.0);
        let r = check_h_euler_bound(&lin, 2, 4).unwrap();
        assert!(r.measured < 1e-14 && r.pass);
        assert!(check_h_euler_bound(&c, 2, 2).is_err());
    }

    #[test]
    fn j_decreases_in_m() {
        let c = CoefficientSet::sin_cos(0.1);
        let a = PathConstants::compute(&c, 8, 64, 0.3, 1.0, 0.7, 1.2);
        let b = PathConstants::compute(&c, 8, 128, 0.3, 1.0, 0.7, 1.2);
        assert!(b.j < a.j);
        assert!(a.applicable());
        assert_relative_eq!(a.big_n, 0.1 + 0.7f64.exp(), epsilon = 1e-15);
        let far = PathConstants::compute(&c, 2, 4, 0.3, 1.0, 3.0, 1.2);
        assert!(!far.applicable());
        assert_eq!(far.y_error_bound(), f64::INFINITY);
    }
}
