use std::fmt::Write as _;

use crate::doss_sussmann::SolutionPath;
use crate::error::{Error, Result};
use crate::fbm::DriverPath;

/// A real series on a time grid.
pub trait GridSeries {
    fn grid(&self) -> &[f64];
    fn series(&self) -> &[f64];
}

impl GridSeries for DriverPath {
    fn grid(&self) -> &[f64] {
        &self.grid
    }
    fn series(&self) -> &[f64] {
        &self.values
    }
}

/// Uses X when present, otherwise Y.
impl GridSeries for SolutionPath {
    fn grid(&self) -> &[f64] {
        &self.grid
    }
    fn series(&self) -> &[f64] {
        self.primary()
    }
}

fn grids_match(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0))
}

/// `max_t |p1(t) - p2(t)|` over a shared grid.
pub fn sup_norm_diff<A: GridSeries + ?Sized, B: GridSeries + ?Sized>(p1: &A, p2: &B) -> Result<f64> {
    if !grids_match(p1.grid(), p2.grid()) || p1.series().len() != p2.series().len() {
        return Err(Error::Configuration(format!(
            "paths live on different grids ({} vs {} points)",
            p1.grid().len(),
            p2.grid().len()
        )));
    }
    Ok(sup_diff(p1.series(), p2.series()))
}

pub(crate) fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Target rate `n^(-1/2 + beta + delta) (log n)^(5/2)`.
pub fn alpha_n(n: f64, beta: f64, delta: f64) -> Result<f64> {
    if !(n > 1.0) || !n.is_finite() {
        return Err(Error::invalid("n", format!("needs n > 1 so that log n > 0, got {n}")));
    }
    if !(beta > 0.0 && delta > 0.0 && beta + delta < 0.5) {
        return Err(Error::invalid(
            "beta",
            format!("need beta, delta > 0 and beta + delta < 1/2, got ({beta}, {delta})"),
        ));
    }
    Ok(n.powf(-0.5 + beta + delta) * n.ln().powf(2.5))
}

/// Summation by recursive halving; the result does not depend on how the
/// inputs were produced, only on their order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Least squares line through `(log n, log err)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
}

pub fn rate_fit(ns: &[f64], errors: &[f64]) -> Result<RateFit> {
    if ns.len() != errors.len() {
        return Err(Error::Configuration(format!(
            "{} sweep points but {} errors",
            ns.len(),
            errors.len()
        )));
    }
    if ns.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "a rate fit needs at least 2 points, got {}",
            ns.len()
        )));
    }
    if let Some((n, e)) = ns.iter().zip(errors).find(|(n, e)| !(**n > 0.0 && **e > 0.0)) {
        return Err(Error::Domain(format!("log-log fit needs positive data, got n={n} err={e}")));
    }
    let x: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let (mx, my) = (mean(&x), mean(&y));
    let sxx = pairwise_sum(&x.iter().map(|v| (v - mx) * (v - mx)).collect::<Vec<_>>());
    let sxy = pairwise_sum(&x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).collect::<Vec<_>>());
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all sweep points coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sq: Vec<f64> = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .collect();
    Ok(RateFit {
        slope,
        intercept,
        residual: mean(&sq).sqrt(),
    })
}

/// Error statistics at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub n: u64,
    pub replicas: usize,
    pub mean_err: f64,
    pub median_err: f64,
    pub max_err: f64,
}

impl RateRow {
    pub fn from_errors(n: u64, errors: &[f64]) -> Self {
        Self {
            n,
            replicas: errors.len(),
            mean_err: mean(errors),
            median_err: median(errors),
            max_err: errors.iter().copied().fold(0.0, f64::max),
        }
    }
}

/// Sweep table with a log-log fit of the mean error.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    /// `None` when some mean error is zero, e.g. in exactly solvable cases.
    pub fit: Option<RateFit>,
}

impl RateTable {
    pub const CSV_HEADER: &'static str = "n,replicas,mean_err,median_err,max_err";

    pub fn new(rows: Vec<RateRow>) -> Result<Self> {
        if rows.windows(2).any(|w| w[1].n <= w[0].n) {
            return Err(Error::Configuration("sweep values of n must be strictly increasing".into()));
        }
        if let Some(r) = rows.iter().find(|r| !(r.mean_err >= 0.0 && r.max_err >= 0.0)) {
            return Err(Error::Domain(format!("negative or NaN error at n = {}", r.n)));
        }
        let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        let errs: Vec<f64> = rows.iter().map(|r| r.mean_err).collect();
        let fit = if errs.iter().all(|e| *e > 0.0) {
            Some(rate_fit(&ns, &errs)?)
        } else {
            None
        };
        Ok(Self { rows, fit })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:?},{:?},{:?}",
                r.n, r.replicas, r.mean_err, r.median_err, r.max_err
            );
        }
        out
    }

    /// Log-log plot of mean and max error with the fitted line.
    pub fn to_svg(&self) -> String {
        const W: f64 = 480.0;
        const H: f64 = 360.0;
        const PAD: f64 = 56.0;
        let pts: Vec<(f64, f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.mean_err > 0.0)
            .map(|r| ((r.n as f64).log10(), r.mean_err.log10(), r.max_err.max(r.mean_err).log10()))
            .collect();
        let mut svg = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        );
        if pts.is_empty() {
            svg.push_str("<text x=\"20\" y=\"30\" font-size=\"12\">no positive errors to plot</text>\n</svg>\n");
            return svg;
        }
        let (x0, x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
        let (y0, y1) = pts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.2)));
        let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
        let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
        let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"black\" points=\"{},{} {},{} {},{}\"/>",
            sx(x0),
            sy(y1),
            sx(x0),
            sy(y0),
            sx(x1),
            sy(y0)
        );
        for d in (x0 as i32)..=(x1 as i32) {
            let x = sx(d as f64);
            let _ = writeln!(
                svg,
                "<text x=\"{x}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">1e{d}</text>",
                H - PAD + 16.0
            );
        }
        for d in (y0 as i32)..=(y1 as i32) {
            let y = sy(d as f64);
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">1e{d}</text>",
                PAD - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">n</text>",
            W / 2.0,
            H - 12.0
        );
        for (x, m, mx) in &pts {
            let _ = writeln!(svg, "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"steelblue\"/>", sx(*x), sy(*m));
            let _ = writeln!(
                svg,
                "<rect x=\"{}\" y=\"{}\" width=\"5\" height=\"5\" fill=\"firebrick\"/>",
                sx(*x) - 2.5,
                sy(*mx) - 2.5
            );
        }
        if let Some(fit) = self.fit {
            let ln10 = std::f64::consts::LN_10;
            let line = |x: f64| (fit.intercept + fit.slope * x * ln10) / ln10;
            let (a, b) = (pts[0].0, pts[pts.len() - 1].0);
            let _ = writeln!(
                svg,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>",
                sx(a),
                sy(line(a)),
                sx(b),
                sy(line(b))
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" font-size=\"12\">slope {:.3}</text>",
                W - PAD - 90.0,
                PAD - 20.0,
                fit.slope
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn alpha_at_hundred() {
        let v = alpha_n(100.0, 0.3, 0.05).unwrap();
        assert_relative_eq!(v, 100f64.powf(-0.15) * 100f64.ln().powf(2.5), max_relative = 1e-15);
        assert!((v - 22.8).abs() < 0.05);
        assert!(alpha_n(1.0, 0.3, 0.05).is_err());
        assert!(alpha_n(0.5, 0.3, 0.05).is_err());
    }

    #[test]
    fn pairwise_matches_naive_on_exact_data() {
        let xs: Vec<f64> = (0..1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
    }

    #[test]
    fn table_validates_and_writes() {
        let rows = vec![RateRow::from_errors(8, &[0.1, 0.3]), RateRow::from_errors(16, &[0.05, 0.15])];
        let t = RateTable::new(rows.clone()).unwrap();
        assert_relative_eq!(t.fit.unwrap().slope, -1.0, epsilon = 1e-12);
        assert!(t.to_csv().starts_with("n,replicas,mean_err,median_err,max_err\n8,2,0.2,0.2,0.3\n"));
        assert!(t.to_svg().contains("slope -1.000"));
        let backwards = vec![rows[1].clone(), rows[0].clone()];
        assert!(RateTable::new(backwards).is_err());
        let zero = RateTable::new(vec![RateRow::from_errors(8, &[0.0]), RateRow::from_errors(9, &[0.0])]).unwrap();
        assert!(zero.fit.is_none());
    }
}
