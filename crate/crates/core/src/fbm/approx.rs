//! Transport-driven approximation `B^n` of fBm.
//!
//! Three independent transport processes stand in for the Brownian motion on
//! the present window `[0, T]` (`z1`, forward), the recent history `[a, 0]`
//! (`z2`, anchored at 0) and the time-inverted far history `[1/a, 0]` (`z3`,
//! anchored at 0).

use crate::error::{Error, Result};
use crate::fbm::driver::{check_grid, max_grid_slope, DriverKind, DriverPath};
use crate::fbm::kernels::{normalization_c, HistoryF, ShiftedG, ThirdSegment};
use crate::fbm::params::ApproxParams;
use crate::rng::{Component, RngSeed};
use crate::transport::{
    eval_path, generate_transport, integrate_against, LinearPath, Orientation, Quadrature, TransportPath,
};

/// How the far-history path is tied to the recent-history path.
///
/// The Brownian motion behind both segments satisfies `B₃(1/a) = B₂(a)/a`.
/// Independent paths miss that correlation and bias the covariance of `B^n`
/// at order one. `Endpoint` replaces `z3` by the bridge
/// `z3(s) - s (a z3(1/a) + z2(a))`, which has the correct joint law with `z2`
/// in the Brownian limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HistoryCoupling {
    #[default]
    Endpoint,
    Independent,
}

/// The three transport processes of one replica.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportTriple {
    pub z1: TransportPath,
    pub z2: TransportPath,
    pub z3: TransportPath,
}

impl TransportTriple {
    pub fn generate(params: &ApproxParams, seed: RngSeed) -> Result<Self> {
        params.validate()?;
        let n = params.n as f64;
        Ok(Self {
            z1: generate_transport(n, params.horizon, Orientation::Forward, 0.0, seed, Component::Forward)?,
            z2: generate_transport(n, -params.a, Orientation::Backward, 0.0, seed, Component::Left)?,
            z3: generate_transport(n, -1.0 / params.a, Orientation::Backward, 0.0, seed, Component::Tail)?,
        })
    }
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0)
}

fn check_path<P: LinearPath + ?Sized>(
    label: &str,
    path: &P,
    rate: f64,
    interval: (f64, f64),
    orientation: Orientation,
) -> Result<()> {
    if path.rate() != rate {
        return Err(Error::Configuration(format!(
            "{label} has rate {}, expected {rate}",
            path.rate()
        )));
    }
    let (u, v) = path.interval();
    if !close(u, interval.0) || !close(v, interval.1) {
        return Err(Error::Configuration(format!(
            "{label} lives on [{u}, {v}], expected [{}, {}]",
            interval.0, interval.1
        )));
    }
    if path.orientation() != orientation {
        return Err(Error::Configuration(format!(
            "{label} has orientation {:?}, expected {orientation:?}",
            path.orientation()
        )));
    }
    Ok(())
}

/// Assembles `B^n` on `grid` from the three transport paths, with the default
/// coupling and closed-form integration.
pub fn build_bn<P1, P2, P3>(params: &ApproxParams, z1: &P1, z2: &P2, z3: &P3, grid: &[f64]) -> Result<DriverPath>
where
    P1: LinearPath + ?Sized,
    P2: LinearPath + ?Sized,
    P3: LinearPath + ?Sized,
{
    build_bn_with(params, z1, z2, z3, grid, HistoryCoupling::default(), Quadrature::ClosedForm)
}

/// [`build_bn`] with explicit coupling and quadrature choices.
pub fn build_bn_with<P1, P2, P3>(
    params: &ApproxParams,
    z1: &P1,
    z2: &P2,
    z3: &P3,
    grid: &[f64],
    coupling: HistoryCoupling,
    quad: Quadrature,
) -> Result<DriverPath>
where
    P1: LinearPath + ?Sized,
    P2: LinearPath + ?Sized,
    P3: LinearPath + ?Sized,
{
    params.validate()?;
    check_grid(grid, Some(params.horizon))?;
    if grid[0] != 0.0 {
        return Err(Error::Configuration("driver grid must start at t = 0".into()));
    }
    let rate = params.n as f64;
    let a = params.a;
    check_path("z1", z1, rate, (0.0, params.horizon), Orientation::Forward)?;
    check_path("z2", z2, rate, (a, 0.0), Orientation::Backward)?;
    check_path("z3", z3, rate, (1.0 / a, 0.0), Orientation::Backward)?;

    let c_h = normalization_c(params.hurst)?;
    let q = params.q();
    let eps = params.epsilon_n();
    let z2_at_a = eval_path(z2, a)?;
    let tie = match coupling {
        HistoryCoupling::Endpoint => a * eval_path(z3, 1.0 / a)? + z2_at_a,
        HistoryCoupling::Independent => 0.0,
    };

    let mut values = Vec::with_capacity(grid.len());
    for &t in grid {
        if t == 0.0 {
            values.push(0.0);
            continue;
        }
        let f = HistoryF { q, t };
        let third_kernel = ThirdSegment::new(params, t);
        let mut v = if q > 0.0 {
            integrate_against(z1, &ShiftedG { q, top: t }, 0.0, t, quad)?
                + integrate_against(z2, &f, a, 0.0, quad)?
        } else {
            let split = (t + eps).max(0.0);
            integrate_against(z1, &ShiftedG { q, top: t }, 0.0, split, quad)?
                + integrate_against(z1, &ShiftedG { q, top: t - eps }, split, t, quad)?
                + integrate_against(z2, &f, a, eps, quad)?
        };
        v += crate::transport::Kernel::value(&f, a) * z2_at_a;
        v += integrate_against(z3, &third_kernel, 1.0 / a, 0.0, quad)?;
        if tie != 0.0 {
            v -= tie * third_kernel.total_mass();
        }
        values.push(c_h * v);
    }
    let certificate = max_grid_slope(grid, &values);
    Ok(DriverPath {
        grid: grid.to_vec(),
        values,
        kind: DriverKind::TransportApprox,
        hurst: params.hurst,
        params: Some(*params),
        seed: None,
        lipschitz_certificate: Some(certificate),
    })
}

/// Draws the transport paths for `seed` and assembles `B^n` on `grid`.
pub fn sample_bn(params: &ApproxParams, seed: RngSeed, grid: &[f64], coupling: HistoryCoupling) -> Result<DriverPath> {
    let triple = TransportTriple::generate(params, seed)?;
    let mut path = build_bn_with(
        params,
        &triple.z1,
        &triple.z2,
        &triple.z3,
        grid,
        coupling,
        Quadrature::ClosedForm,
    )?;
    path.seed = Some(seed);
    Ok(path)
}
