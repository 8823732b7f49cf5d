//! Transport-process approximation of fractional Brownian motion and
//! Doss–Sussmann Euler schemes for scalar fractional SDEs
//!
//! `dX = b(X) dt + σ(X) dB^H`.
//!
//! The crate is organised bottom-up:
//!
//! * [`transport`]: uniform transport processes and Stieltjes integrals
//!   against them.
//! * [`fbm`]: Mandelbrot–van Ness kernels, the transport-driven approximant
//!   `B^n` and an exact Cholesky fBm sampler.
//! * [`doss_sussmann`]: the flow `h`, its Euler grid version, the random ODE
//!   for `Y` and the composition `X = h(Y, B)`.
//! * [`analysis`]: pathwise bound checkers, Monte Carlo experiments and
//!   rate fitting.
//! * [`cli`]: configuration and the four command drivers used by the binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod doss_sussmann;
pub mod error;
pub mod fbm;
pub mod ode;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod transport;

pub use error::{Error, Result};
pub use report::{BoundReport, Direction};
pub use rng::{Component, RngSeed};
