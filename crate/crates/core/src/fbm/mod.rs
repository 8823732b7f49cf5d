//! Kernels, the transport approximation `B^n` and an exact fBm oracle.

mod approx;
mod audit;
mod driver;
mod exact;
mod kernels;
mod params;

pub use approx::{build_bn, build_bn_with, sample_bn, HistoryCoupling, TransportTriple};
pub use audit::{lipschitz_audit, lipschitz_sweep, LipschitzAudit};
pub use driver::{interpolate, max_grid_slope, uniform_grid, DriverKind, DriverPath};
pub use exact::{exact_fbm, ExactFbmSampler, MAX_EXACT_POINTS};
pub use kernels::{
    fbm_covariance, kernel_df, kernel_f, kernel_g, normalization_c, third_segment_kernel,
    third_segment_kernel_quadrature, KernelSet, ThirdSegment,
};
pub use params::{default_delta, epsilon_n, ApproxParams, DEFAULT_A};
