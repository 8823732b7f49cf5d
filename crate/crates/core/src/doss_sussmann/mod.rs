//! Doss–Sussmann representation `X_t = h(Y_t, B_t)` with exact and Euler
//! evaluators for `h` and `Y`.

mod coeffs;
mod flow;
mod solve;

pub use coeffs::{
    symmetric_grid, validate_coeffs, CoefficientRegistry, CoefficientSet, PresetArgs, PresetFn, ScalarFn,
};
pub use flow::{f_euler, f_exact, h_euler, h_flow, EulerGridH, FlowValue, HFlow, DEFAULT_FLOW_TOL};
pub use solve::{compose_x, euler_y, solve_y, solve_y_with_tol, HEvaluator, Provenance, SolutionPath};
