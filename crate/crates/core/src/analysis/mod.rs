//! Error metrics, bound checkers, Monte Carlo experiments and rate fitting.

mod bounds;
mod experiments;
mod metrics;

pub use bounds::{
    arctan_sample_spec, check_arctan_inverse_floor, check_h_bounds, check_h_euler_bound, check_h_euler_order,
    check_y_bounds, h_euler_bound, square_lattice, PathConstants, SampleSpec, PAIR_SHIFT, RATIO_SLACK,
};
pub use experiments::{
    convergence_experiment, covariance_experiment, ks_critical, ks_statistic, lipschitz_experiment, slope_report,
    transport_marginal_ks, ConvergenceConfig, ConvergenceOutcome, CovarianceTolerance, KS_C_1PCT,
};
pub use metrics::{alpha_n, mean, median, pairwise_sum, rate_fit, sup_norm_diff, GridSeries, RateFit, RateRow, RateTable};
