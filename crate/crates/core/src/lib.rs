//! Travel-time percentile functions from L-moments via the
//! normal-polynomial transformation, with a Cornish-Fisher baseline and a
//! Monte Carlo harness for comparing the two.

pub mod cli;
pub mod config;
pub mod cornish_fisher;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod io;
pub mod lmoments;
pub mod normal;
pub mod npt;
pub mod quadrature;
pub mod report;
pub mod selftest;

pub use cornish_fisher::{
    cf_curve, cf_quantile, cf_validity, sample_central_moments, CentralMomentSummary,
};
pub use distributions::{draw_sample, solve_params, DistributionSpec, Family, Params};
pub use error::{Error, Result};
pub use harness::{
    curve_metrics, empirical_quantile_curve, inject_outlier, run_scenario, run_trial,
    sample_size_sweep, AggregateReport, Method, OutlierKind, ScenarioConfig, TrialMetrics,
};
pub use lmoments::{
    brute_force_lmoment, population_lmoments, sample_lmoments, sample_pwm, LMomentSummary,
    SampleSet,
};
pub use normal::{inverse_normal_cdf, normal_cdf, normal_pdf};
pub use npt::{
    default_grid, evaluate_curve, evaluate_ptt, fit_lmnpt, fit_lmnpt_with, lmnpt_validity,
    NptCoefficients, NptConstants, PercentileCurve, ValidityKind, ValidityStatus,
};
pub use quadrature::QuadratureConfig;
