//! Ingredients of the perturbation bound: mixing time, entrance time and exit
//! probability, plus boundaries, `λ_W` and the return-time identity check.

mod boundary;
mod exit;
mod hitting;
mod mixing;
mod report;

pub use boundary::{boundaries, lambda_w, max_product_paths, LambdaW};
pub use exit::{exit_distribution, exit_distribution_with, exit_probability, ExitDistribution, ExitOptions};
pub use hitting::{
    entrance_time, entrance_time_on_boundary, hitting_times, hitting_times_with, HittingTimes,
};
pub use mixing::{
    diameter_sequence, mixing_time, mixing_time_exact, pagerank_mixing_bound, tv_diameter,
    tv_diameter_upper, MatrixPowers, MixingOptions, MixingTime, MIXING_THRESHOLD,
};
pub use report::{analyze, analyze_with, kac_residual, AnalysisOptions, ChainReport};
