//! Topic exposures, OLS with residual diagnostics, and topic importance.

mod diagnostics;
mod exposures;
mod importance;
mod ols;

pub use diagnostics::{
    durbin_watson, jarque_bera, kurtosis_test, moments, normality_tests, skew_test, Moments,
    NormalityTests,
};
pub use exposures::{build_exposures, ExposureMode, ExposurePanel};
pub use importance::{topic_importance, ImportanceRanking};
pub use ols::{fit_ols, fit_ols_sum_to_zero, ols_fit, RegressionResult, CONDITION_WARNING, RANK_TOLERANCE};

/// Display name of the dummy for topic `k`.
pub fn topic_name(k: usize) -> alloc::string::String {
    alloc::format!("Topic_{k}")
}
