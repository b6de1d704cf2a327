use alloc::string::String;
use alloc::vec::Vec;

use chrono::NaiveDate;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid date {0:?}: expected YYYY-MM-DD")]
    InvalidDate(String),
    #[error("invalid price bar on {date}: {reason}")]
    InvalidPriceBar {
        date: NaiveDate,
        reason: &'static str,
    },
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("dates must be strictly increasing ({prev} then {next})")]
    DatesNotIncreasing { prev: NaiveDate, next: NaiveDate },
    #[error("need at least {needed} {what}, got {got}")]
    TooFew {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("embedding dimension must be at least {min}, got {dim}")]
    InvalidDimension { dim: usize, min: usize },
    #[error("duplicate embedding id {0:?}")]
    DuplicateId(String),
    #[error("invalid cluster count k = {k} for {n} points")]
    InvalidK { k: usize, n: usize },
    #[error(
        "invalid k range [{k_min}, {k_max}] for {n} points (need 2 <= k_min <= k_max <= n - 1)"
    )]
    InvalidKRange {
        k_min: usize,
        k_max: usize,
        n: usize,
    },
    #[error("silhouette needs at least two distinct cluster labels")]
    SingleCluster,
    #[error("label {label} out of range for {k} topics")]
    LabelOutOfRange { label: usize, k: usize },
    #[error("data has zero total variance")]
    ZeroVariance,
    #[error("{0}: argument outside the function domain")]
    Domain(&'static str),
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("design matrix is rank deficient; linearly dependent columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },
    #[error("residual sum of squares is zero")]
    ZeroResiduals,
    #[error("all topic coefficients are zero")]
    AllCoefficientsZero,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("vocabulary is empty after filtering")]
    EmptyVocabulary,
    #[error("top_k = {top_k} exceeds vocabulary size {vocab_size}")]
    TopKTooLarge { top_k: usize, vocab_size: usize },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
}

impl Error {
    /// True for errors meaning "the input was fine but nothing usable came out".
    pub fn is_empty_result(&self) -> bool {
        matches!(
            self,
            Error::EmptyCorpus | Error::EmptyVocabulary | Error::AllCoefficientsZero
        )
    }
}
