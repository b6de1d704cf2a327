use alloc::vec::Vec;

use crate::{Error, Result};

/// Topics ordered by normalized absolute coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceRanking {
    /// `(topic index, score)`, scores descending and summing to one.
    pub entries: Vec<(usize, f64)>,
}

/// `I_k = |β_k| / Σ_j |β_j|` over the topic coefficients; `coef[0]` is the
/// constant and is excluded. Ties keep the lower topic index first.
pub fn topic_importance(coef: &[f64]) -> Result<ImportanceRanking> {
    let topics = coef.get(1..).unwrap_or_default();
    let total: f64 = topics.iter().map(|b| b.abs()).sum();
    if !(total > 0.0) {
        return Err(Error::AllCoefficientsZero);
    }
    let mut entries: Vec<(usize, f64)> =
        topics.iter().map(|b| b.abs() / total).enumerate().collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ImportanceRanking { entries })
}
