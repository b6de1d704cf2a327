use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use chrono::NaiveDate;

use crate::corpus::{Headline, Lag, ReturnSeries};
use crate::linalg::Matrix;
use crate::{Error, Result};

/// Observation granularity of the regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExposureMode {
    /// One row per headline date; dummy `k` marks whether topic `k` appeared.
    #[default]
    PerDay,
    /// One row per headline with a one-hot topic.
    PerHeadline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExposurePanel {
    pub dates: Vec<NaiveDate>,
    /// `n_obs × K`, entries in {0, 1}.
    pub dummies: Matrix,
    pub target: Vec<f64>,
    pub mode: ExposureMode,
    pub lag: Lag,
}

impl ExposurePanel {
    pub fn n_obs(&self) -> usize {
        self.target.len()
    }

    pub fn n_topics(&self) -> usize {
        self.dummies.cols()
    }
}

/// Turns per-headline topic labels into a regression panel. Rows whose date
/// has no target return get `0.0` with `zero_fill`, and are dropped without.
pub fn build_exposures(
    headlines: &[Headline],
    labels: &[usize],
    n_topics: usize,
    series: &ReturnSeries,
    mode: ExposureMode,
    lag: Lag,
    zero_fill: bool,
) -> Result<ExposurePanel> {
    if headlines.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if n_topics == 0 {
        return Err(Error::InvalidParameter {
            name: "K",
            reason: "need at least one topic",
        });
    }
    if labels.len() != headlines.len() {
        return Err(Error::LengthMismatch {
            what: "topic labels",
            expected: headlines.len(),
            got: labels.len(),
        });
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= n_topics) {
        return Err(Error::LabelOutOfRange { label, k: n_topics });
    }

    let target_for = |date: NaiveDate| lag.target(series, date).or(zero_fill.then_some(0.0));
    let mut dates = Vec::new();
    let mut rows: Vec<f64> = Vec::new();
    let mut target = Vec::new();
    match mode {
        ExposureMode::PerDay => {
            let mut by_day: BTreeMap<NaiveDate, Vec<usize>> = BTreeMap::new();
            for (h, &l) in headlines.iter().zip(labels) {
                by_day.entry(h.date).or_default().push(l);
            }
            for (date, topics) in by_day {
                let Some(y) = target_for(date) else { continue };
                let mut row = alloc::vec![0.0; n_topics];
                for t in topics {
                    row[t] = 1.0;
                }
                dates.push(date);
                rows.extend(row);
                target.push(y);
            }
        }
        ExposureMode::PerHeadline => {
            let mut order: Vec<usize> = (0..headlines.len()).collect();
            order.sort_by_key(|&i| (headlines[i].date, headlines[i].id));
            for i in order {
                let date = headlines[i].date;
                let Some(y) = target_for(date) else { continue };
                let mut row = alloc::vec![0.0; n_topics];
                row[labels[i]] = 1.0;
                dates.push(date);
                rows.extend(row);
                target.push(y);
            }
        }
    }
    let dummies = Matrix::from_vec(target.len(), n_topics, rows)?;
    Ok(ExposurePanel {
        dates,
        dummies,
        target,
        mode,
        lag,
    })
}
