//! Prices, headlines, daily returns and date alignment.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::NaiveDate;

use crate::{Error, Result};

/// Parses a strict `YYYY-MM-DD` calendar date.
pub fn parse_iso_date(s: &str) -> Result<NaiveDate> {
    let bad = || Error::InvalidDate(s.to_string());
    let b = s.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return Err(bad());
    }
    let digits = |r: core::ops::Range<usize>| -> Result<u32> {
        let part = &s[r];
        if !part.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        part.parse().map_err(|_| bad())
    };
    let (y, m, d) = (digits(0..4)?, digits(5..7)?, digits(8..10)?);
    NaiveDate::from_ymd_opt(y as i32, m, d).ok_or_else(bad)
}

/// One daily OHLCV row.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: u64,
}

impl PriceBar {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason| {
            Err(Error::InvalidPriceBar {
                date: self.date,
                reason,
            })
        };
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !p.is_finite()) {
            return fail("non-finite price");
        }
        if self.close <= 0.0 {
            return fail("close must be positive");
        }
        if !(self.low <= self.open && self.open <= self.high) {
            return fail("open outside [low, high]");
        }
        if !(self.low <= self.close && self.close <= self.high) {
            return fail("close outside [low, high]");
        }
        Ok(())
    }
}

/// Sorts bars by date, rejecting duplicates and invalid rows.
pub fn sort_price_bars(mut bars: Vec<PriceBar>) -> Result<Vec<PriceBar>> {
    for bar in &bars {
        bar.validate()?;
    }
    bars.sort_by_key(|b| b.date);
    if let Some(w) = bars.windows(2).find(|w| w[0].date == w[1].date) {
        return Err(Error::DuplicateDate(w[0].date));
    }
    Ok(bars)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Headline {
    /// Row index at ingest.
    pub id: u64,
    pub date: NaiveDate,
    pub title: String,
}

/// Simple daily returns, each dated by the later of the two closes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    dates: Vec<NaiveDate>,
    returns: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(dates: Vec<NaiveDate>, returns: Vec<f64>) -> Result<Self> {
        if dates.len() != returns.len() {
            return Err(Error::LengthMismatch {
                what: "returns",
                expected: dates.len(),
                got: returns.len(),
            });
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::DatesNotIncreasing {
                prev: w[0],
                next: w[1],
            });
        }
        Ok(Self { dates, returns })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.dates
            .binary_search(&date)
            .ok()
            .map(|i| self.returns[i])
    }

    /// Return of the first trading date strictly after `date`.
    pub fn next_after(&self, date: NaiveDate) -> Option<f64> {
        let i = self.dates.partition_point(|d| *d <= date);
        self.returns.get(i).copied()
    }
}

/// `returns[i] = close[i] / close[i-1] - 1`, dated by bar `i`.
pub fn compute_returns(bars: &[PriceBar]) -> Result<ReturnSeries> {
    if bars.len() < 2 {
        return Err(Error::TooFew {
            what: "price bars",
            needed: 2,
            got: bars.len(),
        });
    }
    let dates = bars[1..].iter().map(|b| b.date).collect();
    let returns = bars
        .windows(2)
        .map(|w| w[1].close / w[0].close - 1.0)
        .collect();
    ReturnSeries::new(dates, returns)
}

/// Which trading date a headline's return is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Lag {
    /// The return dated on the headline's own date, if it is a trading date.
    SameDay,
    /// The return of the first trading date strictly after the headline.
    #[default]
    NextDay,
}

impl Lag {
    pub fn from_days(days: u8) -> Result<Self> {
        match days {
            0 => Ok(Lag::SameDay),
            1 => Ok(Lag::NextDay),
            _ => Err(Error::InvalidParameter {
                name: "lag",
                reason: "must be 0 or 1",
            }),
        }
    }

    pub fn days(self) -> u8 {
        match self {
            Lag::SameDay => 0,
            Lag::NextDay => 1,
        }
    }

    pub fn target(self, series: &ReturnSeries, date: NaiveDate) -> Option<f64> {
        match self {
            Lag::SameDay => series.get(date),
            Lag::NextDay => series.next_after(date),
        }
    }
}

/// Maps each distinct headline date to its target return.
///
/// Dates without a matching return map to `Some(0.0)` when `zero_fill` is set
/// and to `None` otherwise.
pub fn align_dates(
    headlines: &[Headline],
    series: &ReturnSeries,
    lag: Lag,
    zero_fill: bool,
) -> BTreeMap<NaiveDate, Option<f64>> {
    headlines
        .iter()
        .map(|h| {
            let target = lag.target(series, h.date).or(zero_fill.then_some(0.0));
            (h.date, target)
        })
        .collect()
}
