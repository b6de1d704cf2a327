//! Seeded synthetic corpus with a known topic effect.
//!
//! Headlines come from three topics with separate vocabularies. Every trading
//! day that follows a headline of topic 0 gets `effect` added to its return,
//! so a working pipeline should find one topic with a clearly positive
//! coefficient.

use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate, Weekday};
use newsimpact_core::corpus::{Headline, PriceBar};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::csvio::{write_headlines, write_prices};
use crate::error::Result;

/// Word pools per topic. Topic 0 carries the return effect.
pub const TOPIC_WORDS: [[&str; 10]; 3] = [
    [
        "earnings", "revenue", "profit", "quarterly", "guidance", "estimates", "record", "margin",
        "sales", "dividend",
    ],
    [
        "lawsuit", "antitrust", "regulators", "court", "fine", "probe", "ruling", "patent",
        "settlement", "commission",
    ],
    [
        "iphone", "launch", "vision", "unveils", "chip", "design", "watch", "ipad", "event",
        "software",
    ],
];

/// Words that show up in every topic.
pub const SHARED_WORDS: [&str; 5] = ["stock", "shares", "investors", "report", "week"];

pub const FIXTURE_START: (i32, u32, u32) = (2024, 1, 2);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureConfig {
    pub trading_days: usize,
    pub headlines: usize,
    /// Added to the return of the trading day after a topic-0 headline.
    pub effect: f64,
    /// Standard deviation of the daily return noise.
    pub noise: f64,
    /// Share of headlines dated on a weekend.
    pub weekend_share: f64,
    pub seed: u64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        Self {
            trading_days: 120,
            headlines: 200,
            effect: 0.005,
            noise: 0.002,
            weekend_share: 0.1,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub bars: Vec<PriceBar>,
    /// Sorted by date; ids are row indices.
    pub headlines: Vec<Headline>,
    /// True topic of each headline.
    pub topics: Vec<usize>,
}

fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    start
        .iter_days()
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .take(n)
        .collect()
}

fn title<R: Rng>(topic: usize, rng: &mut R) -> String {
    let pool = &TOPIC_WORDS[topic];
    let mut words: Vec<&str> = vec!["Apple"];
    words.extend(sample(rng, pool.len(), 4).into_iter().map(|i| pool[i]));
    if rng.random_bool(0.5) {
        let at = rng.random_range(1..=words.len());
        words.insert(at, SHARED_WORDS[rng.random_range(0..SHARED_WORDS.len())]);
    }
    words.join(" ")
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

pub fn generate(cfg: &FixtureConfig) -> Fixture {
    assert!(cfg.trading_days >= 2, "fixture needs at least two trading days");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (y, m, d) = FIXTURE_START;
    let days = business_days(NaiveDate::from_ymd_opt(y, m, d).unwrap(), cfg.trading_days);
    let (first, last) = (days[0], days[days.len() - 1]);
    let weekends: Vec<NaiveDate> = first
        .iter_days()
        .take_while(|d| *d <= last)
        .filter(|d| matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .collect();

    let mut items: Vec<(NaiveDate, usize, String)> = (0..cfg.headlines)
        .map(|_| {
            let date = if !weekends.is_empty() && rng.random_bool(cfg.weekend_share) {
                weekends[rng.random_range(0..weekends.len())]
            } else {
                days[rng.random_range(0..days.len())]
            };
            let topic = rng.random_range(0..TOPIC_WORDS.len());
            (date, topic, title(topic, &mut rng))
        })
        .collect();
    items.sort_by_key(|(date, _, _)| *date);

    let mut boosted = vec![false; days.len()];
    for (date, topic, _) in &items {
        if *topic == 0 {
            if let Some(i) = days.iter().position(|d| d > date) {
                boosted[i] = true;
            }
        }
    }

    let noise = Normal::new(0.0, cfg.noise).expect("finite noise level");
    let gap = Normal::new(0.0, 0.001).unwrap();
    let mut bars = Vec::with_capacity(days.len());
    let mut prev_close = 185.0;
    for (i, &date) in days.iter().enumerate() {
        let (open, close) = if i == 0 {
            (prev_close, prev_close)
        } else {
            let r = noise.sample(&mut rng) + if boosted[i] { cfg.effect } else { 0.0 };
            (
                round6(prev_close * (1.0 + gap.sample(&mut rng))),
                round6(prev_close * (1.0 + r)),
            )
        };
        let high = round6(open.max(close) * (1.0 + rng.random_range(0.0..0.004)));
        let low = round6(open.min(close) * (1.0 - rng.random_range(0.0..0.004)));
        bars.push(PriceBar {
            date,
            open,
            high,
            low,
            close,
            volume: rng.random_range(40_000_000..70_000_000),
        });
        prev_close = close;
    }

    let topics = items.iter().map(|(_, t, _)| *t).collect();
    let headlines = items
        .into_iter()
        .enumerate()
        .map(|(id, (date, _, title))| Headline {
            id: id as u64,
            date,
            title,
        })
        .collect();
    Fixture {
        bars,
        headlines,
        topics,
    }
}

/// Writes `prices.csv` and `news.csv` into `dir` and returns their paths.
pub fn write_fixture(fixture: &Fixture, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let prices = dir.join("prices.csv");
    let news = dir.join("news.csv");
    write_prices(&prices, &fixture.bars)?;
    write_headlines(&news, &fixture.headlines)?;
    Ok((prices, news))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csvio::{read_headlines, read_prices};

    #[test]
    fn shape() {
        let f = generate(&FixtureConfig::default());
        assert_eq!(f.bars.len(), 120);
        assert_eq!(f.headlines.len(), 200);
        assert_eq!(f.bars[0].date, NaiveDate::from_ymd_opt(2024, 1, 2).unwrap());
        assert!(f.bars.iter().all(|b| b.validate().is_ok()));
        assert!(f.headlines.windows(2).all(|w| w[0].date <= w[1].date));
        let weekend = f
            .headlines
            .iter()
            .filter(|h| matches!(h.date.weekday(), Weekday::Sat | Weekday::Sun))
            .count();
        assert!(weekend > 0 && weekend < 50, "{weekend} weekend headlines");
        for t in 0..3 {
            assert!(f.topics.iter().filter(|&&x| x == t).count() > 40);
        }
    }

    #[test]
    fn seeded() {
        let cfg = FixtureConfig::default();
        assert_eq!(generate(&cfg), generate(&cfg));
        let other = generate(&FixtureConfig { seed: 7, ..cfg });
        assert_ne!(generate(&cfg).headlines, other.headlines);
    }

    #[test]
    fn boosted_days_carry_the_effect() {
        let cfg = FixtureConfig {
            noise: 1e-9,
            ..FixtureConfig::default()
        };
        let f = generate(&cfg);
        let after_topic0 = |i: usize| {
            f.headlines.iter().zip(&f.topics).any(|(h, &t)| {
                t == 0 && h.date < f.bars[i].date && (i == 0 || h.date >= f.bars[i - 1].date)
            })
        };
        for i in 1..f.bars.len() {
            let r = f.bars[i].close / f.bars[i - 1].close - 1.0;
            let expected = if after_topic0(i) { cfg.effect } else { 0.0 };
            assert!((r - expected).abs() < 1e-4, "day {i}: {r} vs {expected}");
        }
    }

    #[test]
    fn bundled_files_match_the_generator() {
        let f = generate(&FixtureConfig::default());
        let prices = read_prices(
            include_str!("../fixtures/prices.csv").as_bytes(),
            Path::new("prices.csv"),
        )
        .unwrap();
        let news = read_headlines(
            include_str!("../fixtures/news.csv").as_bytes(),
            Path::new("news.csv"),
        )
        .unwrap();
        assert_eq!(prices, f.bars);
        assert_eq!(news.headlines, f.headlines);
    }
}
