//! Run configuration. Values come from built-in defaults, then an optional
//! flat `key = value` file, then command-line flags, each layer overriding
//! the previous one.

use std::path::{Path, PathBuf};
use std::time::Duration;

use newsimpact_core::analysis::ExposureMode;
use newsimpact_core::cluster::{
    DEFAULT_K_MAX, DEFAULT_K_MIN, DEFAULT_MAX_ITER, DEFAULT_N_INIT, DEFAULT_SAMPLE_CAP,
    DEFAULT_SEED,
};
use newsimpact_core::corpus::Lag;
use newsimpact_core::embed::DEFAULT_HASHING_DIM;
use newsimpact_core::lda::{DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_ITERATIONS, DEFAULT_MIN_COUNT};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::http::{HttpConfig, DEFAULT_BATCH_SIZE, DEFAULT_TIMEOUT};
use crate::provider::ProviderSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    #[default]
    Hashing,
    File,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    PerDay,
    PerHeadline,
}

impl From<Mode> for ExposureMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::PerDay => ExposureMode::PerDay,
            Mode::PerHeadline => ExposureMode::PerHeadline,
        }
    }
}

pub const DEFAULT_OUT_DIR: &str = "newsimpact-out";
pub const DEFAULT_LDA_TOPICS: usize = 5;
pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub prices: Option<PathBuf>,
    pub news: Option<PathBuf>,
    /// EMB1 input for the file provider.
    pub embeddings: Option<PathBuf>,
    /// Precomputed `id,label` assignments; clustering is skipped when set.
    pub clusters: Option<PathBuf>,
    /// Precomputed regression table read by `importance`.
    pub regression: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub provider: ProviderKind,
    pub dim: usize,
    pub endpoint: Option<String>,
    pub batch_size: usize,
    pub timeout_secs: u64,
    pub normalize: bool,
    /// Fixed cluster count; when absent K is chosen by silhouette.
    pub k: Option<usize>,
    pub k_min: usize,
    pub k_max: usize,
    pub n_init: usize,
    pub max_iter: usize,
    pub sample_cap: usize,
    pub lag: u8,
    pub mode: Mode,
    pub zero_fill: bool,
    /// Shared by every stochastic stage.
    pub seed: u64,
    pub topics: usize,
    pub iters: usize,
    pub top_k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub min_count: usize,
    pub stopwords: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            prices: None,
            news: None,
            embeddings: None,
            clusters: None,
            regression: None,
            out_dir: PathBuf::from(DEFAULT_OUT_DIR),
            provider: ProviderKind::Hashing,
            dim: DEFAULT_HASHING_DIM,
            endpoint: None,
            batch_size: DEFAULT_BATCH_SIZE,
            timeout_secs: DEFAULT_TIMEOUT.as_secs(),
            normalize: true,
            k: None,
            k_min: DEFAULT_K_MIN,
            k_max: DEFAULT_K_MAX,
            n_init: DEFAULT_N_INIT,
            max_iter: DEFAULT_MAX_ITER,
            sample_cap: DEFAULT_SAMPLE_CAP,
            lag: 1,
            mode: Mode::PerDay,
            zero_fill: true,
            seed: DEFAULT_SEED,
            topics: DEFAULT_LDA_TOPICS,
            iters: DEFAULT_ITERATIONS,
            top_k: DEFAULT_TOP_K,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            min_count: DEFAULT_MIN_COUNT,
            stopwords: None,
        }
    }
}

/// One layer of settings; unset fields leave the lower layer alone.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub prices: Option<PathBuf>,
    pub news: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub clusters: Option<PathBuf>,
    pub regression: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub provider: Option<ProviderKind>,
    pub dim: Option<usize>,
    pub endpoint: Option<String>,
    pub batch_size: Option<usize>,
    pub timeout_secs: Option<u64>,
    pub normalize: Option<bool>,
    pub k: Option<usize>,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    pub n_init: Option<usize>,
    pub max_iter: Option<usize>,
    pub sample_cap: Option<usize>,
    pub lag: Option<u8>,
    pub mode: Option<Mode>,
    pub zero_fill: Option<bool>,
    pub seed: Option<u64>,
    pub topics: Option<usize>,
    pub iters: Option<usize>,
    pub top_k: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub min_count: Option<usize>,
    pub stopwords: Option<PathBuf>,
}

impl Overrides {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut o = Self::parse(&text)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), e)))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut o.prices,
            &mut o.news,
            &mut o.embeddings,
            &mut o.clusters,
            &mut o.regression,
            &mut o.out_dir,
            &mut o.stopwords,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(o)
    }
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = &o.$f {
                    self.$f = v.clone().into();
                }
            )*};
        }
        set!(prices, news, embeddings, clusters, regression, endpoint, k, stopwords);
        set!(out_dir, provider, dim, batch_size, timeout_secs, normalize, k_min, k_max);
        set!(n_init, max_iter, sample_cap, lag, mode, zero_fill, seed, topics, iters, top_k);
        set!(alpha, beta, min_count);
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.k_min < 2 || self.k_min > self.k_max {
            return bad(format!(
                "k range [{}, {}] must satisfy 2 <= k_min <= k_max",
                self.k_min, self.k_max
            ));
        }
        if self.k == Some(0) {
            return bad("k must be at least 1".into());
        }
        if self.lag > 1 {
            return bad(format!("lag must be 0 or 1, got {}", self.lag));
        }
        for (name, v) in [
            ("dim", self.dim),
            ("batch_size", self.batch_size),
            ("n_init", self.n_init),
            ("max_iter", self.max_iter),
            ("sample_cap", self.sample_cap),
            ("topics", self.topics),
            ("iters", self.iters),
            ("top_k", self.top_k),
            ("min_count", self.min_count),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return bad("alpha and beta must be positive".into());
        }
        Ok(())
    }

    pub fn lag(&self) -> Lag {
        if self.lag == 0 {
            Lag::SameDay
        } else {
            Lag::NextDay
        }
    }

    pub fn provider_spec(&self) -> Result<ProviderSpec> {
        Ok(match self.provider {
            ProviderKind::Hashing => ProviderSpec::Hashing { dim: self.dim },
            ProviderKind::File => ProviderSpec::File {
                source: self.embeddings.clone().ok_or_else(|| {
                    Error::Config("the file provider needs --embeddings".into())
                })?,
            },
            ProviderKind::Http => ProviderSpec::Http(HttpConfig::resolve(
                self.endpoint.clone(),
                self.batch_size,
                Duration::from_secs(self.timeout_secs),
            )?),
        })
    }

    pub fn require_prices(&self) -> Result<&Path> {
        self.prices
            .as_deref()
            .ok_or_else(|| Error::Config("no prices file given (--prices)".into()))
    }

    pub fn require_news(&self) -> Result<&Path> {
        self.news
            .as_deref()
            .ok_or_else(|| Error::Config("no headlines file given (--news)".into()))
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layers_override_in_order() {
        let file = Overrides::parse("k_min = 3\nk_max = 6\nmode = \"per-headline\"\nseed = 7\n").unwrap();
        let flags = Overrides {
            seed: Some(9),
            ..Default::default()
        };
        let mut cfg = RunConfig::default();
        cfg.apply(&file);
        cfg.apply(&flags);
        assert_eq!((cfg.k_min, cfg.k_max), (3, 6));
        assert_eq!(cfg.mode, Mode::PerHeadline);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.lag, 1);
        assert!(cfg.zero_fill);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Overrides::parse("kmin = 3").is_err());
        assert!(Overrides::parse("provider = \"telepathy\"").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::default();
        cfg.validate().unwrap();
        cfg.k_min = 1;
        assert!(cfg.validate().is_err());
        cfg = RunConfig {
            lag: 2,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg = RunConfig {
            topics: 0,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn file_provider_needs_a_path() {
        let cfg = RunConfig {
            provider: ProviderKind::File,
            ..RunConfig::default()
        };
        assert!(cfg.provider_spec().is_err());
    }
}
