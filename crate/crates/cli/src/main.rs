use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use newsimpact::config::{Mode, Overrides, ProviderKind, RunConfig};
use newsimpact::error::{exit, StageExt};
use newsimpact::pipeline::{self, CommandOutput, StageResult};

/// Relate news topics to daily stock returns.
#[derive(Parser)]
#[command(name = "newsimpact", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a price CSV and write it back with its daily returns.
    IngestPrices,
    /// Validate a headline CSV and write the cleaned rows.
    IngestNews,
    /// Embed headlines and save them as an EMB1 file.
    Embed,
    /// Cluster headline embeddings into topics.
    Cluster,
    /// Regress returns on daily topic exposures.
    Regress,
    /// Rank topics by normalized absolute coefficient.
    Importance,
    /// Fit an LDA topic model and write its keyword table.
    Lda,
    /// Draw the 2-D PCA projection of the embeddings colored by topic.
    Plot,
    /// Run every stage and write the report.
    Pipeline,
    /// Write a synthetic prices/news corpus with a known topic effect.
    Fixture,
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args)]
struct Flags {
    /// Daily price CSV (Date,Open,High,Low,Close,Volume).
    #[arg(long, global = true)]
    prices: Option<PathBuf>,
    /// Headline CSV (date,title).
    #[arg(long, global = true)]
    news: Option<PathBuf>,
    /// EMB1 file read by the file provider.
    #[arg(long, global = true)]
    embeddings: Option<PathBuf>,
    /// Precomputed id,label cluster assignments.
    #[arg(long, global = true)]
    clusters: Option<PathBuf>,
    /// Regression table read by `importance`.
    #[arg(long, global = true)]
    regression: Option<PathBuf>,
    /// Output directory [default: newsimpact-out].
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// TOML settings file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    provider: Option<ProviderKind>,
    /// Hashing embedding dimension.
    #[arg(long, global = true, value_parser = at_least_one)]
    dim: Option<usize>,
    /// Embedding service URL for the http provider.
    #[arg(long, global = true)]
    endpoint: Option<String>,
    #[arg(long, global = true, value_parser = at_least_one)]
    batch_size: Option<usize>,
    /// HTTP timeout in seconds.
    #[arg(long, global = true)]
    timeout: Option<u64>,
    /// Keep embeddings as the provider returns them.
    #[arg(long, global = true)]
    no_normalize: bool,
    /// Fixed number of topics instead of silhouette selection.
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    k_min: Option<usize>,
    #[arg(long, global = true)]
    k_max: Option<usize>,
    /// 1 regresses on the next trading day's return, 0 on the same day's.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(0..=1))]
    lag: Option<u8>,
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Drop observations without a matching return instead of using 0.
    #[arg(long, global = true)]
    no_zero_fill: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of LDA topics.
    #[arg(long, global = true, value_parser = at_least_one)]
    topics: Option<usize>,
    /// Gibbs sweeps for LDA.
    #[arg(long, global = true, value_parser = at_least_one)]
    iters: Option<usize>,
    /// Keywords listed per LDA topic.
    #[arg(long, global = true, value_parser = at_least_one)]
    top_k: Option<usize>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Minimum corpus count for an LDA vocabulary token.
    #[arg(long, global = true, value_parser = at_least_one)]
    min_count: Option<usize>,
    /// Stopword file, one word per line (default: bundled English list).
    #[arg(long, global = true)]
    stopwords: Option<PathBuf>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            prices: self.prices.clone(),
            news: self.news.clone(),
            embeddings: self.embeddings.clone(),
            clusters: self.clusters.clone(),
            regression: self.regression.clone(),
            out_dir: self.out_dir.clone(),
            provider: self.provider,
            dim: self.dim,
            endpoint: self.endpoint.clone(),
            batch_size: self.batch_size,
            timeout_secs: self.timeout,
            normalize: self.no_normalize.then_some(false),
            k: self.k,
            k_min: self.k_min,
            k_max: self.k_max,
            n_init: None,
            max_iter: None,
            sample_cap: None,
            lag: self.lag,
            mode: self.mode,
            zero_fill: self.no_zero_fill.then_some(false),
            seed: self.seed,
            topics: self.topics,
            iters: self.iters,
            top_k: self.top_k,
            alpha: self.alpha,
            beta: self.beta,
            min_count: self.min_count,
            stopwords: self.stopwords.clone(),
        }
    }
}

fn build_config(flags: &Flags) -> StageResult<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &flags.config {
        cfg.apply(&Overrides::load(path).stage("config")?);
    }
    cfg.apply(&flags.overrides());
    cfg.validate().stage("config")?;
    Ok(cfg)
}

fn run(cli: &Cli) -> StageResult<CommandOutput> {
    let cfg = build_config(&cli.flags)?;
    match cli.command {
        Command::IngestPrices => pipeline::cmd_ingest_prices(&cfg),
        Command::IngestNews => pipeline::cmd_ingest_news(&cfg),
        Command::Embed => pipeline::cmd_embed(&cfg),
        Command::Cluster => pipeline::cmd_cluster(&cfg),
        Command::Regress => pipeline::cmd_regress(&cfg),
        Command::Importance => pipeline::cmd_importance(&cfg),
        Command::Lda => pipeline::cmd_lda(&cfg),
        Command::Plot => pipeline::cmd_plot(&cfg),
        Command::Pipeline => pipeline::cmd_pipeline(&cfg),
        Command::Fixture => pipeline::cmd_fixture(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            for f in &out.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::from(exit::OK as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
