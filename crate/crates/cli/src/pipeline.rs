//! Stage functions and the commands built from them.
//!
//! Every command reads its inputs from the [`RunConfig`], writes its files
//! under `out_dir` and returns what should be printed on stdout. Errors carry
//! the name of the stage that failed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use newsimpact_core::analysis::{
    build_exposures, ols_fit, topic_importance, topic_name, ExposurePanel, ImportanceRanking,
    RegressionResult,
};
use newsimpact_core::cluster::{
    kmeans_fit, pca_project, select_k, silhouette_score, KMeansConfig, SelectKConfig,
    SilhouetteReport,
};
use newsimpact_core::corpus::{compute_returns, Headline, PriceBar, ReturnSeries};
use newsimpact_core::embed::EmbeddingMatrix;
use newsimpact_core::lda::{build_vocab, lda_fit, top_keywords, LdaConfig};

use crate::config::{Mode, RunConfig};
use crate::csvio::{
    load_clusters, load_coefficients, load_headlines, load_prices, write_clusters,
    write_diagnostics, write_headlines, write_importance, write_keywords, write_prices,
    write_regression, write_returns, write_silhouette, write_text, HeadlineSet,
};
use crate::emb1::save_embeddings;
use crate::error::{Error, Result, StageError, StageExt};
use crate::fixture::{generate, write_fixture, FixtureConfig};
use crate::provider::{embed, ProviderSpec};
use crate::report::{
    importance_markdown, keywords_markdown, num, regression_markdown, regression_text,
    silhouette_markdown,
};
use crate::svg::write_plot;

pub const STOPWORDS_EN: &str = include_str!("../data/stopwords_en.txt");

pub type StageResult<T> = std::result::Result<T, StageError>;

/// What a command printed and which files it wrote.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandOutput {
    pub stdout: String,
    pub files: Vec<PathBuf>,
}

/// One word per line; blank lines and `#` comments are skipped.
pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

fn load_stopwords(cfg: &RunConfig) -> Result<BTreeSet<String>> {
    match &cfg.stopwords {
        None => Ok(parse_stopwords(STOPWORDS_EN)),
        Some(path) => std::fs::read_to_string(path)
            .map(|t| parse_stopwords(&t))
            .map_err(|source| Error::Read {
                path: path.clone(),
                source,
            }),
    }
}

pub struct Prices {
    pub path: PathBuf,
    pub bars: Vec<PriceBar>,
    pub returns: ReturnSeries,
}

pub fn ingest_prices(cfg: &RunConfig) -> StageResult<Prices> {
    let path = cfg.require_prices().stage("ingest")?.to_path_buf();
    let bars = load_prices(&path).stage("ingest")?;
    let returns = compute_returns(&bars).stage("ingest")?;
    Ok(Prices {
        path,
        bars,
        returns,
    })
}

pub struct News {
    pub path: PathBuf,
    pub set: HeadlineSet,
}

pub fn ingest_news(cfg: &RunConfig) -> StageResult<News> {
    let path = cfg.require_news().stage("ingest")?.to_path_buf();
    let set = load_headlines(&path).stage("ingest")?;
    if set.headlines.is_empty() {
        return Err(newsimpact_core::Error::EmptyCorpus).stage("ingest");
    }
    Ok(News { path, set })
}

pub fn embed_headlines(cfg: &RunConfig, headlines: &[Headline]) -> StageResult<EmbeddingMatrix> {
    let spec = cfg.provider_spec().stage("embed")?;
    embed(headlines, &spec, cfg.seed, cfg.normalize).stage("embed")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub k: usize,
    pub labels: Vec<usize>,
    /// Absent when labels were read from a file.
    pub silhouette: Option<SilhouetteReport>,
}

/// Chooses K by silhouette over `[k_min, k_max]`, or fits the fixed `k`.
pub fn cluster(cfg: &RunConfig, emb: &EmbeddingMatrix) -> StageResult<Clustering> {
    let points = emb.to_matrix();
    match cfg.k {
        None => {
            let sel = select_k(
                &points,
                &SelectKConfig {
                    k_min: cfg.k_min,
                    k_max: cfg.k_max,
                    seed: cfg.seed,
                    n_init: cfg.n_init,
                    max_iter: cfg.max_iter,
                    sample_cap: cfg.sample_cap,
                },
            )
            .stage("cluster")?;
            Ok(Clustering {
                k: sel.model.k,
                labels: sel.model.labels,
                silhouette: Some(sel.report),
            })
        }
        Some(k) => {
            let km = KMeansConfig {
                k,
                seed: cfg.seed,
                n_init: cfg.n_init,
                max_iter: cfg.max_iter,
            };
            let model = kmeans_fit(&points, &km).stage("cluster")?;
            let score =
                silhouette_score(&points, &model.labels, cfg.sample_cap, cfg.seed).stage("cluster")?;
            let n = points.rows();
            let exact = n <= cfg.sample_cap;
            Ok(Clustering {
                k,
                labels: model.labels,
                silhouette: Some(SilhouetteReport {
                    scores: vec![(k, score)],
                    chosen_k: k,
                    exact,
                    n_evaluated: if exact { n } else { cfg.sample_cap },
                }),
            })
        }
    }
}

/// Reads `id,label` rows and returns one label per headline.
pub fn clusters_from_file(path: &Path, headlines: &[Headline]) -> Result<Clustering> {
    let rows: BTreeMap<String, usize> = load_clusters(path)?.into_iter().collect();
    let labels = headlines
        .iter()
        .map(|h| {
            rows.get(&h.id.to_string()).copied().ok_or_else(|| {
                Error::Config(format!(
                    "{} has no label for headline id {}",
                    path.display(),
                    h.id
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let k = labels.iter().max().map_or(0, |m| m + 1);
    Ok(Clustering {
        k,
        labels,
        silhouette: None,
    })
}

/// Labels from `--clusters` when given, otherwise embeds and clusters.
fn labels_for(cfg: &RunConfig, headlines: &[Headline]) -> StageResult<Clustering> {
    match &cfg.clusters {
        Some(path) => clusters_from_file(path, headlines).stage("cluster"),
        None => cluster(cfg, &embed_headlines(cfg, headlines)?),
    }
}

pub fn regress(
    cfg: &RunConfig,
    headlines: &[Headline],
    clustering: &Clustering,
    returns: &ReturnSeries,
) -> StageResult<(ExposurePanel, RegressionResult)> {
    let panel = build_exposures(
        headlines,
        &clustering.labels,
        clustering.k,
        returns,
        cfg.mode.into(),
        cfg.lag(),
        cfg.zero_fill,
    )
    .stage("regress")?;
    let fit = ols_fit(&panel).stage("regress")?;
    Ok((panel, fit))
}

/// Writes the PCA scatter plot of the embeddings.
pub fn plot(emb: &EmbeddingMatrix, clustering: &Clustering, path: &Path) -> StageResult<()> {
    let projection = pca_project(&emb.to_matrix()).stage("plot")?;
    write_plot(&projection, &clustering.labels, clustering.k, path).stage("plot")
}

fn ids(headlines: &[Headline]) -> Vec<String> {
    headlines.iter().map(|h| h.id.to_string()).collect()
}

pub fn cmd_ingest_prices(cfg: &RunConfig) -> StageResult<CommandOutput> {
    let p = ingest_prices(cfg)?;
    let (bars_out, returns_out) = (cfg.out("prices.csv"), cfg.out("returns.csv"));
    write_prices(&bars_out, &p.bars).stage("ingest")?;
    write_returns(&returns_out, &p.returns).stage("ingest")?;
    let stdout = format!(
        "{} trading days from {} to {}, {} returns\n",
        p.bars.len(),
        p.bars[0].date,
        p.bars[p.bars.len() - 1].date,
        p.returns.len()
    );
    Ok(CommandOutput {
        stdout,
        files: vec![bars_out, returns_out],
    })
}

pub fn cmd_ingest_news(cfg: &RunConfig) -> StageResult<CommandOutput> {
    let news = ingest_news(cfg)?;
    let hs = &news.set.headlines;
    let out = cfg.out("headlines.csv");
    write_headlines(&out, hs).stage("ingest")?;
    let (first, last) = date_range(hs);
    let stdout = format!(
        "{} headlines from {first} to {last} ({} rows with empty titles skipped)\n",
        hs.len(),
        news.set.skipped_empty
    );
    Ok(CommandOutput {
        stdout,
        files: vec![out],
    })
}

fn date_range(hs: &[Headline]) -> (String, String) {
    let first = hs.iter().map(|h| h.date).min().map(|d| d.to_string());
    let last = hs.iter().map(|h| h.date).max().map(|d| d.to_string());
    (first.unwrap_or_default(), last.unwrap_or_default())
}

pub fn cmd_embed(cfg: &RunConfig) -> StageResult<CommandOutput> {
    let news = ingest_news(cfg)?;
    let emb = embed_headlines(cfg, &news.set.headlines)?;
    let out = cfg.out("embeddings.emb1");
    save_embeddings(&emb, &out).stage("embed")?;
    let stdout = format!(
        "embedded {} headlines, dimension {}, provider {}\n",
        emb.len(),
        emb.dim(),
        cfg.provider_spec().stage("embed")?.kind()
    );
    Ok(CommandOutput {
        stdout,
        files: vec![out],
    })
}

fn cluster_sizes(c: &Clustering) -> Vec<usize> {
    let mut sizes = vec![0; c.k];
    for &l in &c.labels {
        sizes[l] += 1;
    }
    sizes
}

pub fn cmd_cluster(cfg: &RunConfig) -> StageResult<CommandOutput> {
    let news = ingest_news(cfg)?;
    let hs = &news.set.headlines;
    let emb = embed_headlines(cfg, hs)?;
    let c = cluster(cfg, &emb)?;
    let clusters_out = cfg.out("clusters.csv");
    write_clusters(&clusters_out, &ids(hs), &c.labels).stage("cluster")?;
    let mut files = vec![clusters_out];
    let mut stdout = String::new();
    if let Some(report) = &c.silhouette {
        let path = cfg.out("silhouette.csv");
        write_silhouette(&path, report).stage("cluster")?;
        files.push(path);
        stdout.push_str(&silhouette_markdown(report));
    }
    let _ = writeln!(stdout, "K = {}; cluster sizes {:?}", c.k, cluster_sizes(&c));
    Ok(CommandOutput { stdout, files })
}

pub fn cmd_regress(cfg: &RunConfig) -> StageResult<CommandOutput> {
    let prices = ingest_prices(cfg)?;
    let news = ingest_news(cfg)?;
    let hs = &news.set.headlines;
    let c = labels_for(cfg, hs)?;
    let (_, fit) = regress(cfg, hs, &c, &prices.returns)?;
    let (reg_out, diag_out) = (cfg.out("regression.csv"), cfg.out("diagnostics.csv"));
    write_regression(&reg_out, &fit).stage("regress")?;
    write_diagnostics(&diag_out, &fit).stage("regress")?;
    Ok(CommandOutput {
        stdout: regression_text(&fit),
        files: vec![reg_out, diag_out],
    })
}

/// Rebuilds `[const, Topic_0, ..]` from a regression table.
fn coefficients_from_table(path: &Path) -> Result<Vec<f64>> {
    let rows = load_coefficients(path)?;
    let constant = rows
        .iter()
        .find(|(n, _)| n == "const")
        .map_or(0.0, |(_, c)| *c);
    let mut coef = vec![constant];
    let topics: Vec<f64> = (0..)
        .map_while(|k| {
            let name = topic_name(k);
            rows.iter().find(|(n, _)| *n == name).map(|(_, c)| *c)
        })
        .collect();
    if topics.is_empty() {
        return Err(Error::Config(format!(
            "{} has no Topic_0 row",
            path.display()
        )));
    }
    coef.extend(topics);
    Ok(coef)
}

pub fn cmd_importance(cfg: &RunConfig) -> StageResult<CommandOutput> {
    let coef = match &cfg.regression {
        Some(path) => coefficients_from_table(path).stage("importance")?,
        None => {
            let prices = ingest_prices(cfg)?;
            let news = ingest_news(cfg)?;
            let c = labels_for(cfg, &news.set.headlines)?;
            regress(cfg, &news.set.headlines, &c, &prices.returns)?.1.coef
        }
    };
    let ranking = topic_importance(&coef).stage("importance")?;
    let out = cfg.out("importance.csv");
    write_importance(&out, &ranking).stage("importance")?;
    Ok(CommandOutput {
        stdout: importance_markdown(&ranking),
        files: vec![out],
    })
}

pub fn cmd_plot(cfg: &RunConfig) -> StageResult<CommandOutput> {
    let news = ingest_news(cfg)?;
    let hs = &news.set.headlines;
    let emb = embed_headlines(cfg, hs)?;
    let c = match &cfg.clusters {
        Some(path) => clusters_from_file(path, hs).stage("cluster")?,
        None => cluster(cfg, &emb)?,
    };
    let out = cfg.out("clusters.svg");
    plot(&emb, &c, &out)?;
    Ok(CommandOutput {
        stdout: format!("plotted {} headlines in {} topics\n", hs.len(), c.k),
        files: vec![out],
    })
}

pub fn cmd_lda(cfg: &RunConfig) -> StageResult<CommandOutput> {
    let news = ingest_news(cfg)?;
    let stopwords = load_stopwords(cfg).stage("lda")?;
    let (vocab, docs) = build_vocab(&news.set.headlines, cfg.min_count, &stopwords).stage("lda")?;
    let lda = LdaConfig {
        n_topics: cfg.topics,
        alpha: cfg.alpha,
        beta: cfg.beta,
        iterations: cfg.iters,
        seed: cfg.seed,
    };
    let model = lda_fit(&docs, &vocab, &lda).stage("lda")?;
    let keywords = top_keywords(&model, &vocab, cfg.top_k).stage("lda")?;
    let (csv_out, md_out) = (cfg.out("lda_keywords.csv"), cfg.out("lda_keywords.md"));
    write_keywords(&csv_out, &keywords).stage("lda")?;
    let md = format!(
        "# LDA keywords\n\n{} topics, {} sweeps, seed {}, vocabulary of {} tokens.\n\n{}",
        cfg.topics,
        cfg.iters,
        cfg.seed,
        vocab.len(),
        keywords_markdown(&keywords)
    );
    write_text(&md_out, &md).stage("lda")?;
    Ok(CommandOutput {
        stdout: keywords_markdown(&keywords),
        files: vec![csv_out, md_out],
    })
}

/// Writes the bundled-style synthetic corpus for `cfg.seed` into `out_dir`.
pub fn cmd_fixture(cfg: &RunConfig) -> StageResult<CommandOutput> {
    let f = generate(&FixtureConfig {
        seed: cfg.seed,
        ..FixtureConfig::default()
    });
    let (prices, news) = write_fixture(&f, &cfg.out_dir).stage("fixture")?;
    Ok(CommandOutput {
        stdout: format!(
            "wrote {} trading days and {} headlines\n",
            f.bars.len(),
            f.headlines.len()
        ),
        files: vec![prices, news],
    })
}

/// Everything the full pipeline computed.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub headlines: Vec<Headline>,
    pub clustering: Clustering,
    pub panel: ExposurePanel,
    pub fit: RegressionResult,
    pub ranking: ImportanceRanking,
    pub report: String,
    pub files: Vec<PathBuf>,
}

pub fn run_pipeline(cfg: &RunConfig) -> StageResult<PipelineOutput> {
    let prices = ingest_prices(cfg)?;
    let news = ingest_news(cfg)?;
    let hs = &news.set.headlines;
    let emb = embed_headlines(cfg, hs)?;
    let c = match &cfg.clusters {
        Some(path) => clusters_from_file(path, hs).stage("cluster")?,
        None => cluster(cfg, &emb)?,
    };
    let (panel, fit) = regress(cfg, hs, &c, &prices.returns)?;
    let ranking = topic_importance(&fit.coef).stage("importance")?;

    let mut files = Vec::new();
    let mut out = |name: &str| {
        let p = cfg.out(name);
        files.push(p.clone());
        p
    };
    write_clusters(&out("clusters.csv"), &ids(hs), &c.labels).stage("cluster")?;
    if let Some(report) = &c.silhouette {
        write_silhouette(&out("silhouette.csv"), report).stage("cluster")?;
    }
    write_regression(&out("regression.csv"), &fit).stage("regress")?;
    write_diagnostics(&out("diagnostics.csv"), &fit).stage("regress")?;
    write_importance(&out("importance.csv"), &ranking).stage("importance")?;
    plot(&emb, &c, &out("clusters.svg"))?;
    let report = render_report(cfg, &prices, &news, &emb, &c, &panel, &fit, &ranking)
        .stage("report")?;
    write_text(&out("report.md"), &report).stage("report")?;

    Ok(PipelineOutput {
        headlines: news.set.headlines,
        clustering: c,
        panel,
        fit,
        ranking,
        report,
        files,
    })
}

pub fn cmd_pipeline(cfg: &RunConfig) -> StageResult<CommandOutput> {
    let out = run_pipeline(cfg)?;
    let top = out.ranking.entries[0];
    let stdout = format!(
        "{} topics; most important {} ({}); report written to {}\n",
        out.clustering.k,
        topic_name(top.0),
        num(top.1, 3),
        cfg.out("report.md").display()
    );
    Ok(CommandOutput {
        stdout,
        files: out.files,
    })
}

#[allow(clippy::too_many_arguments)]
fn render_report(
    cfg: &RunConfig,
    prices: &Prices,
    news: &News,
    emb: &EmbeddingMatrix,
    c: &Clustering,
    panel: &ExposurePanel,
    fit: &RegressionResult,
    ranking: &ImportanceRanking,
) -> Result<String> {
    let spec = cfg.provider_spec()?;
    let provider = match &spec {
        ProviderSpec::Hashing { .. } => "hashing".to_string(),
        ProviderSpec::File { source } => format!("file ({})", source.display()),
        ProviderSpec::Http(h) => format!("http ({})", h.endpoint),
    };
    let hs = &news.set.headlines;
    let (first, last) = date_range(hs);
    let dates = prices.returns.dates();
    let mode = match cfg.mode {
        Mode::PerDay => "per-day",
        Mode::PerHeadline => "per-headline (sum-to-zero topic coding)",
    };
    let lag = if cfg.lag == 0 {
        "0 (same-day return)"
    } else {
        "1 (next trading day's return)"
    };
    let on_off = |b: bool| if b { "on" } else { "off" };

    let mut r = String::new();
    let _ = writeln!(r, "# News topic impact report\n");
    let _ = writeln!(
        r,
        "- Prices: `{}`, {} returns from {} to {}",
        prices.path.display(),
        prices.returns.len(),
        dates[0],
        dates[dates.len() - 1]
    );
    let _ = writeln!(
        r,
        "- Headlines: `{}`, {} headlines from {first} to {last} ({} empty rows skipped)",
        news.path.display(),
        hs.len(),
        news.set.skipped_empty
    );
    let _ = writeln!(
        r,
        "- Embeddings: {provider}, dimension {}, L2 normalization {}",
        emb.dim(),
        on_off(cfg.normalize)
    );
    let _ = writeln!(r, "- Seed: {}", cfg.seed);
    let _ = writeln!(
        r,
        "- Observations: {mode}, lag {lag}, zero-fill {}; {} rows",
        on_off(cfg.zero_fill),
        panel.n_obs()
    );
    match (&c.silhouette, cfg.k) {
        (None, _) => {
            let _ = writeln!(r, "- Topics: K = {} read from cluster assignments", c.k);
        }
        (Some(s), k) => {
            let how = if k.is_some() {
                "fixed".to_string()
            } else {
                format!("chosen by silhouette over [{}, {}]", cfg.k_min, cfg.k_max)
            };
            let path = if s.exact {
                format!("exact silhouette over all {} points", s.n_evaluated)
            } else {
                format!("silhouette sampled on {} of {} points", s.n_evaluated, hs.len())
            };
            let _ = writeln!(r, "- Topics: K = {} {how}; {path}", c.k);
        }
    }

    if let Some(s) = &c.silhouette {
        let _ = writeln!(r, "\n## Number of topics\n");
        r.push_str(&silhouette_markdown(s));
    }
    let _ = writeln!(r, "\n## Topic sizes\n");
    let _ = writeln!(r, "| Topic | Headlines |");
    let _ = writeln!(r, "| --- | --- |");
    for (t, n) in cluster_sizes(c).into_iter().enumerate() {
        let _ = writeln!(r, "| {} | {n} |", topic_name(t));
    }
    let _ = writeln!(r, "\n## Regression of returns on topic exposures\n");
    r.push_str(&regression_markdown(fit));
    let _ = writeln!(r, "\n## Topic importance\n");
    r.push_str(&importance_markdown(ranking));
    Ok(r)
}
