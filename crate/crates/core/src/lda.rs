//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Headline;
use crate::linalg::Matrix;
use crate::text::tokenize;
use crate::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_ITERATIONS: usize = 500;
pub const DEFAULT_MIN_COUNT: usize = 2;

/// Token ↔ id mapping with ids assigned in lexicographic token order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    ids: BTreeMap<String, usize>,
    tokens: Vec<String>,
    doc_freq: Vec<usize>,
}

impl Vocab {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Number of documents containing each token.
    pub fn doc_freq(&self, id: usize) -> usize {
        self.doc_freq[id]
    }
}

/// A document as a sequence of vocabulary ids.
pub type Doc = Vec<usize>;

/// Tokenizes titles, removes stopwords and tokens seen fewer than
/// `min_count` times in the corpus. Documents left empty are kept.
pub fn build_vocab(
    headlines: &[Headline],
    min_count: usize,
    stopwords: &BTreeSet<String>,
) -> Result<(Vocab, Vec<Doc>)> {
    if headlines.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let raw: Vec<Vec<String>> = headlines
        .iter()
        .map(|h| {
            tokenize(&h.title)
                .into_iter()
                .filter(|t| !stopwords.contains(t))
                .collect()
        })
        .collect();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in raw.iter().flatten() {
        *counts.entry(t.as_str()).or_default() += 1;
    }
    let tokens: Vec<String> = counts
        .into_iter()
        .filter(|(_, c)| *c >= min_count)
        .map(|(t, _)| String::from(t))
        .collect();
    if tokens.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let ids: BTreeMap<String, usize> = tokens
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, t)| (t, i))
        .collect();
    let docs: Vec<Doc> = raw
        .iter()
        .map(|d| d.iter().filter_map(|t| ids.get(t).copied()).collect())
        .collect();
    let mut doc_freq = vec![0; tokens.len()];
    for d in &docs {
        for id in d.iter().copied().collect::<BTreeSet<_>>() {
            doc_freq[id] += 1;
        }
    }
    Ok((
        Vocab {
            ids,
            tokens,
            doc_freq,
        },
        docs,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaConfig {
    pub n_topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl LdaConfig {
    pub fn new(n_topics: usize) -> Self {
        Self {
            n_topics,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            iterations: DEFAULT_ITERATIONS,
            seed: crate::cluster::DEFAULT_SEED,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |name, reason| Err(Error::InvalidParameter { name, reason });
        if self.n_topics == 0 {
            return bad("topics", "must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha", "must be positive");
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta", "must be positive");
        }
        if self.iterations == 0 {
            return bad("iterations", "must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub n_topics: usize,
    pub alpha: f64,
    pub beta: f64,
    /// `K × V` topic-word distribution.
    pub phi: Matrix,
    /// `D × K` document-topic distribution.
    pub theta: Matrix,
    pub seed: u64,
    pub n_iterations: usize,
    /// Final topic of every token, per document.
    pub assignments: Vec<Vec<usize>>,
}

/// Collapsed Gibbs sampler state. Exposed so callers can trace sweeps.
#[derive(Debug, Clone)]
pub struct GibbsSampler<'a> {
    docs: &'a [Doc],
    vocab_size: usize,
    config: LdaConfig,
    z: Vec<Vec<usize>>,
    doc_topic: Vec<Vec<usize>>,
    topic_word: Vec<Vec<usize>>,
    topic_total: Vec<usize>,
    rng: ChaCha8Rng,
    sweeps: usize,
    cumulative: Vec<f64>,
}

impl<'a> GibbsSampler<'a> {
    /// Assigns every token a uniformly random topic.
    pub fn new(docs: &'a [Doc], vocab_size: usize, config: LdaConfig) -> Result<Self> {
        config.validate()?;
        if docs.iter().all(|d| d.is_empty()) {
            return Err(Error::EmptyCorpus);
        }
        if let Some(&w) = docs.iter().flatten().find(|&&w| w >= vocab_size) {
            return Err(Error::LabelOutOfRange {
                label: w,
                k: vocab_size,
            });
        }
        let k = config.n_topics;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut doc_topic = vec![vec![0; k]; docs.len()];
        let mut topic_word = vec![vec![0; vocab_size]; k];
        let mut topic_total = vec![0; k];
        let z = docs
            .iter()
            .enumerate()
            .map(|(d, doc)| {
                doc.iter()
                    .map(|&w| {
                        let t = rng.random_range(0..k);
                        doc_topic[d][t] += 1;
                        topic_word[t][w] += 1;
                        topic_total[t] += 1;
                        t
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            docs,
            vocab_size,
            config,
            z,
            doc_topic,
            topic_word,
            topic_total,
            rng,
            sweeps: 0,
            cumulative: vec![0.0; k],
        })
    }

    /// Resamples every token once, in document order, from
    /// `p(z = k) ∝ (n_dk + α)(n_kw + β) / (n_k + Vβ)` with the token's own
    /// assignment removed from the counts.
    pub fn sweep(&mut self) {
        let k = self.config.n_topics;
        let (alpha, beta) = (self.config.alpha, self.config.beta);
        let v_beta = self.vocab_size as f64 * beta;
        for (d, doc) in self.docs.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let old = self.z[d][i];
                self.doc_topic[d][old] -= 1;
                self.topic_word[old][w] -= 1;
                self.topic_total[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    total += (self.doc_topic[d][t] as f64 + alpha)
                        * (self.topic_word[t][w] as f64 + beta)
                        / (self.topic_total[t] as f64 + v_beta);
                    self.cumulative[t] = total;
                }
                let u = self.rng.random::<f64>() * total;
                let new = self.cumulative.iter().position(|&c| u < c).unwrap_or(k - 1);

                self.z[d][i] = new;
                self.doc_topic[d][new] += 1;
                self.topic_word[new][w] += 1;
                self.topic_total[new] += 1;
            }
        }
        self.sweeps += 1;
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.z
    }

    /// Checks `Σ_k n_dk = |d|`, `Σ_w n_kw = n_k`, and that the count tables
    /// agree with the current assignments.
    pub fn counts_consistent(&self) -> bool {
        let k = self.config.n_topics;
        let docs_ok = self
            .doc_topic
            .iter()
            .zip(self.docs)
            .all(|(counts, doc)| counts.iter().sum::<usize>() == doc.len());
        let topics_ok = self
            .topic_word
            .iter()
            .zip(&self.topic_total)
            .all(|(row, &n)| row.iter().sum::<usize>() == n);
        let mut dt = vec![vec![0usize; k]; self.docs.len()];
        let mut tw = vec![vec![0usize; self.vocab_size]; k];
        for (d, (doc, zs)) in self.docs.iter().zip(&self.z).enumerate() {
            for (&w, &t) in doc.iter().zip(zs) {
                dt[d][t] += 1;
                tw[t][w] += 1;
            }
        }
        docs_ok && topics_ok && dt == self.doc_topic && tw == self.topic_word
    }

    /// Smoothed point estimates of φ and θ from the current counts.
    pub fn into_model(self) -> LdaModel {
        let k = self.config.n_topics;
        let v = self.vocab_size;
        let (alpha, beta) = (self.config.alpha, self.config.beta);
        let mut phi = Matrix::zeros(k, v);
        for t in 0..k {
            let denom = self.topic_total[t] as f64 + v as f64 * beta;
            for w in 0..v {
                phi[(t, w)] = (self.topic_word[t][w] as f64 + beta) / denom;
            }
        }
        let mut theta = Matrix::zeros(self.docs.len(), k);
        for (d, doc) in self.docs.iter().enumerate() {
            let denom = doc.len() as f64 + k as f64 * alpha;
            for t in 0..k {
                theta[(d, t)] = (self.doc_topic[d][t] as f64 + alpha) / denom;
            }
        }
        LdaModel {
            n_topics: k,
            alpha,
            beta,
            phi,
            theta,
            seed: self.config.seed,
            n_iterations: self.sweeps,
            assignments: self.z,
        }
    }
}

/// Runs `config.iterations` Gibbs sweeps and reads off φ and θ.
pub fn lda_fit(docs: &[Doc], vocab: &Vocab, config: &LdaConfig) -> Result<LdaModel> {
    let mut sampler = GibbsSampler::new(docs, vocab.len(), *config)?;
    for _ in 0..config.iterations {
        sampler.sweep();
    }
    Ok(sampler.into_model())
}

/// The `top_k` most probable tokens of each topic with their probabilities.
/// Equal probabilities are ordered lexicographically.
pub fn top_keywords(
    model: &LdaModel,
    vocab: &Vocab,
    top_k: usize,
) -> Result<Vec<Vec<(String, f64)>>> {
    if top_k > vocab.len() {
        return Err(Error::TopKTooLarge {
            top_k,
            vocab_size: vocab.len(),
        });
    }
    Ok((0..model.n_topics)
        .map(|t| {
            let row = model.phi.row(t);
            let mut ids: Vec<usize> = (0..vocab.len()).collect();
            ids.sort_by(|&a, &b| {
                row[b]
                    .total_cmp(&row[a])
                    .then_with(|| vocab.token(a).cmp(vocab.token(b)))
            });
            ids.into_iter()
                .take(top_k)
                .map(|w| (String::from(vocab.token(w)), row[w]))
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn headlines(titles: &[&str]) -> Vec<Headline> {
        let date = NaiveDate::from_ymd_opt(2024, 1, 2).unwrap();
        titles
            .iter()
            .enumerate()
            .map(|(i, t)| Headline {
                id: i as u64,
                date,
                title: (*t).into(),
            })
            .collect()
    }

    fn vocab_of(tokens: &[&str]) -> Vocab {
        let tokens: Vec<String> = tokens.iter().map(|t| String::from(*t)).collect();
        let ids = tokens
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, t)| (t, i))
            .collect();
        Vocab {
            ids,
            doc_freq: vec![1; tokens.len()],
            tokens,
        }
    }

    #[test]
    fn vocab_from_two_titles() {
        let (v, docs) = build_vocab(
            &headlines(&["Apple iPhone", "apple earnings"]),
            1,
            &BTreeSet::new(),
        )
        .unwrap();
        assert_eq!(v.tokens(), ["apple", "earnings", "iphone"]);
        let words: Vec<Vec<&str>> = docs
            .iter()
            .map(|d| d.iter().map(|&w| v.token(w)).collect())
            .collect();
        assert_eq!(words, [vec!["apple", "iphone"], vec!["apple", "earnings"]]);
        assert_eq!(v.doc_freq(v.id("apple").unwrap()), 2);
    }

    #[test]
    fn min_count_filters() {
        let (v, docs) = build_vocab(
            &headlines(&["Apple iPhone", "apple earnings"]),
            2,
            &BTreeSet::new(),
        )
        .unwrap();
        assert_eq!(v.tokens(), ["apple"]);
        assert_eq!(docs, [vec![0], vec![0]]);
    }

    #[test]
    fn all_stopwords_is_empty() {
        let stop: BTreeSet<String> = ["apple", "iphone", "earnings"]
            .iter()
            .map(|s| String::from(*s))
            .collect();
        let err =
            build_vocab(&headlines(&["Apple iPhone", "apple earnings"]), 1, &stop).unwrap_err();
        assert_eq!(err, Error::EmptyVocabulary);
    }

    #[test]
    fn forced_single_topic() {
        let docs = vec![vec![0]];
        let cfg = LdaConfig {
            iterations: 3,
            ..LdaConfig::new(1)
        };
        let m = lda_fit(&docs, &vocab_of(&["apple"]), &cfg).unwrap();
        assert_eq!(m.phi.as_slice(), [1.0]);
        assert_eq!(m.theta.as_slice(), [1.0]);
    }

    #[test]
    fn zero_topics_rejected() {
        let docs = vec![vec![0]];
        assert!(matches!(
            lda_fit(&docs, &vocab_of(&["apple"]), &LdaConfig::new(0)),
            Err(Error::InvalidParameter { name: "topics", .. })
        ));
    }

    #[test]
    fn empty_docs_rejected() {
        let docs: Vec<Doc> = vec![vec![], vec![]];
        assert_eq!(
            lda_fit(&docs, &vocab_of(&["a1"]), &LdaConfig::new(2)),
            Err(Error::EmptyCorpus)
        );
    }

    fn model_with_phi(row: &[f64]) -> LdaModel {
        LdaModel {
            n_topics: 1,
            alpha: 0.1,
            beta: 0.01,
            phi: Matrix::from_vec(1, row.len(), row.to_vec()).unwrap(),
            theta: Matrix::zeros(0, 1),
            seed: 0,
            n_iterations: 0,
            assignments: Vec::new(),
        }
    }

    #[test]
    fn keywords_sorted_by_probability() {
        let kw = top_keywords(
            &model_with_phi(&[0.5, 0.3, 0.2]),
            &vocab_of(&["a", "b", "c"]),
            2,
        )
        .unwrap();
        let tokens: Vec<&str> = kw[0].iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(tokens, ["a", "b"]);
    }

    #[test]
    fn keyword_ties_are_lexicographic() {
        let kw = top_keywords(
            &model_with_phi(&[0.2, 0.4, 0.4]),
            &vocab_of(&["zeta", "mu", "alpha"]),
            3,
        )
        .unwrap();
        let tokens: Vec<&str> = kw[0].iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(tokens, ["alpha", "mu", "zeta"]);
    }

    #[test]
    fn top_k_bounded_by_vocab() {
        let err = top_keywords(&model_with_phi(&[1.0]), &vocab_of(&["a"]), 2).unwrap_err();
        assert_eq!(
            err,
            Error::TopKTooLarge {
                top_k: 2,
                vocab_size: 1
            }
        );
    }

    #[test]
    fn empty_documents_get_uniform_theta() {
        let docs = vec![vec![0, 1], vec![]];
        let cfg = LdaConfig {
            iterations: 5,
            ..LdaConfig::new(4)
        };
        let m = lda_fit(&docs, &vocab_of(&["aa", "bb"]), &cfg).unwrap();
        assert!(m.theta.row(1).iter().all(|&p| (p - 0.25).abs() < 1e-15));
    }
}
