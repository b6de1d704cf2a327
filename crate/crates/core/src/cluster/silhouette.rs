use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::kmeans::{kmeans_fit, ClusterModel, KMeansConfig};
use super::{
    DEFAULT_K_MAX, DEFAULT_K_MIN, DEFAULT_MAX_ITER, DEFAULT_N_INIT, DEFAULT_SAMPLE_CAP,
    DEFAULT_SEED,
};
use crate::linalg::{squared_distance, Matrix};
use crate::{Error, Result};

/// Silhouette of point `i` given dense cluster indices `cluster` in `0..c`.
fn point_silhouette(points: &Matrix, cluster: &[usize], sizes: &[usize], i: usize) -> f64 {
    let own = cluster[i];
    if sizes[own] == 1 {
        return 0.0;
    }
    let mut sums = vec![0.0; sizes.len()];
    let p = points.row(i);
    for (j, q) in points.iter_rows().enumerate() {
        if j != i {
            sums[cluster[j]] += libm::sqrt(squared_distance(p, q));
        }
    }
    let a = sums[own] / (sizes[own] - 1) as f64;
    let b = sums
        .iter()
        .zip(sizes)
        .enumerate()
        .filter(|(c, _)| *c != own)
        .map(|(_, (s, &n))| s / n as f64)
        .fold(f64::INFINITY, f64::min);
    let denom = a.max(b);
    if denom == 0.0 {
        0.0
    } else {
        (b - a) / denom
    }
}

/// Mean silhouette coefficient. Exact when `n <= sample_cap`; otherwise the
/// mean over a seeded uniform sample of `sample_cap` points, each still
/// measured against every point.
pub fn silhouette_score(
    points: &Matrix,
    labels: &[usize],
    sample_cap: usize,
    seed: u64,
) -> Result<f64> {
    let n = points.rows();
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            what: "labels",
            expected: n,
            got: labels.len(),
        });
    }
    if n < 3 {
        return Err(Error::TooFew {
            what: "points for silhouette",
            needed: 3,
            got: n,
        });
    }
    if sample_cap == 0 {
        return Err(Error::InvalidParameter {
            name: "sample_cap",
            reason: "must be positive",
        });
    }
    let dense: BTreeMap<usize, usize> = labels.iter().map(|&l| (l, 0)).collect();
    if dense.len() < 2 {
        return Err(Error::SingleCluster);
    }
    let dense: BTreeMap<usize, usize> = dense.keys().enumerate().map(|(i, &l)| (l, i)).collect();
    let cluster: Vec<usize> = labels.iter().map(|l| dense[l]).collect();
    let mut sizes = vec![0usize; dense.len()];
    for &c in &cluster {
        sizes[c] += 1;
    }

    let evaluated: Vec<usize> = if n <= sample_cap {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = rand::seq::index::sample(&mut rng, n, sample_cap).into_vec();
        idx.sort_unstable();
        idx
    };
    let total: f64 = evaluated
        .iter()
        .map(|&i| point_silhouette(points, &cluster, &sizes, i))
        .sum();
    Ok(total / evaluated.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectKConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub seed: u64,
    pub n_init: usize,
    pub max_iter: usize,
    pub sample_cap: usize,
}

impl Default for SelectKConfig {
    fn default() -> Self {
        Self {
            k_min: DEFAULT_K_MIN,
            k_max: DEFAULT_K_MAX,
            seed: DEFAULT_SEED,
            n_init: DEFAULT_N_INIT,
            max_iter: DEFAULT_MAX_ITER,
            sample_cap: DEFAULT_SAMPLE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SilhouetteReport {
    /// `(k, mean silhouette)` for each candidate, ascending in `k`.
    pub scores: Vec<(usize, f64)>,
    pub chosen_k: usize,
    /// False when scores were computed on a sample.
    pub exact: bool,
    pub n_evaluated: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSelection {
    pub report: SilhouetteReport,
    /// The fitted model for `report.chosen_k`.
    pub model: ClusterModel,
}

/// Fits k-means for every `k` in `[k_min, k_max]` and keeps the one with the
/// highest silhouette (ties go to the smaller `k`).
pub fn select_k(points: &Matrix, config: &SelectKConfig) -> Result<KSelection> {
    let n = points.rows();
    let (k_min, k_max) = (config.k_min, config.k_max);
    if k_min < 2 || k_min > k_max || k_max + 1 > n {
        return Err(Error::InvalidKRange { k_min, k_max, n });
    }
    let mut scores = Vec::with_capacity(k_max - k_min + 1);
    let mut best: Option<(f64, ClusterModel)> = None;
    for k in k_min..=k_max {
        let km = KMeansConfig {
            k,
            seed: config.seed,
            n_init: config.n_init,
            max_iter: config.max_iter,
        };
        let model = kmeans_fit(points, &km)?;
        let score = silhouette_score(points, &model.labels, config.sample_cap, config.seed)?;
        scores.push((k, score));
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, model));
        }
    }
    let (_, model) = best.expect("range is nonempty");
    let exact = n <= config.sample_cap;
    Ok(KSelection {
        report: SilhouetteReport {
            scores,
            chosen_k: model.k,
            exact,
            n_evaluated: if exact { n } else { config.sample_cap },
        },
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Matrix {
        Matrix::from_vec(xs.len(), 1, xs.to_vec()).unwrap()
    }

    #[test]
    fn two_tight_pairs() {
        // a = 0.1 everywhere; b = 10.05 for the outer points, 9.95 for the inner ones
        let s = silhouette_score(&line(&[0.0, 0.1, 10.0, 10.1]), &[0, 0, 1, 1], 5000, 0).unwrap();
        let expected = (2.0 * (1.0 - 0.1 / 10.05) + 2.0 * (1.0 - 0.1 / 9.95)) / 4.0;
        assert!((s - expected).abs() < 1e-12);
        assert!((s - 0.99).abs() < 1e-4);
    }

    #[test]
    fn identical_points_score_zero() {
        let s = silhouette_score(&line(&[2.0; 4]), &[0, 1, 0, 1], 5000, 0).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn single_label_rejected() {
        assert_eq!(
            silhouette_score(&line(&[1.0, 2.0, 3.0]), &[4, 4, 4], 10, 0),
            Err(Error::SingleCluster)
        );
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            silhouette_score(&line(&[1.0, 2.0]), &[0, 1], 10, 0),
            Err(Error::TooFew { .. })
        ));
    }

    #[test]
    fn singleton_contributes_zero() {
        let s = silhouette_score(&line(&[0.0, 1.0, 5.0]), &[0, 0, 1], 10, 0).unwrap();
        // point 0: a=1, b=5; point 1: a=1, b=4; point 2 singleton
        let expected = ((5.0 - 1.0) / 5.0 + (4.0 - 1.0) / 4.0 + 0.0) / 3.0;
        assert!((s - expected).abs() < 1e-15);
    }

    #[test]
    fn sampled_path_is_seeded() {
        let xs: Vec<f64> = (0..40)
            .map(|i| (i % 4) as f64 * 10.0 + i as f64 * 0.01)
            .collect();
        let labels: Vec<usize> = (0..40).map(|i| i % 4).collect();
        let a = silhouette_score(&line(&xs), &labels, 10, 3).unwrap();
        assert_eq!(a, silhouette_score(&line(&xs), &labels, 10, 3).unwrap());
        let exact = silhouette_score(&line(&xs), &labels, 40, 3).unwrap();
        assert!((a - exact).abs() < 0.05);
    }

    #[test]
    fn single_candidate_range() {
        let p = line(&[0.0, 0.1, 5.0, 5.1, 9.0]);
        let sel = select_k(
            &p,
            &SelectKConfig {
                k_min: 2,
                k_max: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(sel.report.scores.len(), 1);
        assert_eq!(sel.report.chosen_k, 2);
    }

    #[test]
    fn k_max_must_leave_room() {
        let p = line(&[0.0, 1.0, 2.0]);
        let cfg = SelectKConfig {
            k_min: 2,
            k_max: 3,
            ..Default::default()
        };
        assert_eq!(
            select_k(&p, &cfg),
            Err(Error::InvalidKRange {
                k_min: 2,
                k_max: 3,
                n: 3
            })
        );
    }
}
