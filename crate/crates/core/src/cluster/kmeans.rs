use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DEFAULT_MAX_ITER, DEFAULT_N_INIT, DEFAULT_SEED};
use crate::linalg::{squared_distance, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub n_init: usize,
    pub max_iter: usize,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            seed: DEFAULT_SEED,
            n_init: DEFAULT_N_INIT,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn n_init(mut self, n_init: usize) -> Self {
        self.n_init = n_init;
        self
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub k: usize,
    /// `k × d`; row `j` is the mean of the points labelled `j`.
    pub centroids: Matrix,
    pub labels: Vec<usize>,
    /// Total within-cluster sum of squared Euclidean distances.
    pub inertia: f64,
    pub seed: u64,
    pub n_iter: usize,
}

impl ClusterModel {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Outcome of one Lloyd run from fixed initial centroids.
#[derive(Debug, Clone)]
pub struct LloydRun {
    pub centroids: Matrix,
    pub labels: Vec<usize>,
    pub inertia: f64,
    pub n_iter: usize,
    pub converged: bool,
    /// Objective after every centroid update.
    pub inertia_trace: Vec<f64>,
}

/// k-means++ seeding: each new center is drawn with probability proportional
/// to its squared distance from the nearest center chosen so far.
pub fn kmeans_plus_plus<R: Rng + ?Sized>(points: &Matrix, k: usize, rng: &mut R) -> Matrix {
    let n = points.rows();
    let mut centers = Matrix::zeros(k, points.cols());
    let first = rng.random_range(0..n);
    centers.row_mut(0).copy_from_slice(points.row(first));
    let mut d2: Vec<f64> = points
        .iter_rows()
        .map(|p| squared_distance(p, points.row(first)))
        .collect();

    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in d2.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                acc += w;
                chosen = Some(i);
                if acc > target {
                    break;
                }
            }
            chosen.expect("positive total implies a positive weight")
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(c).copy_from_slice(points.row(pick));
        for (w, p) in d2.iter_mut().zip(points.iter_rows()) {
            *w = w.min(squared_distance(p, points.row(pick)));
        }
    }
    centers
}

/// Nearest centroid per point; ties go to the lowest centroid index.
fn assign(points: &Matrix, centroids: &Matrix) -> Vec<usize> {
    points
        .iter_rows()
        .map(|p| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, c) in centroids.iter_rows().enumerate() {
                let d = squared_distance(p, c);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Moves the point farthest from its centroid into each empty cluster. Donors
/// must keep at least one member.
fn repair_empty(points: &Matrix, centroids: &Matrix, labels: &mut [usize]) {
    let k = centroids.rows();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for empty in 0..k {
        if sizes[empty] != 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = f64::NEG_INFINITY;
        for (i, p) in points.iter_rows().enumerate() {
            let l = labels[i];
            if sizes[l] < 2 {
                continue;
            }
            let d = squared_distance(p, centroids.row(l));
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        let i = far.expect("k <= n leaves a cluster with two or more members");
        sizes[labels[i]] -= 1;
        labels[i] = empty;
        sizes[empty] = 1;
    }
}

fn centroid_means(points: &Matrix, labels: &[usize], k: usize) -> Matrix {
    let d = points.cols();
    let mut sums = Matrix::zeros(k, d);
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter_rows().zip(labels) {
        counts[l] += 1;
        sums.row_mut(l).iter_mut().zip(p).for_each(|(s, x)| *s += x);
    }
    for (j, &c) in counts.iter().enumerate() {
        if c > 0 {
            sums.row_mut(j).iter_mut().for_each(|s| *s /= c as f64);
        }
    }
    sums
}

fn objective(points: &Matrix, centroids: &Matrix, labels: &[usize]) -> f64 {
    points
        .iter_rows()
        .zip(labels)
        .map(|(p, &l)| squared_distance(p, centroids.row(l)))
        .sum()
}

/// Lloyd iterations until the labels stop changing or `max_iter` updates have
/// been made. The returned centroids are always the means of the returned
/// labels.
pub fn lloyd(points: &Matrix, initial: Matrix, max_iter: usize) -> LloydRun {
    let k = initial.rows();
    let mut centroids = initial;
    let mut labels = assign(points, &centroids);
    let mut trace = Vec::new();
    let mut n_iter = 0;
    let mut converged = false;

    for it in 1..=max_iter {
        repair_empty(points, &centroids, &mut labels);
        centroids = centroid_means(points, &labels, k);
        trace.push(objective(points, &centroids, &labels));
        n_iter = it;
        let next = assign(points, &centroids);
        if next == labels {
            converged = true;
            break;
        }
        labels = next;
    }
    if !converged {
        repair_empty(points, &centroids, &mut labels);
        centroids = centroid_means(points, &labels, k);
        trace.push(objective(points, &centroids, &labels));
    }
    let inertia = objective(points, &centroids, &labels);
    LloydRun {
        centroids,
        labels,
        inertia,
        n_iter,
        converged,
        inertia_trace: trace,
    }
}

/// Best-of-`n_init` k-means with k-means++ seeding.
pub fn kmeans_fit(points: &Matrix, config: &KMeansConfig) -> Result<ClusterModel> {
    let n = points.rows();
    let k = config.k;
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    if config.n_init == 0 {
        return Err(Error::InvalidParameter {
            name: "n_init",
            reason: "must be positive",
        });
    }
    if config.max_iter == 0 {
        return Err(Error::InvalidParameter {
            name: "max_iter",
            reason: "must be positive",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best: Option<LloydRun> = None;
    for _ in 0..config.n_init {
        let init = kmeans_plus_plus(points, k, &mut rng);
        let run = lloyd(points, init, config.max_iter);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let best = best.expect("n_init >= 1");
    Ok(ClusterModel {
        k,
        centroids: best.centroids,
        labels: best.labels,
        inertia: best.inertia,
        seed: config.seed,
        n_iter: best.n_iter,
    })
}
