use nalgebra::{DMatrix, SymmetricEigen};
use newsimpact_core::cluster::{
    kmeans_fit, kmeans_plus_plus, lloyd, pca_project, select_k, silhouette_score, KMeansConfig,
    SelectKConfig,
};
use newsimpact_core::linalg::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn partition_inertia(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let d = points[0].len();
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<&Vec<f64>> =
            points.iter().zip(labels).filter(|(_, &l)| l == c).map(|(p, _)| p).collect();
        let mut mean = vec![0.0; d];
        for p in &members {
            for j in 0..d {
                mean[j] += p[j] / members.len() as f64;
            }
        }
        for p in &members {
            total += p.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
    }
    total
}

/// Minimum within-cluster sum of squares over every assignment that uses
/// all `k` labels.
fn exhaustive_optimum(points: &[Vec<f64>], k: usize) -> f64 {
    let n = points.len();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut used = vec![false; k];
        labels.iter().for_each(|&l| used[l] = true);
        if used.iter().all(|&u| u) {
            best = best.min(partition_inertia(points, &labels, k));
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn kmeans_reaches_exhaustive_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let k = rng.random_range(1..=3);
        let n = rng.random_range(k.max(2)..=8);
        let d = rng.random_range(1..=2);
        let pts: Vec<Vec<f64>> =
            (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let model =
            kmeans_fit(&Matrix::from_rows(&pts).unwrap(), &KMeansConfig::new(k).seed(case)).unwrap();
        let optimum = exhaustive_optimum(&pts, k);
        assert!(
            (model.inertia - optimum).abs() <= 1e-9,
            "case {case}: n={n} k={k} d={d} got {} want {optimum}",
            model.inertia
        );
    }
}

#[test]
fn lloyd_inertia_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let n = rng.random_range(10..80);
        let pts: Vec<Vec<f64>> =
            (0..n).map(|_| (0..3).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
        let m = Matrix::from_rows(&pts).unwrap();
        let k = rng.random_range(2..6);
        let init = kmeans_plus_plus(&m, k, &mut rng);
        let run = lloyd(&m, init, 300);
        for w in run.inertia_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{:?}", run.inertia_trace);
        }
        assert!(run.converged);
    }
}

#[test]
fn kmeans_is_deterministic_per_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pts: Vec<Vec<f64>> =
        (0..100).map(|_| (0..4).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
    let m = Matrix::from_rows(&pts).unwrap();
    let a = kmeans_fit(&m, &KMeansConfig::new(4).seed(9)).unwrap();
    let b = kmeans_fit(&m, &KMeansConfig::new(4).seed(9)).unwrap();
    assert_eq!(a, b);
}

/// Textbook silhouette: every quantity recomputed from scratch per point.
fn definitional_silhouette(points: &[Vec<f64>], labels: &[usize]) -> f64 {
    let dist = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    };
    let mut clusters: Vec<usize> = labels.to_vec();
    clusters.sort_unstable();
    clusters.dedup();
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let own: Vec<usize> = (0..n).filter(|&j| j != i && labels[j] == labels[i]).collect();
        if own.is_empty() {
            continue;
        }
        let a = own.iter().map(|&j| dist(&points[i], &points[j])).sum::<f64>() / own.len() as f64;
        let b = clusters
            .iter()
            .filter(|&&c| c != labels[i])
            .map(|&c| {
                let other: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
                other.iter().map(|&j| dist(&points[i], &points[j])).sum::<f64>()
                    / other.len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    total / n as f64
}

#[test]
fn silhouette_matches_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..100 {
        let n = rng.random_range(3..=200);
        let d = rng.random_range(1..=5);
        let c = rng.random_range(2..=6.min(n));
        let pts: Vec<Vec<f64>> =
            (0..n).map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..c) * 3).collect();
        labels[0] = 0;
        labels[1] = 3;
        let ours = silhouette_score(&Matrix::from_rows(&pts).unwrap(), &labels, 5000, 0).unwrap();
        let theirs = definitional_silhouette(&pts, &labels);
        assert!((ours - theirs).abs() <= 1e-12, "case {case}: {ours} vs {theirs}");
    }
}

fn three_blobs(seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let centers = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.9]];
    let rows: Vec<[f64; 2]> = (0..60)
        .map(|i| {
            let c = centers[i % 3];
            [c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]
        })
        .collect();
    Matrix::from_rows(&rows).unwrap()
}

#[test]
fn select_k_finds_three_blobs() {
    let start = std::time::Instant::now();
    let hits = (0..20)
        .filter(|&seed| {
            let cfg = SelectKConfig { k_min: 2, k_max: 8, seed, ..SelectKConfig::default() };
            select_k(&three_blobs(seed), &cfg).unwrap().report.chosen_k == 3
        })
        .count();
    assert!(hits >= 19, "{hits}/20");
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn pca_matches_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..30 {
        let n = rng.random_range(5..60);
        let d = rng.random_range(2..8);
        let scales: Vec<f64> = (0..d).map(|j| 1.0 + 2.0 * j as f64).collect();
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| scales.iter().map(|s| s * rng.random_range(-1.0..1.0)).collect())
            .collect();
        let proj = pca_project(&Matrix::from_rows(&pts).unwrap()).unwrap();

        let x = DMatrix::from_fn(n, d, |i, j| pts[i][j]);
        let mean = x.row_mean();
        let centered = DMatrix::from_fn(n, d, |i, j| x[(i, j)] - mean[j]);
        let cov = centered.transpose() * &centered / (n as f64 - 1.0);
        let eig = SymmetricEigen::new(cov.clone());
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let trace = cov.trace();
        for c in 0..2 {
            let v = eig.eigenvectors.column(order[c]);
            let dot: f64 = (0..d).map(|j| v[j] * proj.components[(c, j)]).sum();
            assert!((dot.abs() - 1.0).abs() < 1e-6, "component {c}");
            let ratio = eig.eigenvalues[order[c]] / trace;
            assert!((proj.explained_variance_ratio[c] - ratio).abs() < 1e-6);
        }
        let orth: f64 = (0..d).map(|j| proj.components[(0, j)] * proj.components[(1, j)]).sum();
        assert!(orth.abs() < 1e-10);
        for i in 0..n {
            for c in 0..2 {
                let expect: f64 = (0..d).map(|j| centered[(i, j)] * proj.components[(c, j)]).sum();
                assert!((proj.points[(i, c)] - expect).abs() < 1e-9);
            }
        }
    }
}
