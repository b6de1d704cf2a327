//! Headline embeddings and the deterministic feature-hashing embedder.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::Headline;
use crate::linalg::Matrix;
use crate::text::tokenize;
use crate::{Error, Result};

pub const DEFAULT_HASHING_DIM: usize = 256;

/// Tolerance on row norms for matrices flagged as normalized.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// `n × dim` single-precision embeddings, one row per headline id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    ids: Vec<String>,
    dim: usize,
    data: Vec<f32>,
    normalized: bool,
}

impl EmbeddingMatrix {
    /// Checks shape only. Use [`EmbeddingMatrix::validate`] for the id and
    /// norm invariants.
    pub fn new(ids: Vec<String>, dim: usize, data: Vec<f32>, normalized: bool) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension { dim, min: 1 });
        }
        if data.len() != ids.len() * dim {
            return Err(Error::LengthMismatch {
                what: "embedding data",
                expected: ids.len() * dim,
                got: data.len(),
            });
        }
        Ok(Self {
            ids,
            dim,
            data,
            normalized,
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Rejects duplicate ids, and rows off the unit sphere when the matrix
    /// claims to be normalized.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for id in &self.ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        if self.normalized && self.max_norm_deviation() > NORM_TOLERANCE {
            return Err(Error::InvalidParameter {
                name: "normalized",
                reason: "flag set but a nonzero row is not unit length",
            });
        }
        Ok(())
    }

    /// Largest `| ‖row‖ − 1 |` over nonzero rows.
    pub fn max_norm_deviation(&self) -> f64 {
        (0..self.len())
            .map(|i| row_norm(self.row(i)))
            .filter(|n| *n > 0.0)
            .map(|n| (n - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Scales every nonzero row to unit L2 norm and sets the flag.
    pub fn normalize(&mut self) {
        for row in self.data.chunks_exact_mut(self.dim) {
            let n = row_norm(row);
            if n > 0.0 {
                row.iter_mut().for_each(|v| *v = (*v as f64 / n) as f32);
            }
        }
        self.normalized = true;
    }

    /// Promotes to a double-precision matrix for downstream math.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_vec(
            self.len(),
            self.dim,
            self.data.iter().map(|&v| v as f64).collect(),
        )
        .expect("shape checked at construction")
    }
}

fn row_norm(row: &[f32]) -> f64 {
    libm::sqrt(row.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>())
}

/// Seeded 64-bit hash: FNV-1a over the bytes, then a splitmix64 finalizer
/// keyed by the seed.
pub fn seeded_hash(bytes: &[u8], seed: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = h ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Signed bag-of-words feature hashing without normalization.
pub fn hash_features(headlines: &[Headline], dim: usize, seed: u64) -> Result<EmbeddingMatrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, min: 2 });
    }
    let mut data = vec![0.0f32; headlines.len() * dim];
    for (row, h) in data.chunks_exact_mut(dim).zip(headlines) {
        let mut acc = vec![0.0f64; dim];
        for token in tokenize(&h.title) {
            let hash = seeded_hash(token.as_bytes(), seed);
            let bucket = (hash % dim as u64) as usize;
            acc[bucket] += if hash >> 63 == 0 { 1.0 } else { -1.0 };
        }
        row.iter_mut().zip(&acc).for_each(|(r, a)| *r = *a as f32);
    }
    let ids = headlines.iter().map(|h| h.id.to_string()).collect();
    EmbeddingMatrix::new(ids, dim, data, false)
}

/// Feature-hashing embedder with L2-normalized rows.
pub fn embed_hashing(headlines: &[Headline], dim: usize, seed: u64) -> Result<EmbeddingMatrix> {
    let mut m = hash_features(headlines, dim, seed)?;
    m.normalize();
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn headlines(titles: &[&str]) -> Vec<Headline> {
        let date = NaiveDate::from_ymd_opt(2024, 5, 8).unwrap();
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

    fn cosine(a: &[f32], b: &[f32]) -> f64 {
        let d: f64 = a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum();
        d / (row_norm(a) * row_norm(b))
    }

    #[test]
    fn identical_titles_identical_rows() {
        let m = embed_hashing(
            &headlines(&["Apple beats earnings", "Apple beats earnings"]),
            64,
            7,
        )
        .unwrap();
        assert_eq!(m.row(0), m.row(1));
        assert!((cosine(m.row(0), m.row(1)) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn word_order_does_not_matter() {
        let m = embed_hashing(&headlines(&["apple iphone", "iphone apple"]), 32, 1).unwrap();
        assert_eq!(m.row(0), m.row(1));
    }

    #[test]
    fn degenerate_title_gives_zero_row() {
        let m = embed_hashing(&headlines(&["a b c"]), 16, 0).unwrap();
        assert!(m.is_normalized());
        assert!(m.row(0).iter().all(|v| *v == 0.0));
        assert_eq!(row_norm(m.row(0)), 0.0);
    }

    #[test]
    fn dim_below_two_rejected() {
        assert!(matches!(
            embed_hashing(&headlines(&["x y"]), 1, 0),
            Err(Error::InvalidDimension { .. })
        ));
    }

    #[test]
    fn rows_are_unit_length() {
        let m = embed_hashing(
            &headlines(&["apple apple apple stock", "fed hikes rates again"]),
            256,
            42,
        )
        .unwrap();
        assert!(m.max_norm_deviation() <= NORM_TOLERANCE);
        assert_eq!(m.ids(), ["0", "1"]);
    }

    #[test]
    fn seed_changes_buckets() {
        let h = headlines(&["apple iphone sales china"]);
        assert_ne!(
            hash_features(&h, 256, 1).unwrap(),
            hash_features(&h, 256, 2).unwrap()
        );
    }

    #[test]
    fn duplicate_ids_fail_validation() {
        let m = EmbeddingMatrix::new(vec!["a".into(), "a".into()], 2, vec![0.0; 4], false).unwrap();
        assert_eq!(m.validate(), Err(Error::DuplicateId("a".into())));
    }
}
