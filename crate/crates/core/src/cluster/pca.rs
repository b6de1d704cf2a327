use alloc::vec::Vec;

use crate::linalg::{symmetric_eigen, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Projection2D {
    /// `n × 2` coordinates of the centered data on the two components.
    pub points: Matrix,
    /// `2 × d` unit principal directions.
    pub components: Matrix,
    /// Share of total variance carried by each component.
    pub explained_variance_ratio: [f64; 2],
}

/// Projects rows onto the top two principal directions of the sample
/// covariance. Each direction's largest-magnitude entry is made positive.
pub fn pca_project(points: &Matrix) -> Result<Projection2D> {
    let (n, d) = (points.rows(), points.cols());
    if n < 3 {
        return Err(Error::TooFew {
            what: "points for PCA",
            needed: 3,
            got: n,
        });
    }
    if d < 2 {
        return Err(Error::InvalidDimension { dim: d, min: 2 });
    }
    let constant = (0..d).all(|j| points.iter_rows().all(|r| r[j] == points[(0, j)]));
    if constant {
        return Err(Error::ZeroVariance);
    }

    let mut mean = alloc::vec![0.0; d];
    for r in points.iter_rows() {
        mean.iter_mut().zip(r).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut centered = points.clone();
    for i in 0..n {
        centered
            .row_mut(i)
            .iter_mut()
            .zip(&mean)
            .for_each(|(x, m)| *x -= m);
    }
    let mut cov = centered.gram();
    for i in 0..d {
        cov.row_mut(i).iter_mut().for_each(|v| *v /= (n - 1) as f64);
    }
    let trace: f64 = (0..d).map(|i| cov[(i, i)]).sum();
    if trace <= 0.0 {
        return Err(Error::ZeroVariance);
    }

    let eig = symmetric_eigen(&cov)?;
    let mut components = Matrix::zeros(2, d);
    for c in 0..2 {
        let mut dir = eig.vectors.column(c);
        let lead = dir
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bv), (i, v)| {
                if v.abs() > bv {
                    (i, v.abs())
                } else {
                    (bi, bv)
                }
            })
            .0;
        if dir[lead] < 0.0 {
            dir.iter_mut().for_each(|v| *v = -*v);
        }
        components.row_mut(c).copy_from_slice(&dir);
    }
    let ratio = |i: usize| (eig.values[i].max(0.0) / trace).clamp(0.0, 1.0);
    let projected: Vec<f64> = centered
        .iter_rows()
        .flat_map(|r| {
            [
                crate::linalg::dot(r, components.row(0)),
                crate::linalg::dot(r, components.row(1)),
            ]
        })
        .collect();
    Ok(Projection2D {
        points: Matrix::from_vec(n, 2, projected)?,
        components,
        explained_variance_ratio: [ratio(0), ratio(1)],
    })
}
