use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::diagnostics::{durbin_watson, normality_tests, NormalityTests};
use super::exposures::{ExposureMode, ExposurePanel};
use super::topic_name;
use crate::linalg::{norm, symmetric_eigen, Matrix, Qr};
use crate::statfn::Distribution;
use crate::{Error, Result};

/// A design column is treated as dependent when its QR diagonal falls below
/// this fraction of its own norm.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Condition numbers above this are flagged as ill-conditioned.
pub const CONDITION_WARNING: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    /// `const` followed by one name per regressor.
    pub names: Vec<String>,
    pub coef: Vec<f64>,
    pub std_err: Vec<f64>,
    pub t_value: Vec<f64>,
    pub p_value: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub r2: f64,
    pub adj_r2: f64,
    /// NaN when the model has no regressors besides the constant.
    pub f_stat: f64,
    pub f_pvalue: f64,
    /// `None` when every residual is zero.
    pub durbin_watson: Option<f64>,
    /// `None` with fewer than eight observations or zero residual variance.
    pub normality: Option<NormalityTests>,
    pub n_obs: usize,
    /// Estimated regressors besides the constant.
    pub n_regressors: usize,
    pub df_resid: usize,
    /// `sqrt(λ_max / λ_min)` of `XᵀX` for the design including the constant.
    pub condition_number: f64,
    pub residuals: Vec<f64>,
}

impl RegressionResult {
    pub fn is_ill_conditioned(&self) -> bool {
        !(self.condition_number <= CONDITION_WARNING)
    }
}

/// Regresses the panel target on its topic dummies plus a constant.
///
/// Per-headline panels are one-hot, so their dummies always sum to the
/// constant column. They are fitted with sum-to-zero coding instead: the
/// constant is the unweighted mean of the topic means and each `Topic_k`
/// coefficient is topic `k`'s deviation from it.
pub fn ols_fit(panel: &ExposurePanel) -> Result<RegressionResult> {
    match panel.mode {
        ExposureMode::PerDay => fit_ols(&panel.dummies, &panel.target),
        ExposureMode::PerHeadline => fit_ols_sum_to_zero(&panel.dummies, &panel.target),
    }
}

fn check_response(n: usize, p: usize, y: &[f64]) -> Result<()> {
    if y.len() != n {
        return Err(Error::LengthMismatch {
            what: "response",
            expected: n,
            got: y.len(),
        });
    }
    if n <= p {
        return Err(Error::TooFew {
            what: "observations",
            needed: p + 1,
            got: n,
        });
    }
    Ok(())
}

fn with_constant(x: &Matrix) -> Matrix {
    let mut design = Matrix::zeros(x.rows(), x.cols() + 1);
    for i in 0..x.rows() {
        let row = design.row_mut(i);
        row[0] = 1.0;
        row[1..].copy_from_slice(x.row(i));
    }
    design
}

fn topic_names(k: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(k + 1);
    names.push("const".to_string());
    names.extend((0..k).map(topic_name));
    names
}

/// Least-squares solution of a full-rank design.
struct LeastSquares {
    coef: Vec<f64>,
    /// `(XᵀX)⁻¹`.
    xtx_inv: Matrix,
    residuals: Vec<f64>,
    condition_number: f64,
}

fn least_squares(design: &Matrix, names: &[String], y: &[f64]) -> Result<LeastSquares> {
    let p = design.cols();
    let qr = Qr::new(design)?;
    for j in 0..p {
        let col_norm = norm(&design.column(j));
        if qr.r_diag()[j].abs() <= RANK_TOLERANCE * col_norm {
            return Err(Error::RankDeficient {
                columns: dependent_columns(&qr, j, names),
            });
        }
    }
    let coef = qr.solve_least_squares(y);
    let fitted = design.mul_vec(&coef);
    let residuals = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let r_inv = qr.r_inverse();
    let mut xtx_inv = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let start = i.max(j);
            xtx_inv.row_mut(i)[j] = (start..p).map(|m| r_inv[(i, m)] * r_inv[(j, m)]).sum();
        }
    }
    let eig = symmetric_eigen(&design.gram())?;
    let smallest = eig.values[p - 1];
    let condition_number = if smallest > 0.0 {
        libm::sqrt(eig.values[0] / smallest)
    } else {
        f64::INFINITY
    };
    Ok(LeastSquares {
        coef,
        xtx_inv,
        residuals,
        condition_number,
    })
}

/// OLS of `y` on `[1 | x]` through a Householder QR of the design. Regressor
/// `j` is reported as `Topic_j`.
pub fn fit_ols(x: &Matrix, y: &[f64]) -> Result<RegressionResult> {
    let (n, k) = (x.rows(), x.cols());
    check_response(n, k + 1, y)?;
    let names = topic_names(k);
    let ls = least_squares(&with_constant(x), &names, y)?;
    let var_unscaled = (0..=k).map(|i| ls.xtx_inv[(i, i)]).collect();
    summarize(names, ls.coef, var_unscaled, ls.residuals, y, k, ls.condition_number)
}

/// OLS on one-hot topic columns under the constraint `Σ β_k = 0`.
///
/// The last topic is eliminated (`β_{K-1} = -Σ_{k<K-1} β_k`), the reduced
/// design `[1 | x_k - x_{K-1}]` is solved, and the eliminated coefficient and
/// its variance are recovered from the reduced covariance. The model has
/// `K - 1` free regressors.
pub fn fit_ols_sum_to_zero(x: &Matrix, y: &[f64]) -> Result<RegressionResult> {
    let (n, k) = (x.rows(), x.cols());
    if k == 0 {
        return fit_ols(x, y);
    }
    check_response(n, k, y)?;
    let names = topic_names(k);
    if let Some(j) = (0..k).find(|&j| x.iter_rows().all(|r| r[j] == 0.0)) {
        return Err(Error::RankDeficient {
            columns: alloc::vec![names[j + 1].clone()],
        });
    }
    let mut reduced = Matrix::zeros(n, k - 1);
    for i in 0..n {
        let last = x[(i, k - 1)];
        for j in 0..k - 1 {
            reduced.row_mut(i)[j] = x[(i, j)] - last;
        }
    }
    let ls = least_squares(&with_constant(&reduced), &names[..k], y)?;
    let mut coef = ls.coef.clone();
    coef.push(-ls.coef[1..].iter().sum::<f64>());
    let mut var_unscaled: Vec<f64> = (0..k).map(|i| ls.xtx_inv[(i, i)]).collect();
    // Var(-Σ γ_j) = Σ_ij Cov(γ_i, γ_j) over the topic block
    let block: f64 = (1..k)
        .flat_map(|i| (1..k).map(move |j| (i, j)))
        .map(|(i, j)| ls.xtx_inv[(i, j)])
        .sum();
    var_unscaled.push(block.max(0.0));
    summarize(names, coef, var_unscaled, ls.residuals, y, k - 1, ls.condition_number)
}

/// Standard errors, tests, intervals and fit statistics. `free` is the number
/// of estimated regressors besides the constant.
fn summarize(
    names: Vec<String>,
    coef: Vec<f64>,
    var_unscaled: Vec<f64>,
    residuals: Vec<f64>,
    y: &[f64],
    free: usize,
    condition_number: f64,
) -> Result<RegressionResult> {
    let n = y.len();
    let df_resid = n - free - 1;
    let sse: f64 = residuals.iter().map(|e| e * e).sum();
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean_y) * (v - mean_y)).sum();
    let sigma2 = sse / df_resid as f64;
    let std_err: Vec<f64> = var_unscaled
        .iter()
        .map(|v| libm::sqrt(sigma2 * v))
        .collect();

    let t_dist = Distribution::student_t(df_resid as f64)?;
    let t_crit = t_dist.inv_cdf(0.975)?;
    let mut t_value = Vec::with_capacity(coef.len());
    let mut p_value = Vec::with_capacity(coef.len());
    for (b, se) in coef.iter().zip(&std_err) {
        let (t, pv) = if *se > 0.0 {
            let t = b / se;
            (t, (2.0 * t_dist.sf(t.abs())?).min(1.0))
        } else if *b == 0.0 {
            (0.0, 1.0)
        } else {
            (b.signum() * f64::INFINITY, 0.0)
        };
        t_value.push(t);
        p_value.push(pv);
    }
    let ci_low = coef
        .iter()
        .zip(&std_err)
        .map(|(b, se)| b - t_crit * se)
        .collect();
    let ci_high = coef
        .iter()
        .zip(&std_err)
        .map(|(b, se)| b + t_crit * se)
        .collect();

    let r2 = if sst > 0.0 {
        (1.0 - sse / sst).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let adj_r2 = 1.0 - (1.0 - r2) * (n - 1) as f64 / df_resid as f64;
    let (f_stat, f_pvalue) = if free == 0 {
        (f64::NAN, f64::NAN)
    } else if r2 >= 1.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = (r2 / free as f64) / ((1.0 - r2) / df_resid as f64);
        (f, Distribution::fisher_f(free as f64, df_resid as f64)?.sf(f)?)
    };

    Ok(RegressionResult {
        names,
        coef,
        std_err,
        t_value,
        p_value,
        ci_low,
        ci_high,
        r2,
        adj_r2,
        f_stat,
        f_pvalue,
        durbin_watson: durbin_watson(&residuals).ok(),
        normality: normality_tests(&residuals).ok(),
        n_obs: n,
        n_regressors: free,
        df_resid,
        condition_number,
        residuals,
    })
}

/// Columns that, together with `j`, span a dependent set: `j`'s coordinates in
/// the basis of the preceding (independent) columns.
fn dependent_columns(qr: &Qr, j: usize, names: &[String]) -> Vec<String> {
    let rhs: Vec<f64> = (0..j).map(|i| qr.r(i, j)).collect();
    let coords = qr.solve_upper(j, &rhs);
    let scale = coords.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut cols: Vec<String> = coords
        .iter()
        .enumerate()
        .filter(|(_, c)| c.abs() > 1e-8 * scale)
        .map(|(i, _)| names[i].clone())
        .collect();
    cols.push(names[j].clone());
    cols
}
