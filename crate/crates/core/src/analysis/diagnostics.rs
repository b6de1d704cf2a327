use crate::statfn::Distribution;
use crate::{Error, Result};

/// `Σ_{t≥2} (e_t − e_{t−1})² / Σ e_t²`.
pub fn durbin_watson(residuals: &[f64]) -> Result<f64> {
    if residuals.len() < 2 {
        return Err(Error::TooFew {
            what: "residuals",
            needed: 2,
            got: residuals.len(),
        });
    }
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    if ssr == 0.0 {
        return Err(Error::ZeroResiduals);
    }
    let diff: f64 = residuals
        .windows(2)
        .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
        .sum();
    Ok(diff / ssr)
}

/// Sample skewness and Pearson (non-excess) kurtosis from central moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub skew: f64,
    /// Pearson kurtosis; 3 for a normal distribution.
    pub kurtosis: f64,
}

pub fn moments(values: &[f64]) -> Result<Moments> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFew {
            what: "values for moments",
            needed: 2,
            got: n,
        });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m2 <= (f64::EPSILON * scale) * (f64::EPSILON * scale) {
        return Err(Error::ZeroVariance);
    }
    Ok(Moments {
        skew: m3 / libm::pow(m2, 1.5),
        kurtosis: m4 / (m2 * m2),
    })
}

/// Jarque–Bera statistic and its chi-square(2) p-value.
pub fn jarque_bera(residuals: &[f64]) -> Result<(f64, f64)> {
    let m = moments(residuals)?;
    let n = residuals.len() as f64;
    let excess = m.kurtosis - 3.0;
    let jb = n / 6.0 * (m.skew * m.skew + excess * excess / 4.0);
    Ok((jb, Distribution::ChiSquare { df: 2.0 }.sf(jb)?))
}

/// D'Agostino's normal approximation for sample skewness.
pub fn skew_test(skew: f64, n: usize) -> Result<f64> {
    if n < 8 {
        return Err(Error::TooFew {
            what: "observations for the skewness test",
            needed: 8,
            got: n,
        });
    }
    let n = n as f64;
    let y = skew * libm::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
    let beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0)
        / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    let w2 = -1.0 + libm::sqrt(2.0 * (beta2 - 1.0));
    let delta = 1.0 / libm::sqrt(0.5 * libm::log(w2));
    let alpha = libm::sqrt(2.0 / (w2 - 1.0));
    Ok(delta * libm::asinh(y / alpha))
}

/// Anscombe–Glynn normal approximation for Pearson kurtosis.
pub fn kurtosis_test(kurtosis: f64, n: usize) -> Result<f64> {
    if n < 5 {
        return Err(Error::TooFew {
            what: "observations for the kurtosis test",
            needed: 5,
            got: n,
        });
    }
    let n = n as f64;
    let expected = 3.0 * (n - 1.0) / (n + 1.0);
    let var = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
    let x = (kurtosis - expected) / libm::sqrt(var);
    let sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0))
        * libm::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
    let a = 6.0
        + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + libm::sqrt(1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
    let term1 = 1.0 - 2.0 / (9.0 * a);
    let denom = 1.0 + x * libm::sqrt(2.0 / (a - 4.0));
    if denom == 0.0 {
        return Err(Error::Domain("kurtosis test"));
    }
    let term2 = denom.signum() * libm::cbrt((1.0 - 2.0 / a) / denom.abs());
    Ok((term1 - term2) / libm::sqrt(2.0 / (9.0 * a)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityTests {
    pub skew: f64,
    /// Pearson convention (normal = 3).
    pub kurtosis: f64,
    pub jarque_bera: f64,
    pub jb_pvalue: f64,
    /// D'Agostino–Pearson K² = Z_skew² + Z_kurt².
    pub omnibus: f64,
    pub omnibus_pvalue: f64,
}

pub fn normality_tests(residuals: &[f64]) -> Result<NormalityTests> {
    let n = residuals.len();
    if n < 8 {
        return Err(Error::TooFew {
            what: "residuals for the omnibus test",
            needed: 8,
            got: n,
        });
    }
    let m = moments(residuals)?;
    let (jb, jb_p) = jarque_bera(residuals)?;
    let zs = skew_test(m.skew, n)?;
    let zk = kurtosis_test(m.kurtosis, n)?;
    let k2 = zs * zs + zk * zk;
    Ok(NormalityTests {
        skew: m.skew,
        kurtosis: m.kurtosis,
        jarque_bera: jb,
        jb_pvalue: jb_p,
        omnibus: k2,
        omnibus_pvalue: Distribution::ChiSquare { df: 2.0 }.sf(k2)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn dw_alternating() {
        assert_eq!(durbin_watson(&[1.0, -1.0, 1.0, -1.0]).unwrap(), 3.0);
    }

    #[test]
    fn dw_constant() {
        assert_eq!(durbin_watson(&[0.7; 5]).unwrap(), 0.0);
    }

    #[test]
    fn dw_errors() {
        assert_eq!(durbin_watson(&[0.0, 0.0, 0.0]), Err(Error::ZeroResiduals));
        assert!(durbin_watson(&[1.0]).is_err());
    }

    #[test]
    fn jb_alternating_six() {
        let e = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let m = moments(&e).unwrap();
        assert_eq!(m.skew, 0.0);
        assert_eq!(m.kurtosis, 1.0);
        assert_eq!(jarque_bera(&e).unwrap().0, 1.0);
    }

    #[test]
    fn jb_zero_at_normal_moments() {
        // m2 = m4 = 1/3, so kurtosis is 3 and skew 0
        let e = [-1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        let (jb, p) = jarque_bera(&e).unwrap();
        assert!(jb < 1e-24);
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_variance() {
        assert_eq!(moments(&[2.5; 10]), Err(Error::ZeroVariance));
    }

    #[test]
    fn omnibus_needs_eight() {
        assert!(matches!(
            normality_tests(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]),
            Err(Error::TooFew { .. })
        ));
    }

    #[test]
    fn symmetric_sample_has_zero_skew_z() {
        let e: Vec<f64> = (-5..=5).map(|i| i as f64).collect();
        let m = moments(&e).unwrap();
        assert_eq!(skew_test(m.skew, e.len()).unwrap(), 0.0);
    }
}
