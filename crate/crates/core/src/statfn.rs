//! Special functions and the distribution functions behind regression
//! p-values and confidence intervals.
//!
//! Incomplete gamma uses the power series below `s + 1` and a Lentz continued
//! fraction above it; incomplete beta uses the continued fraction with the
//! usual symmetry switch. `erf` is derived from the incomplete gamma pair
//! (`erf(x) = P(1/2, x²)`), so no polynomial approximations are involved.

use core::f64::consts::PI;

use crate::{Error, Result};

const EPS: f64 = 1e-14;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 300;

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn gamma_series(s: f64, x: f64) -> Result<f64> {
    let mut ap = s;
    let mut del = 1.0 / s;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            return Ok(sum * libm::exp(-x + s * libm::log(x) - ln_gamma(s)));
        }
    }
    Err(Error::NoConvergence("incomplete gamma series"))
}

fn gamma_continued_fraction(s: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(libm::exp(-x + s * libm::log(x) - ln_gamma(s)) * h);
        }
    }
    Err(Error::NoConvergence("incomplete gamma continued fraction"))
}

fn check_gamma_args(s: f64, x: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) || !(x >= 0.0) {
        return Err(Error::Domain("regularized incomplete gamma"));
    }
    Ok(())
}

/// Regularized lower incomplete gamma `P(s, x)`.
pub fn reg_inc_gamma(s: f64, x: f64) -> Result<f64> {
    check_gamma_args(s, x)?;
    if x == 0.0 {
        Ok(0.0)
    } else if x.is_infinite() {
        Ok(1.0)
    } else if x < s + 1.0 {
        gamma_series(s, x)
    } else {
        Ok(1.0 - gamma_continued_fraction(s, x)?)
    }
}

/// Regularized upper incomplete gamma `Q(s, x) = 1 − P(s, x)`, accurate in
/// the upper tail.
pub fn reg_inc_gamma_upper(s: f64, x: f64) -> Result<f64> {
    check_gamma_args(s, x)?;
    if x == 0.0 {
        Ok(1.0)
    } else if x.is_infinite() {
        Ok(0.0)
    } else if x < s + 1.0 {
        Ok(1.0 - gamma_series(s, x)?)
    } else {
        gamma_continued_fraction(s, x)
    }
}

/// Maximum continued-fraction terms for the incomplete beta. The fraction
/// needs on the order of `sqrt(max(a, b))` terms, so very large degrees of
/// freedom get a proportionally larger budget.
fn beta_iteration_cap(a: f64, b: f64) -> usize {
    let scale = libm::sqrt(a.max(b));
    MAX_ITER.max((4.0 * scale) as usize)
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=beta_iteration_cap(a, b) {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence("incomplete beta continued fraction"))
}

/// `I_x(a, b)` where the caller supplies both `x` and `y = 1 − x` so that
/// neither has to be formed by cancellation.
fn inc_beta_xy(a: f64, b: f64, x: f64, y: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if y <= 0.0 {
        return Ok(1.0);
    }
    let ln_front = a * libm::log(x) + b * libm::log(y) - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(libm::exp(ln_front) * beta_continued_fraction(a, b, x)? / a)
    } else {
        Ok(1.0 - libm::exp(ln_front) * beta_continued_fraction(b, a, y)? / b)
    }
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) || !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain("regularized incomplete beta"));
    }
    inc_beta_xy(a, b, x, 1.0 - x)
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.abs() < 1e-8 {
        return 2.0 * x / libm::sqrt(PI);
    }
    let p = reg_inc_gamma(0.5, x * x).expect("x² is a valid argument");
    if x < 0.0 {
        -p
    } else {
        p
    }
}

/// Complementary error function, accurate for large positive `x`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 1.0 + erf(-x);
    }
    reg_inc_gamma_upper(0.5, x * x).expect("x² is a valid argument")
}

/// A continuous distribution used by the regression diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Normal,
    StudentT { df: f64 },
    ChiSquare { df: f64 },
    FisherF { df1: f64, df2: f64 },
}

fn check_df(df: f64) -> Result<f64> {
    if df > 0.0 && !df.is_nan() {
        Ok(df)
    } else {
        Err(Error::Domain("degrees of freedom"))
    }
}

impl Distribution {
    pub fn student_t(df: f64) -> Result<Self> {
        Ok(Distribution::StudentT { df: check_df(df)? })
    }

    pub fn chi_square(df: f64) -> Result<Self> {
        Ok(Distribution::ChiSquare { df: check_df(df)? })
    }

    pub fn fisher_f(df1: f64, df2: f64) -> Result<Self> {
        Ok(Distribution::FisherF {
            df1: check_df(df1)?,
            df2: check_df(df2)?,
        })
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Distribution::Normal => Ok(()),
            Distribution::StudentT { df } | Distribution::ChiSquare { df } => {
                check_df(df).map(|_| ())
            }
            Distribution::FisherF { df1, df2 } => check_df(df1).and(check_df(df2)).map(|_| ()),
        }
    }

    fn is_symmetric(&self) -> bool {
        matches!(self, Distribution::Normal | Distribution::StudentT { .. })
    }

    /// `P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if x.is_nan() {
            return Err(Error::Domain("cdf argument"));
        }
        match *self {
            Distribution::Normal => Ok(0.5 * erfc(-x / core::f64::consts::SQRT_2)),
            Distribution::StudentT { df } => {
                if x.is_infinite() {
                    return Ok(if x > 0.0 { 1.0 } else { 0.0 });
                }
                let t2 = x * x;
                let tail = 0.5 * inc_beta_xy(0.5 * df, 0.5, df / (df + t2), t2 / (df + t2))?;
                Ok(if x > 0.0 { 1.0 - tail } else { tail })
            }
            Distribution::ChiSquare { df } => {
                if x <= 0.0 {
                    Ok(0.0)
                } else {
                    reg_inc_gamma(0.5 * df, 0.5 * x)
                }
            }
            Distribution::FisherF { df1, df2 } => {
                if x <= 0.0 {
                    Ok(0.0)
                } else if x.is_infinite() {
                    Ok(1.0)
                } else {
                    let denom = df1 * x + df2;
                    inc_beta_xy(0.5 * df1, 0.5 * df2, df1 * x / denom, df2 / denom)
                }
            }
        }
    }

    /// `P(X > x)`, computed without subtracting from one where possible.
    pub fn sf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if x.is_nan() {
            return Err(Error::Domain("sf argument"));
        }
        match *self {
            Distribution::Normal | Distribution::StudentT { .. } => self.cdf(-x),
            Distribution::ChiSquare { df } => {
                if x <= 0.0 {
                    Ok(1.0)
                } else {
                    reg_inc_gamma_upper(0.5 * df, 0.5 * x)
                }
            }
            Distribution::FisherF { df1, df2 } => {
                if x <= 0.0 {
                    Ok(1.0)
                } else if x.is_infinite() {
                    Ok(0.0)
                } else {
                    let denom = df1 * x + df2;
                    inc_beta_xy(0.5 * df2, 0.5 * df1, df2 / denom, df1 * x / denom)
                }
            }
        }
    }

    /// Density at `x`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            Distribution::Normal => libm::exp(-0.5 * x * x) / libm::sqrt(2.0 * PI),
            Distribution::StudentT { df } => libm::exp(
                ln_gamma(0.5 * (df + 1.0))
                    - ln_gamma(0.5 * df)
                    - 0.5 * libm::log(df * PI)
                    - 0.5 * (df + 1.0) * libm::log1p(x * x / df),
            ),
            Distribution::ChiSquare { df } => {
                if x < 0.0 {
                    0.0
                } else if x == 0.0 {
                    match df.partial_cmp(&2.0) {
                        Some(core::cmp::Ordering::Less) => f64::INFINITY,
                        Some(core::cmp::Ordering::Equal) => 0.5,
                        _ => 0.0,
                    }
                } else {
                    let k = 0.5 * df;
                    libm::exp(
                        (k - 1.0) * libm::log(x)
                            - 0.5 * x
                            - k * core::f64::consts::LN_2
                            - ln_gamma(k),
                    )
                }
            }
            Distribution::FisherF { df1, df2 } => {
                if x <= 0.0 {
                    0.0
                } else {
                    libm::exp(
                        0.5 * df1 * libm::log(df1)
                            + 0.5 * df2 * libm::log(df2)
                            + (0.5 * df1 - 1.0) * libm::log(x)
                            - 0.5 * (df1 + df2) * libm::log(df2 + df1 * x)
                            - ln_beta(0.5 * df1, 0.5 * df2),
                    )
                }
            }
        })
    }

    /// Quantile function: bracket, bisect, then polish with safeguarded
    /// Newton steps.
    pub fn inv_cdf(&self, p: f64) -> Result<f64> {
        self.validate()?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain("quantile probability"));
        }
        if self.is_symmetric() && p == 0.5 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = if self.is_symmetric() {
            (-1.0, 1.0)
        } else {
            (0.0, 1.0)
        };
        while self.cdf(lo)? >= p {
            lo *= 2.0;
            if !lo.is_finite() {
                return Err(Error::NoConvergence("quantile bracket"));
            }
        }
        while self.cdf(hi)? <= p {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::NoConvergence("quantile bracket"));
            }
        }

        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            if hi - lo <= 1e-8 * x.abs().max(1.0) {
                break;
            }
            x = 0.5 * (lo + hi);
            let c = self.cdf(x)?;
            if c == p {
                return Ok(x);
            }
            if c < p {
                lo = x;
            } else {
                hi = x;
            }
        }
        x = 0.5 * (lo + hi);
        for _ in 0..100 {
            let err = self.cdf(x)? - p;
            if err.abs() <= 1e-15 {
                break;
            }
            if err < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let density = self.pdf(x)?;
            let mut next = x - err / density;
            if !(density > 0.0) || !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                x = next;
                break;
            }
            x = next;
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_boundaries_and_identities() {
        assert_eq!(reg_inc_beta(2.5, 3.0, 0.0).unwrap(), 0.0);
        assert_eq!(reg_inc_beta(2.5, 3.0, 1.0).unwrap(), 1.0);
        assert!((reg_inc_beta(1.0, 1.0, 0.37).unwrap() - 0.37).abs() < 1e-14);
        assert!((reg_inc_beta(2.0, 2.0, 0.5).unwrap() - 0.5).abs() < 1e-14);
        // I_x(a, 1) = x^a
        assert!((reg_inc_beta(3.0, 1.0, 0.6).unwrap() - 0.216).abs() < 1e-14);
    }

    #[test]
    fn beta_domain() {
        assert!(reg_inc_beta(0.0, 1.0, 0.5).is_err());
        assert!(reg_inc_beta(1.0, 1.0, 1.5).is_err());
        assert!(reg_inc_beta(1.0, -1.0, 0.5).is_err());
    }

    #[test]
    fn gamma_closed_forms() {
        assert_eq!(reg_inc_gamma(3.0, 0.0).unwrap(), 0.0);
        let p = reg_inc_gamma(1.0, 2.0).unwrap();
        assert!((p - (1.0 - libm::exp(-2.0f64))).abs() < 1e-14);
        assert!((p - 0.8646647).abs() < 1e-7);
        // P(1/2, 1) = erf(1)
        assert!((reg_inc_gamma(0.5, 1.0).unwrap() - 0.842_700_792_949_714_9).abs() < 1e-13);
        assert!(
            (reg_inc_gamma(2.0, 10.0).unwrap() + reg_inc_gamma_upper(2.0, 10.0).unwrap() - 1.0)
                .abs()
                < 1e-15
        );
        assert!(reg_inc_gamma(0.0, 1.0).is_err());
        assert!(reg_inc_gamma(1.0, -1.0).is_err());
    }

    #[test]
    fn erf_values() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(0.5) - 0.520_499_877_813_046_5).abs() < 1e-14);
        assert!((erf(-2.0) + 0.995_322_265_018_952_7).abs() < 1e-14);
        assert!((erfc(3.0) - 2.209_049_699_858_544e-5).abs() < 1e-17);
    }

    #[test]
    fn cdf_closed_forms() {
        let t1 = Distribution::student_t(1.0).unwrap();
        assert!((t1.cdf(1.0).unwrap() - 0.75).abs() < 1e-14);
        for df in [1.0, 3.0, 240.0] {
            assert_eq!(Distribution::student_t(df).unwrap().cdf(0.0).unwrap(), 0.5);
        }
        let c2 = Distribution::chi_square(2.0).unwrap();
        assert!((c2.cdf(2.0).unwrap() - (1.0 - libm::exp(-1.0f64))).abs() < 1e-14);
        assert!((Distribution::Normal.cdf(1.959_963_984_540_054).unwrap() - 0.975).abs() < 1e-14);
    }

    #[test]
    fn quantiles() {
        assert_eq!(
            Distribution::student_t(10.0).unwrap().inv_cdf(0.5).unwrap(),
            0.0
        );
        assert!((Distribution::Normal.inv_cdf(0.975).unwrap() - 1.959964).abs() < 1e-6);
        assert!((Distribution::student_t(1.0).unwrap().inv_cdf(0.75).unwrap() - 1.0).abs() < 1e-12);
        assert!(Distribution::Normal.inv_cdf(0.0).is_err());
        assert!(Distribution::Normal.inv_cdf(1.0).is_err());
    }

    #[test]
    fn invalid_df() {
        assert!(Distribution::student_t(0.0).is_err());
        assert!(Distribution::fisher_f(1.0, -2.0).is_err());
        assert!(Distribution::StudentT { df: f64::NAN }.cdf(1.0).is_err());
    }

    #[test]
    fn sf_complements_cdf() {
        let f = Distribution::fisher_f(5.0, 240.0).unwrap();
        for x in [0.1, 1.0, 1.745, 4.0] {
            assert!((f.cdf(x).unwrap() + f.sf(x).unwrap() - 1.0).abs() < 1e-13);
        }
    }
}
