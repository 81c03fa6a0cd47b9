//! Least-squares building blocks shared by the fits.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub(crate) fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}

pub(crate) fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Two-sided p-value of a t statistic.
pub(crate) fn t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() || df <= 0.0 {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid t distribution");
    2.0 * dist.cdf(-t.abs())
}

/// Lower-tail probability P(T <= t).
pub(crate) fn t_lower(t: f64, df: f64) -> f64 {
    if t.is_nan() || df <= 0.0 {
        return f64::NAN;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid t distribution");
    dist.cdf(t)
}

/// Simple regression y = a + b x.
#[derive(Debug, Clone)]
pub(crate) struct SimpleOls {
    pub intercept: f64,
    pub slope: f64,
    pub slope_se: f64,
    pub r2: f64,
    pub rss: f64,
    pub residuals: Vec<f64>,
    /// Leverages h_ii.
    pub leverage: Vec<f64>,
}

pub(crate) fn simple_ols(x: &[f64], y: &[f64]) -> Result<SimpleOls> {
    let n = x.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateInput("predictor is constant".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| b - (intercept + slope * a))
        .collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let tss: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let sigma2 = rss / (n as f64 - 2.0);
    let leverage = x
        .iter()
        .map(|a| 1.0 / n as f64 + (a - mx).powi(2) / sxx)
        .collect();
    Ok(SimpleOls {
        intercept,
        slope,
        slope_se: (sigma2 / sxx).sqrt(),
        r2,
        rss,
        residuals,
        leverage,
    })
}

/// Multiple regression solved by SVD.
#[derive(Debug, Clone)]
pub(crate) struct MultiOls {
    pub coefficients: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub rss: f64,
}

/// Relative singular-value cutoff below which a design is rank deficient.
const RANK_TOL: f64 = 1e-10;

/// Fit `y = X beta`. Returns `None` when `X` is rank deficient.
pub(crate) fn multi_ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<MultiOls> {
    let (n, p) = x.shape();
    if p == 0 {
        return Some(MultiOls {
            coefficients: vec![],
            stderrs: vec![],
            rss: y.norm_squared(),
        });
    }
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 || svd.singular_values.iter().any(|&s| s <= RANK_TOL * smax) {
        return None;
    }
    let u = svd.u.as_ref()?;
    let v_t = svd.v_t.as_ref()?;
    let uty = u.transpose() * y;
    let scaled = uty.component_div(&svd.singular_values);
    let beta = v_t.transpose() * scaled;
    let resid = y - x * &beta;
    let rss = resid.norm_squared();
    let df = n as f64 - p as f64;
    let sigma2 = if df > 0.0 { rss / df } else { f64::NAN };
    // diag((X'X)^-1) = sum_k V_jk^2 / s_k^2
    let stderrs = (0..p)
        .map(|j| {
            let d: f64 = (0..p)
                .map(|k| v_t[(k, j)].powi(2) / svd.singular_values[k].powi(2))
                .sum();
            (sigma2 * d).sqrt()
        })
        .collect();
    Some(MultiOls {
        coefficients: beta.iter().copied().collect(),
        stderrs,
        rss,
    })
}
