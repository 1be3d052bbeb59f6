//! Central chi-square quantiles and the noncentral chi-square CDF.

use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// Upper tail `P(χ²_df > x)`.
pub fn chi2_sf(df: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(0.5 * df as f64, 0.5 * x)
}

/// `P(χ²_df ≤ x)`.
pub fn chi2_cdf(df: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma_lr(0.5 * df as f64, 0.5 * x)
}

/// Upper `alpha` point of the χ² distribution: the `c²` with
/// `P(χ²_df > c²) = alpha`.
pub fn chi2_quantile(df: u32, alpha: f64) -> Result<f64> {
    if df == 0 {
        return Err(Error::Domain("chi-square degrees of freedom must be positive".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let mut lo = 0.0;
    let mut hi = df as f64 + 10.0;
    while chi2_sf(df, hi) > alpha {
        lo = hi;
        hi *= 2.0;
    }
    // Bisection to a bracket of a few ulps, then a Newton polish.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chi2_sf(df, mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let k = 0.5 * df as f64;
    for _ in 0..3 {
        let density = ((k - 1.0) * (0.5 * x).ln() - 0.5 * x - ln_gamma(k)).exp() * 0.5;
        if !(density > 0.0) {
            break;
        }
        let step = (chi2_sf(df, x) - alpha) / density;
        let next = x + step;
        if !(next > lo && next < hi) {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Noncentral χ² CDF `P(χ²_df(λ) ≤ x)` as a Poisson mixture of central
/// χ² CDFs, summed outward from the Poisson mode.
pub fn noncentral_chi2_cdf(df: u32, lambda: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if lambda == 0.0 {
        return chi2_cdf(df, x);
    }
    let half = 0.5 * lambda;
    let mode = half.floor() as u64;
    let log_weight = |j: u64| -half + (j as f64) * half.ln() - ln_gamma(j as f64 + 1.0);
    let term = |j: u64| log_weight(j).exp() * chi2_cdf(df + 2 * j as u32, x);
    let mut sum = term(mode);
    let mut j = mode + 1;
    loop {
        let w = log_weight(j).exp();
        sum += w * chi2_cdf(df + 2 * j as u32, x);
        if w < 1e-18 {
            break;
        }
        j += 1;
    }
    let mut j = mode;
    while j > 0 {
        j -= 1;
        let w = log_weight(j).exp();
        sum += w * chi2_cdf(df + 2 * j as u32, x);
        if w < 1e-18 {
            break;
        }
    }
    sum.min(1.0)
}
