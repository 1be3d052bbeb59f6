//! Fixed-sample tests of a simple null `u = u₀`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::stats::{mle, SuffStats};
use crate::error::{Error, Result};
use crate::geometry::{CurvedFamily, UCoord};
use crate::power::PowerContext;

/// Test statistic family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestVariant {
    /// Quadratic form of the MLE under the metric at the estimate.
    Mlt,
    /// Quadratic form of the MLE under the metric at the null.
    Wald,
    Lrt,
    /// Efficient score test.
    Est,
    /// Modified MLE with proportions `(k₁, k₂)`.
    DesignedK,
}

impl TestVariant {
    /// Canonical `(k₁, k₂)`.
    pub fn proportions(self) -> Option<(f64, f64)> {
        match self {
            TestVariant::Mlt | TestVariant::Wald => Some((0.0, 0.0)),
            TestVariant::Lrt => Some((0.5, 0.5)),
            TestVariant::Est => Some((1.0, 1.0)),
            TestVariant::DesignedK => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TestVariant::Mlt => "mlt",
            TestVariant::Wald => "wald",
            TestVariant::Lrt => "lrt",
            TestVariant::Est => "est",
            TestVariant::DesignedK => "designedk",
        }
    }
}

impl std::str::FromStr for TestVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mlt" | "omlt" => Ok(TestVariant::Mlt),
            "wald" => Ok(TestVariant::Wald),
            "lrt" | "olrt" => Ok(TestVariant::Lrt),
            "est" | "oest" => Ok(TestVariant::Est),
            "designedk" | "designed-k" | "k" => Ok(TestVariant::DesignedK),
            other => Err(Error::Config(format!("unknown test variant `{other}`"))),
        }
    }
}

/// A test of `u = u₀` at level `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestDesign {
    pub variant: TestVariant,
    pub k1: f64,
    pub k2: f64,
    pub alpha: f64,
    pub null_u0: UCoord,
}

impl TestDesign {
    pub fn new(variant: TestVariant, alpha: f64, null_u0: UCoord) -> Result<Self> {
        let (k1, k2) = variant.proportions().ok_or_else(|| {
            Error::Config("designed k-tests need explicit proportions; use TestDesign::designed".into())
        })?;
        Self::build(variant, k1, k2, alpha, null_u0)
    }

    pub fn designed(k1: f64, k2: f64, alpha: f64, null_u0: UCoord) -> Result<Self> {
        Self::build(TestVariant::DesignedK, k1, k2, alpha, null_u0)
    }

    fn build(variant: TestVariant, k1: f64, k2: f64, alpha: f64, null_u0: UCoord) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("level must lie in (0, 1), got {alpha}")));
        }
        if !k1.is_finite() || !k2.is_finite() {
            return Err(Error::Config(format!("proportions must be finite, got ({k1}, {k2})")));
        }
        Ok(Self {
            variant,
            k1,
            k2,
            alpha,
            null_u0,
        })
    }

    /// Squared critical radius `c₀²`.
    pub fn critical_value(&self) -> Result<f64> {
        let ctx = PowerContext::new(self.null_u0.dim() as u32, self.alpha)?;
        Ok(ctx.c0 * ctx.c0)
    }
}

/// Result of one test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub reject: bool,
    /// Stopping time of a sequential run.
    pub tau: Option<usize>,
    pub u_hat: UCoord,
    /// Sequential run hit `n_max` before the stopping rule fired.
    pub truncated: bool,
}

/// Coordinate difference `u − u₀` with the azimuth wrapped to `(−π, π]`.
pub fn coordinate_delta(fam: &CurvedFamily, u: &[f64], u0: &[f64]) -> Vec<f64> {
    let m = fam.m;
    let mut d: Vec<f64> = u.iter().zip(u0).map(|(a, b)| a - b).collect();
    let x = &mut d[m - 1];
    *x = (*x + PI).rem_euclid(2.0 * PI) - PI;
    if *x == -PI {
        *x = PI;
    }
    d
}

fn quad_form(diag: &[f64], d: &[f64]) -> f64 {
    diag.iter().zip(d).map(|(g, x)| g * x * x).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified estimator `û' = û + g^{-1}(û)·Â·(û − u₀)`; returns `û' − u₀`.
pub(crate) fn designed_shift(fam: &CurvedFamily, k1: f64, k2: f64, u_hat: &UCoord, xbar: &[f64], delta: &[f64]) -> Result<Vec<f64>> {
    let m = fam.m;
    if k1 == 0.0 && k2 == 0.0 {
        return Ok(delta.to_vec());
    }
    let g = fam.metric_diagonal(u_hat)?;
    // â_bc = g_bc(û) + ∂_b∂_c θ(û)·x̄, per observation.
    let mut a_hat = vec![0.0; m * m];
    for b in 0..m {
        for c in 0..m {
            let d2 = fam.theta_partial(&fam.orders(&[b, c]), &u_hat.0);
            a_hat[b * m + c] = dot(&d2, xbar) + if b == c { g[b] } else { 0.0 };
        }
    }
    let trace_mean = (0..m).map(|b| a_hat[b * m + b] / g[b]).sum::<f64>() / m as f64;
    let mut out = delta.to_vec();
    for a in 0..m {
        let mut shift = 0.0;
        for c in 0..m {
            let gbc = if a == c { g[a] } else { 0.0 };
            let big_a = k1 * (a_hat[a * m + c] - gbc * trace_mean) + k2 * gbc * trace_mean;
            shift += big_a * delta[c];
        }
        out[a] += shift / g[a];
    }
    Ok(out)
}

/// Evaluates the chosen statistic on `N = stats.count` observations.
pub fn nonseq_statistic(fam: &CurvedFamily, design: &TestDesign, stats: &SuffStats) -> Result<TestOutcome> {
    fam.check_dim(&design.null_u0)?;
    let n = stats.count as f64;
    let u0 = &design.null_u0;
    let u_hat = mle(fam, stats)?;
    let xbar = stats.mean();
    let delta = coordinate_delta(fam, &u_hat.0, &u0.0);
    let statistic = match design.variant {
        TestVariant::Wald => n * quad_form(&fam.metric_diagonal(u0)?, &delta),
        TestVariant::Mlt => n * quad_form(&fam.metric_diagonal(&u_hat)?, &delta),
        TestVariant::Lrt => {
            let zero = vec![0; fam.m];
            let t_hat = fam.theta_partial(&zero, &u_hat.0);
            let t0 = fam.theta_partial(&zero, &u0.0);
            (2.0 * n * (dot(&t_hat, &xbar) - dot(&t0, &xbar))).max(0.0)
        }
        TestVariant::Est => {
            let g = fam.metric_diagonal(u0)?;
            let zero = vec![0; fam.m];
            let eta0: Vec<f64> = fam.eta_partial(&zero, &u0.0);
            let resid: Vec<f64> = xbar.iter().zip(&eta0).map(|(x, e)| x - e).collect();
            n * (0..fam.m)
                .map(|a| {
                    let l = dot(&fam.theta_partial(&fam.orders(&[a]), &u0.0), &resid);
                    l * l / g[a]
                })
                .sum::<f64>()
        }
        TestVariant::DesignedK => {
            let shifted = designed_shift(fam, design.k1, design.k2, &u_hat, &xbar, &delta)?;
            n * quad_form(&fam.metric_diagonal(u0)?, &shifted)
        }
    };
    let crit = design.critical_value()?;
    Ok(TestOutcome {
        statistic,
        reject: statistic >= crit,
        tau: None,
        u_hat,
        truncated: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::embed;
    use crate::numeric::RngStream;
    use crate::sampling::Sampler;
    use std::f64::consts::FRAC_PI_2;

    const VARIANTS: [TestVariant; 4] = [TestVariant::Mlt, TestVariant::Wald, TestVariant::Lrt, TestVariant::Est];

    fn data(fam: &CurvedFamily, u: &UCoord, n: usize, seed: u64) -> SuffStats {
        let s = Sampler::new(fam, u).unwrap();
        let mut st = RngStream::new(seed, 0);
        let mut stats = SuffStats::new(3);
        for _ in 0..n {
            stats.push(&s.draw(&mut st).x);
        }
        stats
    }

    #[test]
    fn null_point_gives_zero() {
        for fam in [CurvedFamily::vmf(2, 0.1).unwrap(), CurvedFamily::hyperboloid(2, 2.0).unwrap()] {
            let u0 = UCoord::new(vec![1.0, FRAC_PI_2]);
            let (_, eta) = embed(&fam, &u0).unwrap();
            let stats = SuffStats::from_sum(eta.v.iter().map(|e| e * 50.0).collect(), 50).unwrap();
            for v in VARIANTS {
                let out = nonseq_statistic(&fam, &TestDesign::new(v, 0.05, u0.clone()).unwrap(), &stats).unwrap();
                assert!(out.statistic.abs() < 1e-18, "{v:?}: {}", out.statistic);
                assert!(!out.reject);
            }
            let d = TestDesign::designed(0.3, 1.7, 0.05, u0.clone()).unwrap();
            assert!(nonseq_statistic(&fam, &d, &stats).unwrap().statistic.abs() < 1e-18);
        }
    }

    #[test]
    fn designed_zero_is_wald() {
        let fam = CurvedFamily::vmf(2, 0.5).unwrap();
        let u0 = UCoord::new(vec![FRAC_PI_2, FRAC_PI_2]);
        let stats = data(&fam, &UCoord::new(vec![1.4, 1.7]), 200, 4);
        let w = nonseq_statistic(&fam, &TestDesign::new(TestVariant::Wald, 0.05, u0.clone()).unwrap(), &stats).unwrap();
        let k = nonseq_statistic(&fam, &TestDesign::designed(0.0, 0.0, 0.05, u0).unwrap(), &stats).unwrap();
        assert_eq!(w.statistic, k.statistic);
    }

    #[test]
    fn lrt_nonnegative_and_variants_agree_to_first_order() {
        let fam = CurvedFamily::hyperboloid(2, 2.0).unwrap();
        let u0 = UCoord::new(vec![1.0, FRAC_PI_2]);
        let mut worst = Vec::new();
        for &n in &[100usize, 10_000] {
            let stats = data(&fam, &u0, n, 9);
            let wald = nonseq_statistic(&fam, &TestDesign::new(TestVariant::Wald, 0.05, u0.clone()).unwrap(), &stats)
                .unwrap()
                .statistic;
            let mut spread = 0.0f64;
            for v in [TestVariant::Lrt, TestVariant::Est, TestVariant::Mlt] {
                let s = nonseq_statistic(&fam, &TestDesign::new(v, 0.05, u0.clone()).unwrap(), &stats).unwrap().statistic;
                assert!(s >= 0.0);
                spread = spread.max((s - wald).abs() / wald.max(1e-12));
            }
            worst.push(spread);
        }
        assert!(worst[1] < worst[0].max(0.05));
        assert!(worst[1] < 0.05);
    }

    #[test]
    fn designed_shift_normalization() {
        // For umbilic models â_bc ∝ g_bc, so the k₁ part must vanish.
        let fam = CurvedFamily::vmf(2, 0.4).unwrap();
        let u0 = UCoord::new(vec![FRAC_PI_2, FRAC_PI_2]);
        let stats = data(&fam, &UCoord::new(vec![1.3, 1.9]), 300, 5);
        let a = nonseq_statistic(&fam, &TestDesign::designed(0.0, 0.5, 0.05, u0.clone()).unwrap(), &stats).unwrap();
        let b = nonseq_statistic(&fam, &TestDesign::designed(3.0, 0.5, 0.05, u0).unwrap(), &stats).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-9 * a.statistic);
    }

    #[test]
    fn azimuth_wraps() {
        let fam = CurvedFamily::vmf(2, 1.0).unwrap();
        let d = coordinate_delta(&fam, &[1.0, 6.2], &[1.0, 0.1]);
        assert!((d[1] - (6.2 - 0.1 - 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn critical_value_df2() {
        let d = TestDesign::new(TestVariant::Mlt, 0.05, UCoord::new(vec![1.0, 1.0])).unwrap();
        assert!((d.critical_value().unwrap() + 2.0 * 0.05f64.ln()).abs() < 1e-10);
        assert!(TestDesign::new(TestVariant::DesignedK, 0.05, UCoord::new(vec![1.0, 1.0])).is_err());
        assert!(TestDesign::new(TestVariant::Mlt, 1.5, UCoord::new(vec![1.0, 1.0])).is_err());
    }
}
