//! Sequential test: curvature-driven stopping rule and the conformal
//! rejection region.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::nonseq::{coordinate_delta, designed_shift, TestDesign, TestOutcome, TestVariant};
use super::stats::{coordinates_of, model_norm, SuffStats};
use crate::error::{Error, Result};
use crate::geometry::{conformal_chart, gauge_nu, CurvedFamily, UCoord};
use crate::numeric::RngStream;
use crate::sampling::Sampler;

/// Stopping-rule settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingConfig {
    /// Average-time scale `K`.
    pub k: f64,
    pub n_min: usize,
    /// Hard cap; `None` means `10·K·ν_max`.
    pub n_max: Option<usize>,
    /// Critical-radius adjustment `ε̃`.
    pub epsilon_tilde: f64,
}

impl StoppingConfig {
    pub fn new(k: f64) -> Result<Self> {
        let cfg = Self {
            k,
            n_min: 5,
            n_max: None,
            epsilon_tilde: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(Error::Config(format!("K must be positive, got {}", self.k)));
        }
        if self.n_min < 1 {
            return Err(Error::Config("n_min must be at least 1".into()));
        }
        if let Some(n) = self.n_max {
            if n < self.n_min {
                return Err(Error::Config(format!("n_max = {n} is below n_min = {}", self.n_min)));
            }
        }
        if !self.epsilon_tilde.is_finite() {
            return Err(Error::Config("ε̃ must be finite".into()));
        }
        Ok(())
    }
}

/// Everything about a sequential test that does not depend on the data.
#[derive(Debug, Clone)]
pub struct SequentialPlan {
    pub fam: CurvedFamily,
    pub design: TestDesign,
    pub cfg: StoppingConfig,
    pub c0: f64,
    pub nu0: f64,
    pub bias_c: f64,
    utilde0: Vec<f64>,
    g_tilde0: DMatrix<f64>,
}

impl SequentialPlan {
    pub fn new(fam: &CurvedFamily, design: &TestDesign, cfg: &StoppingConfig) -> Result<Self> {
        cfg.validate()?;
        let u0 = &design.null_u0;
        let chart = conformal_chart(fam, u0, u0)?;
        Ok(Self {
            fam: *fam,
            design: design.clone(),
            cfg: *cfg,
            c0: design.critical_value()?.sqrt(),
            nu0: gauge_nu(fam, u0)?,
            bias_c: fam.bias_c(),
            utilde0: chart.utilde,
            g_tilde0: chart.g_tilde,
        })
    }

    /// Whether the run applies the `(k₁, k₂)` modification, which the
    /// sequential theory only validates for `(0, 0)`.
    pub fn is_extrapolated(&self) -> bool {
        !matches!(self.design.variant, TestVariant::Mlt | TestVariant::Wald)
            && (self.design.k1 != 0.0 || self.design.k2 != 0.0)
    }

    /// `n_max` for data generated at `true_u`.
    pub fn n_max(&self, true_u: &UCoord) -> usize {
        self.cfg.n_max.unwrap_or_else(|| {
            let nu_true = gauge_nu(&self.fam, true_u).unwrap_or(self.nu0);
            let cap = 10.0 * self.cfg.k * self.nu0.max(nu_true);
            (cap.ceil() as usize).max(self.cfg.n_min)
        })
    }

    /// Stopping threshold `Kν(û) + c(û)` given the running sum; `ν(û)` is
    /// read off the last component of the normalized sum, which equals the
    /// product of the gauge's sine factors. `None` for a degenerate sum.
    fn stopping_check(&self, sum: &[f64]) -> Option<(f64, f64)> {
        let q = model_norm(&self.fam, sum).ok()?;
        let statistic = q / self.fam.r_dagger;
        let last = sum[sum.len() - 1].abs() / q;
        let threshold = self.cfg.k / last + self.bias_c;
        Some((statistic, threshold))
    }

    /// Rejection statistic `g̃(u₀)ũũ` for data stopped at `τ`.
    pub fn rejection_statistic(&self, stats: &SuffStats) -> Result<(f64, UCoord)> {
        let fam = &self.fam;
        let q = model_norm(fam, &stats.sum_x)?;
        let xi: Vec<f64> = stats.sum_x.iter().map(|x| x / q).collect();
        let u_hat = UCoord::new(coordinates_of(fam.model, &xi));
        let u_used = if self.is_extrapolated() {
            let u0 = &self.design.null_u0.0;
            let delta = coordinate_delta(fam, &u_hat.0, u0);
            let shifted =
                designed_shift(fam, self.design.k1, self.design.k2, &u_hat, &stats.mean(), &delta)?;
            UCoord::new(u0.iter().zip(&shifted).map(|(a, d)| a + d).collect())
        } else {
            u_hat.clone()
        };
        let m = fam.m;
        let nu = crate::geometry::gauge_nu(fam, &u_used).unwrap_or(f64::INFINITY);
        let eta = fam.eta_partial(&vec![0; m], &u_used.0);
        let scale = (self.cfg.k * self.nu0).sqrt();
        let diff: Vec<f64> = (0..m).map(|e| scale * (nu * eta[e] - self.utilde0[e])).collect();
        if diff.iter().any(|d| !d.is_finite()) {
            return Ok((f64::INFINITY, u_hat));
        }
        let mut stat = 0.0;
        for a in 0..m {
            for b in 0..m {
                stat += self.g_tilde0[(a, b)] * diff[a] * diff[b];
            }
        }
        Ok((stat, u_hat))
    }

    /// One sequential trial with observations from `sampler`.
    pub fn run(&self, sampler: &Sampler, n_max: usize, stream: &mut RngStream) -> Result<TestOutcome> {
        let mut stats = SuffStats::new(self.fam.n());
        let mut x = vec![0.0; self.fam.n()];
        let mut truncated = true;
        while stats.count < n_max {
            sampler.draw_into(stream, &mut x);
            stats.push(&x);
            if stats.count < self.cfg.n_min {
                continue;
            }
            if let Some((statistic, threshold)) = self.stopping_check(&stats.sum_x) {
                if statistic >= threshold {
                    truncated = false;
                    break;
                }
            }
        }
        let (statistic, u_hat) = self.rejection_statistic(&stats)?;
        let crit = self.c0 + self.cfg.epsilon_tilde;
        Ok(TestOutcome {
            statistic,
            reject: crit < 0.0 || statistic >= crit * crit,
            tau: Some(stats.count),
            u_hat,
            truncated,
        })
    }
}

/// One sequential trial with data drawn at `true_u`.
pub fn sequential_run(
    fam: &CurvedFamily,
    design: &TestDesign,
    cfg: &StoppingConfig,
    true_u: &UCoord,
    stream: &mut RngStream,
) -> Result<TestOutcome> {
    let plan = SequentialPlan::new(fam, design, cfg)?;
    let sampler = Sampler::new(fam, true_u)?;
    plan.run(&sampler, plan.n_max(true_u), stream)
}

/// Monte Carlo estimate of `ε̃` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Calibration {
    pub epsilon_tilde: f64,
    pub std_error: f64,
    pub replications: usize,
    /// Empirical level at `ε̃ = 0`.
    pub level_at_zero: f64,
    pub truncated: usize,
}

/// Finds `ε̃` such that the empirical null rejection rate equals `α`.
///
/// Replication `i` uses `base.substream(i)`. The rejection rate is monotone
/// in `ε̃`, so the root is the `(1 − α)` order statistic of the stored null
/// statistics, mapped through `(c₀ + ε̃)² = T`.
pub fn calibrate_epsilon(
    fam: &CurvedFamily,
    design: &TestDesign,
    cfg: &StoppingConfig,
    replications: usize,
    base: &RngStream,
) -> Result<Calibration> {
    if replications < 100 {
        return Err(Error::Config(format!("calibration needs at least 100 replications, got {replications}")));
    }
    let plan = SequentialPlan::new(fam, design, &StoppingConfig { epsilon_tilde: 0.0, ..*cfg })?;
    let u0 = &design.null_u0;
    let sampler = Sampler::new(fam, u0)?;
    let n_max = plan.n_max(u0);
    let outcomes: Vec<(f64, bool)> = (0..replications)
        .into_par_iter()
        .map(|i| {
            let mut s = base.substream(i as u64);
            plan.run(&sampler, n_max, &mut s).map(|o| (o.statistic, o.truncated))
        })
        .collect::<Result<_>>()?;
    let mut stats: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let truncated = outcomes.iter().filter(|o| o.1).count();
    let c0sq = plan.c0 * plan.c0;
    let level_at_zero = stats.iter().filter(|&&t| t >= c0sq).count() as f64 / replications as f64;
    stats.sort_by(f64::total_cmp);
    let alpha = design.alpha;
    let r = replications as f64;
    let quantile = |p: f64| -> f64 {
        let idx = ((p * r).ceil() as usize).clamp(1, replications) - 1;
        stats[idx]
    };
    let q = quantile(1.0 - alpha);
    let epsilon_tilde = q.max(0.0).sqrt() - plan.c0;
    // Order-statistic standard error via a local density estimate.
    let se_p = (alpha * (1.0 - alpha) / r).sqrt();
    let spread = 2.0 * se_p;
    let (lo, hi) = (quantile((1.0 - alpha - spread).max(0.0)), quantile((1.0 - alpha + spread).min(1.0)));
    let dq = (hi.max(0.0).sqrt() - lo.max(0.0).sqrt()) / (2.0 * spread);
    Ok(Calibration {
        epsilon_tilde,
        std_error: dq * se_p,
        replications,
        level_at_zero,
        truncated,
    })
}
