//! Monte Carlo power experiments.
//!
//! Trial `(i, j, k)` (distance index, alternative, replicate) always draws
//! from `RngStream::new(seed, (i·H1 + j)·reps + k)`, and results are reduced
//! as integer counts, so reports do not depend on the worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{gauge_nu, CurvedFamily, UCoord};
use crate::inference::{
    calibrate_epsilon, nonseq_statistic, Calibration, SequentialPlan, StoppingConfig, SuffStats, TestDesign,
    TestVariant,
};
use crate::numeric::RngStream;
use crate::power::{coefficients, PowerContext};
use crate::sampling::Sampler;

use super::alternatives::alternatives;
use super::config::{ExperimentConfig, ExperimentKind};
use super::output::{fmt_f64, fmt_opt, CsvTable};

/// Largest tolerated fraction of truncated sequential runs.
pub const MAX_TRUNCATION: f64 = 0.01;

/// Stream index reserved for calibration, far from any trial index.
const CALIBRATION_STREAM: u64 = u64::MAX;

/// Aggregated result for one test at one distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerRow {
    pub s: f64,
    pub test: String,
    /// Trials that produced a statistic (failures excluded).
    pub trials: u64,
    pub rejections: u64,
    pub power: f64,
    pub std_error: f64,
    /// `ΔP_Ke` (fixed-sample experiment) or `DP_Ke` (sequential experiment).
    pub diff: Option<f64>,
    /// Standard error of `diff` from the paired per-trial differences.
    pub diff_se: Option<f64>,
    pub mean_tau: Option<f64>,
    pub var_tau: Option<f64>,
    pub truncated: u64,
    pub failures: u64,
    /// False when more than [`MAX_TRUNCATION`] of the runs were truncated.
    pub valid: bool,
}

/// All rows of one experiment plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub code_version: &'static str,
    pub epsilon_tilde: f64,
    pub calibration: Option<Calibration>,
    pub rows: Vec<PowerRow>,
}

impl SimulationReport {
    pub fn row(&self, s: f64, test: &str) -> Option<&PowerRow> {
        self.rows.iter().find(|r| r.s == s && r.test == test)
    }

    /// Every comparison is trustworthy (no excess truncation).
    pub fn is_valid(&self) -> bool {
        self.rows.iter().all(|r| r.valid)
    }

    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&[
            "experiment", "model", "s", "test", "trials", "rejections", "power", "std_error", "diff", "diff_se",
            "mean_tau", "var_tau", "truncated", "failures", "valid", "epsilon_tilde", "code_version",
        ]);
        for r in &self.rows {
            t.push(
                &self.config,
                &self.config_hash,
                vec![
                    self.experiment.to_string(),
                    self.config.model.to_string(),
                    fmt_f64(r.s),
                    r.test.clone(),
                    r.trials.to_string(),
                    r.rejections.to_string(),
                    fmt_f64(r.power),
                    fmt_f64(r.std_error),
                    fmt_opt(r.diff),
                    fmt_opt(r.diff_se),
                    fmt_opt(r.mean_tau),
                    fmt_opt(r.var_tau),
                    r.truncated.to_string(),
                    r.failures.to_string(),
                    r.valid.to_string(),
                    fmt_f64(self.epsilon_tilde),
                    self.code_version.to_string(),
                ],
            );
        }
        t
    }
}

/// Runs `f` on a pool of `workers` threads (0 = one per core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Integer tallies for `T` tests sharing each trial's data. Differences are
/// taken against a reference test and kept as exact sums.
#[derive(Debug, Clone, PartialEq)]
struct Tally<const T: usize> {
    trials: u64,
    failures: u64,
    reference: u64,
    rejections: [u64; T],
    diff_sum: [i64; T],
    diff_abs: [u64; T],
    tau_sum: u64,
    tau_sq: u128,
    truncated: u64,
}

impl<const T: usize> Tally<T> {
    fn zero() -> Self {
        Self {
            trials: 0,
            failures: 0,
            reference: 0,
            rejections: [0; T],
            diff_sum: [0; T],
            diff_abs: [0; T],
            tau_sum: 0,
            tau_sq: 0,
            truncated: 0,
        }
    }

    fn failed() -> Self {
        Self { failures: 1, ..Self::zero() }
    }

    fn trial(reference: bool, rejects: [bool; T]) -> Self {
        let mut t = Self { trials: 1, reference: reference as u64, ..Self::zero() };
        for (i, &r) in rejects.iter().enumerate() {
            t.rejections[i] = r as u64;
            let d = reference as i64 - r as i64;
            t.diff_sum[i] = d;
            t.diff_abs[i] = d.unsigned_abs();
        }
        t
    }

    fn add(mut self, o: Self) -> Self {
        self.trials += o.trials;
        self.failures += o.failures;
        self.reference += o.reference;
        for i in 0..T {
            self.rejections[i] += o.rejections[i];
            self.diff_sum[i] += o.diff_sum[i];
            self.diff_abs[i] += o.diff_abs[i];
        }
        self.tau_sum += o.tau_sum;
        self.tau_sq += o.tau_sq;
        self.truncated += o.truncated;
        self
    }

    /// Mean and standard error of the paired difference for test `i`.
    /// `d ∈ {−1, 0, 1}`, so `Σd² = Σ|d|`.
    fn paired(&self, i: usize) -> (f64, f64) {
        let n = self.trials as f64;
        if n == 0.0 {
            return (f64::NAN, f64::NAN);
        }
        let mean = self.diff_sum[i] as f64 / n;
        let second = self.diff_abs[i] as f64 / n;
        let var = if n > 1.0 { (second - mean * mean).max(0.0) * n / (n - 1.0) } else { 0.0 };
        (mean, (var / n).sqrt())
    }
}

fn binomial(rejections: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = rejections as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

fn base_row(s: f64, test: &str, rejections: u64, trials: u64, failures: u64) -> PowerRow {
    let (power, std_error) = binomial(rejections, trials);
    PowerRow {
        s,
        test: test.to_string(),
        trials,
        rejections,
        power,
        std_error,
        diff: None,
        diff_se: None,
        mean_tau: None,
        var_tau: None,
        truncated: 0,
        failures,
        valid: true,
    }
}

fn expect(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<CurvedFamily> {
    if cfg.experiment != kind {
        return Err(Error::Config(format!("expected a {kind} config, got {}", cfg.experiment)));
    }
    cfg.validate()?;
    let fam = cfg.family()?;
    if fam.m != 2 {
        return Err(Error::Unsupported("simulation experiments are implemented for m = 2".into()));
    }
    Ok(fam)
}

fn trial_stream(cfg: &ExperimentConfig, si: usize, j: usize, rep: usize) -> RngStream {
    let id = ((si * cfg.h1 + j) * cfg.reps + rep) as u64;
    RngStream::new(cfg.seed, id)
}

fn draw_stats(sampler: &Sampler, n: usize, stream: &mut RngStream) -> SuffStats {
    let mut stats = SuffStats::new(3);
    let mut x = [0.0; 3];
    for _ in 0..n {
        sampler.draw_into(stream, &mut x);
        stats.push(&x);
    }
    stats
}

/// Names of the fixed-sample tests; `SEFF` is the designed test that is
/// third-order efficient at the row's own distance.
pub const NONSEQ_TESTS: [&str; 7] = ["MLT", "LRT", "EST", "DMLT", "DLRT", "DEST", "SEFF"];

fn nonseq_designs(cfg: &ExperimentConfig, s: f64) -> Result<[TestDesign; 7]> {
    let u0 = cfg.null_point();
    let a = cfg.alpha;
    let c = coefficients(&PowerContext::new(cfg.m as u32, a)?, s)?;
    Ok([
        TestDesign::new(TestVariant::Mlt, a, u0.clone())?,
        TestDesign::new(TestVariant::Lrt, a, u0.clone())?,
        TestDesign::new(TestVariant::Est, a, u0.clone())?,
        TestDesign::designed(0.0, 0.0, a, u0.clone())?,
        TestDesign::designed(0.5, 0.5, a, u0.clone())?,
        TestDesign::designed(1.0, 1.0, a, u0.clone())?,
        TestDesign::designed(c.k1, c.k2, a, u0)?,
    ])
}

fn evaluate<const T: usize>(fam: &CurvedFamily, designs: &[TestDesign; T], stats: &SuffStats) -> Result<[bool; T]> {
    let mut out = [false; T];
    for (o, d) in out.iter_mut().zip(designs) {
        *o = nonseq_statistic(fam, d, stats)?.reject;
    }
    Ok(out)
}

/// Fixed-sample experiment: empirical power of every test in
/// [`NONSEQ_TESTS`] and the loss `ΔP_Ke = N(P_SEFF − P)/γ²`. All tests see
/// the same datasets.
pub fn run_nonseq_experiment(cfg: &ExperimentConfig) -> Result<SimulationReport> {
    let fam = expect(cfg, ExperimentKind::NonseqSim)?;
    let u0 = cfg.null_point();
    let gamma2 = fam.m as f64 / (fam.r_dagger * fam.r_dagger);
    let loss_scale = cfg.n as f64 / gamma2;
    let mut rows = Vec::new();
    for (si, &s) in cfg.s_grid.iter().enumerate() {
        let designs = nonseq_designs(cfg, s)?;
        let alts = alternatives(&fam, &u0, s, cfg.h1, cfg.n as f64)?;
        let samplers: Vec<Sampler> = alts.iter().map(|u| Sampler::new(&fam, u)).collect::<Result<_>>()?;
        let tally = with_workers(cfg.workers, || {
            (0..cfg.h1 * cfg.reps)
                .into_par_iter()
                .map(|t| {
                    let (j, rep) = (t / cfg.reps, t % cfg.reps);
                    let mut stream = trial_stream(cfg, si, j, rep);
                    let stats = draw_stats(&samplers[j], cfg.n, &mut stream);
                    match evaluate(&fam, &designs, &stats) {
                        Ok(r) => Ok(Tally::<7>::trial(r[6], r)),
                        Err(Error::Degenerate(_)) => Ok(Tally::failed()),
                        Err(e) => Err(e),
                    }
                })
                .try_reduce(Tally::zero, |a, b| Ok(a.add(b)))
        })??;
        for (i, name) in NONSEQ_TESTS.iter().enumerate() {
            let mut row = base_row(s, name, tally.rejections[i], tally.trials, tally.failures);
            let (d, se) = tally.paired(i);
            row.diff = Some(loss_scale * d);
            row.diff_se = Some(loss_scale * se);
            rows.push(row);
        }
    }
    Ok(SimulationReport {
        experiment: cfg.experiment,
        config: cfg.clone(),
        config_hash: cfg.hash(),
        code_version: env!("CARGO_PKG_VERSION"),
        epsilon_tilde: 0.0,
        calibration: None,
        rows,
    })
}

/// Sequential `k* = (0, 0)` plan for `cfg` with the given `ε̃`.
pub fn sequential_plan(cfg: &ExperimentConfig, epsilon_tilde: f64) -> Result<SequentialPlan> {
    let fam = cfg.family()?;
    let design = TestDesign::new(TestVariant::Mlt, cfg.alpha, cfg.null_point())?;
    let stopping = StoppingConfig { epsilon_tilde, ..StoppingConfig::new(cfg.k)? };
    SequentialPlan::new(&fam, &design, &stopping)
}

/// Monte Carlo `ε̃` for the sequential test of `cfg`.
pub fn run_calibration(cfg: &ExperimentConfig) -> Result<Calibration> {
    cfg.validate()?;
    let fam = cfg.family()?;
    let plan = sequential_plan(cfg, 0.0)?;
    let base = RngStream::new(cfg.seed, CALIBRATION_STREAM);
    with_workers(cfg.workers, || {
        calibrate_epsilon(&fam, &plan.design, &plan.cfg, cfg.calibration_reps, &base)
    })?
}

/// Calibration as a one-row table.
pub fn calibration_table(cfg: &ExperimentConfig, cal: &Calibration) -> CsvTable {
    let mut t = CsvTable::new(&[
        "model", "K", "alpha", "replications", "epsilon_tilde", "std_error", "level_at_zero", "truncated",
    ]);
    t.push(
        cfg,
        &cfg.hash(),
        vec![
            cfg.model.to_string(),
            fmt_f64(cfg.k),
            fmt_f64(cfg.alpha),
            cal.replications.to_string(),
            fmt_f64(cal.epsilon_tilde),
            fmt_f64(cal.std_error),
            fmt_f64(cal.level_at_zero),
            cal.truncated.to_string(),
        ],
    );
    t
}

/// Names of the tests compared in the sequential experiment.
pub const SEQ_TESTS: [&str; 4] = ["CMLT", "OMLT", "OLRT", "OEST"];

/// Sequential experiment: the sequential MLT (`CMLT`) against the
/// fixed-sample MLT, LRT and EST with `N` observations, at alternatives
/// `u0 + s·e/√(Kν₀)`. Both procedures read the same random stream, so the
/// fixed-sample data are the first `N` observations of the sequential run
/// and `DP_Ke = P_CMLT − P` has a paired standard error.
pub fn run_seq_experiment(cfg: &ExperimentConfig) -> Result<SimulationReport> {
    let fam = expect(cfg, ExperimentKind::SeqSim)?;
    let u0 = cfg.null_point();
    let calibration = if cfg.calibrate { Some(run_calibration(cfg)?) } else { None };
    let epsilon_tilde = calibration.map_or(0.0, |c| c.epsilon_tilde);
    let plan = sequential_plan(cfg, epsilon_tilde)?;
    let nu0 = gauge_nu(&fam, &u0)?;
    let designs = [
        TestDesign::new(TestVariant::Mlt, cfg.alpha, u0.clone())?,
        TestDesign::new(TestVariant::Lrt, cfg.alpha, u0.clone())?,
        TestDesign::new(TestVariant::Est, cfg.alpha, u0.clone())?,
    ];
    let mut rows = Vec::new();
    for (si, &s) in cfg.s_grid.iter().enumerate() {
        let alts = alternatives(&fam, &u0, s, cfg.h1, cfg.k * nu0)?;
        let samplers: Vec<Sampler> = alts.iter().map(|u| Sampler::new(&fam, u)).collect::<Result<_>>()?;
        let caps: Vec<usize> = alts.iter().map(|u: &UCoord| plan.n_max(u)).collect();
        let tally = with_workers(cfg.workers, || {
            (0..cfg.h1 * cfg.reps)
                .into_par_iter()
                .map(|t| {
                    let (j, rep) = (t / cfg.reps, t % cfg.reps);
                    let stream = trial_stream(cfg, si, j, rep);
                    let stats = draw_stats(&samplers[j], cfg.n, &mut stream.clone());
                    let fixed = match evaluate(&fam, &designs, &stats) {
                        Ok(r) => r,
                        Err(Error::Degenerate(_)) => return Ok(Tally::<3>::failed()),
                        Err(e) => return Err(e),
                    };
                    let seq = match plan.run(&samplers[j], caps[j], &mut stream.clone()) {
                        Ok(o) => o,
                        Err(Error::Degenerate(_)) => return Ok(Tally::failed()),
                        Err(e) => return Err(e),
                    };
                    let tau = seq.tau.unwrap_or(0) as u64;
                    let mut tally = Tally::trial(seq.reject, fixed);
                    tally.tau_sum = tau;
                    tally.tau_sq = (tau as u128) * (tau as u128);
                    tally.truncated = seq.truncated as u64;
                    Ok(tally)
                })
                .try_reduce(Tally::zero, |a, b| Ok(a.add(b)))
        })??;
        let n = tally.trials as f64;
        let valid = tally.trials > 0 && (tally.truncated as f64) <= MAX_TRUNCATION * n;
        let mut seq_row = base_row(s, SEQ_TESTS[0], tally.reference, tally.trials, tally.failures);
        if tally.trials > 0 {
            let mean = tally.tau_sum as f64 / n;
            let second = tally.tau_sq as f64 / n;
            seq_row.mean_tau = Some(mean);
            seq_row.var_tau = Some(if n > 1.0 { (second - mean * mean).max(0.0) * n / (n - 1.0) } else { 0.0 });
        }
        seq_row.truncated = tally.truncated;
        seq_row.valid = valid;
        rows.push(seq_row);
        for (i, name) in SEQ_TESTS[1..].iter().enumerate() {
            let mut row = base_row(s, name, tally.rejections[i], tally.trials, tally.failures);
            let (d, se) = tally.paired(i);
            row.diff = Some(d);
            row.diff_se = Some(se);
            row.valid = valid;
            rows.push(row);
        }
    }
    Ok(SimulationReport {
        experiment: cfg.experiment,
        config: cfg.clone(),
        config_hash: cfg.hash(),
        code_version: env!("CARGO_PKG_VERSION"),
        epsilon_tilde,
        calibration,
        rows,
    })
}
