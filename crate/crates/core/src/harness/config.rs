//! Experiment configuration: a JSON document plus command-line overrides.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{CurvedFamily, Model, UCoord};

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Coeffs,
    Losscurves,
    NonseqSim,
    SeqSim,
    Calibrate,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Coeffs => "coeffs",
            Self::Losscurves => "losscurves",
            Self::NonseqSim => "nonseq-sim",
            Self::SeqSim => "seq-sim",
            Self::Calibrate => "calibrate",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "coeffs" => Ok(Self::Coeffs),
            "losscurves" => Ok(Self::Losscurves),
            "nonseq-sim" | "nonseq" => Ok(Self::NonseqSim),
            "seq-sim" | "seq" => Ok(Self::SeqSim),
            "calibrate" => Ok(Self::Calibrate),
            other => Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
    }
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: Model,
    pub m: usize,
    pub alpha: f64,
    pub r: f64,
    pub u0: Vec<f64>,
    pub s_grid: Vec<f64>,
    /// Equally spaced alternative directions per distance.
    #[serde(rename = "H1")]
    pub h1: usize,
    /// Fixed sample size of the nonsequential tests.
    #[serde(rename = "N")]
    pub n: usize,
    /// Time scale of the sequential test.
    #[serde(rename = "K")]
    pub k: f64,
    /// Datasets per alternative.
    pub reps: usize,
    pub seed: u64,
    /// Dimensions tabulated by `coeffs`.
    pub m_values: Vec<usize>,
    /// Calibrate `ε̃` before `seq-sim`; otherwise `ε̃ = 0`.
    pub calibrate: bool,
    pub calibration_reps: usize,
    /// Worker threads; 0 uses every core. Excluded from the config hash.
    #[serde(skip_serializing_if = "is_zero", default)]
    pub workers: usize,
    /// Output path. Excluded from the config hash.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub out: Option<PathBuf>,
}

fn is_zero(x: &usize) -> bool {
    *x == 0
}

/// `count` equally spaced values from 0 to `max` inclusive.
pub fn linear_grid(max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|i| max * i as f64 / (count - 1) as f64).collect(),
    }
}

impl ExperimentConfig {
    /// The published settings for `experiment` on `model`.
    pub fn paper(experiment: ExperimentKind, model: Model) -> Self {
        let u0 = match model {
            Model::Vmf => vec![FRAC_PI_2, FRAC_PI_2],
            Model::Hyperboloid => vec![1.0, FRAC_PI_2],
        };
        let seq = experiment == ExperimentKind::SeqSim || experiment == ExperimentKind::Calibrate;
        let (r, n, h1, k) = match (model, seq) {
            (Model::Vmf, false) => (0.1, 2000, 1000, 1000.0),
            (Model::Vmf, true) => (0.2, 1000, 500, 1000.0),
            (Model::Hyperboloid, false) => (2.0, 50, 5000, 60.0),
            (Model::Hyperboloid, true) => (2.0, 50, 500, 60.0),
        };
        Self {
            experiment,
            model,
            m: 2,
            alpha: 0.05,
            r,
            u0,
            s_grid: linear_grid(5.0, 20),
            h1,
            n,
            k,
            reps: 1,
            seed: 20_240_601,
            m_values: vec![2, 3, 4, 5],
            calibrate: false,
            calibration_reps: 10_000,
            workers: 0,
            out: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn family(&self) -> Result<CurvedFamily> {
        CurvedFamily::new(self.model, self.m, self.r)
    }

    pub fn null_point(&self) -> UCoord {
        UCoord::new(self.u0.clone())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(2..=8).contains(&self.m) {
            return bad(format!("m = {} is outside 2..=8", self.m));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} is not in (0, 1)", self.alpha));
        }
        if !(self.r > 0.0) || !self.r.is_finite() {
            return bad(format!("r = {} must be positive", self.r));
        }
        if self.u0.len() != self.m {
            return bad(format!("u0 has {} coordinates, expected m = {}", self.u0.len(), self.m));
        }
        if self.s_grid.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return bad("s grid must be finite and nonnegative".into());
        }
        if self.s_grid.windows(2).any(|w| w[1] < w[0]) {
            return bad("s grid must be ascending".into());
        }
        if self.h1 < 1 || self.reps < 1 {
            return bad("H1 and reps must be at least 1".into());
        }
        if self.n < 1 {
            return bad("N must be at least 1".into());
        }
        if !(self.k > 0.0) || !self.k.is_finite() {
            return bad(format!("K = {} must be positive", self.k));
        }
        if self.m_values.iter().any(|m| !(2..=8).contains(m)) {
            return bad("m_values must lie in 2..=8".into());
        }
        let fam = self.family()?;
        fam.check_range(&self.null_point())?;
        fam.check_regular(&self.null_point())?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON, excluding `workers` and `out`, so that
    /// a run's identity does not depend on where or how widely it ran.
    pub fn hash(&self) -> String {
        let canonical = Self {
            workers: 0,
            out: None,
            ..self.clone()
        };
        let json = serde_json::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_settings_validate() {
        for e in [ExperimentKind::NonseqSim, ExperimentKind::SeqSim, ExperimentKind::Coeffs] {
            for m in [Model::Vmf, Model::Hyperboloid] {
                ExperimentConfig::paper(e, m).validate().unwrap();
            }
        }
        let c = ExperimentConfig::paper(ExperimentKind::SeqSim, Model::Hyperboloid);
        assert_eq!((c.r, c.n, c.h1, c.k), (2.0, 50, 500, 60.0));
        assert_eq!(c.s_grid.len(), 20);
        assert_eq!(c.s_grid[19], 5.0);
    }

    #[test]
    fn json_round_trip_and_hash() {
        let mut c = ExperimentConfig::paper(ExperimentKind::NonseqSim, Model::Vmf);
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let h = c.hash();
        assert_eq!(h.len(), 64);
        c.workers = 8;
        c.out = Some("x.csv".into());
        assert_eq!(c.hash(), h);
        c.seed += 1;
        assert_ne!(c.hash(), h);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = ExperimentConfig::paper(ExperimentKind::NonseqSim, Model::Vmf);
        let mut c = base.clone();
        c.s_grid = vec![1.0, 0.5];
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.h1 = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.u0 = vec![0.0, 1.0];
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_json("{\"experiment\": \"coeffs\"}").is_err());
        let text = base.to_json().replace("\"seed\"", "\"sed\"");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn experiment_names_parse() {
        for e in [
            ExperimentKind::Coeffs,
            ExperimentKind::Losscurves,
            ExperimentKind::NonseqSim,
            ExperimentKind::SeqSim,
            ExperimentKind::Calibrate,
        ] {
            assert_eq!(e.name().parse::<ExperimentKind>().unwrap(), e);
        }
    }
}
