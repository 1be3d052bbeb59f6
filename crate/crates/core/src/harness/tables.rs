//! Deterministic tables: power-loss coefficients and typical-test loss curves.

use crate::error::{Error, Result};
use crate::power::{coefficients, PowerContext};

use super::config::{ExperimentConfig, ExperimentKind};
use super::output::{fmt_f64, CsvTable};

/// The three typical tests and their proportions.
pub const TYPICAL_TESTS: [(&str, f64, f64); 3] = [("MLT", 0.0, 0.0), ("LRT", 0.5, 0.5), ("EST", 1.0, 1.0)];

fn expect(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if cfg.experiment != kind {
        return Err(Error::Config(format!("expected a {kind} config, got {}", cfg.experiment)));
    }
    cfg.validate()
}

/// Coefficients `ξ₀, ξ₁, ξ₂, K₁, K₂` for every `m` in `cfg.m_values` and
/// every `s` in the grid. A row whose quadrature fails carries `NaN`
/// values and the error text in `status`.
pub fn run_coefficient_tables(cfg: &ExperimentConfig) -> Result<CsvTable> {
    expect(cfg, ExperimentKind::Coeffs)?;
    let hash = cfg.hash();
    let mut table = CsvTable::new(&["m", "s", "xi0", "xi1", "xi2", "K1", "K2", "status"]);
    for &m in &cfg.m_values {
        let ctx = PowerContext::new(m as u32, cfg.alpha)?;
        for &s in &cfg.s_grid {
            let (values, status) = match coefficients(&ctx, s) {
                Ok(c) => ([c.xi0, c.xi1, c.xi2, c.k1, c.k2], "ok".to_string()),
                Err(e) => ([f64::NAN; 5], e.to_string()),
            };
            let mut row = vec![m.to_string(), fmt_f64(s)];
            row.extend(values.iter().map(|v| fmt_f64(*v)));
            row.push(status);
            table.push(cfg, &hash, row);
        }
    }
    Ok(table)
}

/// `ΔP₁(s; k₁)` and `ΔP₂(s; k₂)` of the MLT, LRT and EST at dimension `cfg.m`.
pub fn run_typical_losses(cfg: &ExperimentConfig) -> Result<CsvTable> {
    expect(cfg, ExperimentKind::Losscurves)?;
    let hash = cfg.hash();
    let ctx = PowerContext::new(cfg.m as u32, cfg.alpha)?;
    let mut table = CsvTable::new(&["m", "s", "test", "k1", "k2", "dP1", "dP2"]);
    for &s in &cfg.s_grid {
        let c = coefficients(&ctx, s)?;
        for (name, k1, k2) in TYPICAL_TESTS {
            let (d1, d2) = c.delta_p(k1, k2);
            table.push(
                cfg,
                &hash,
                vec![cfg.m.to_string(), fmt_f64(s), name.into(), fmt_f64(k1), fmt_f64(k2), fmt_f64(d1), fmt_f64(d2)],
            );
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Model;

    fn num(t: &CsvTable, row: usize, col: &str) -> f64 {
        t.rows[row][t.column(col).unwrap()].parse().unwrap()
    }

    #[test]
    fn coefficient_rows_start_at_zero() {
        let mut cfg = ExperimentConfig::paper(ExperimentKind::Coeffs, Model::Vmf);
        cfg.s_grid = vec![0.0, 1.0, 3.0];
        cfg.m_values = vec![2, 3];
        let t = run_coefficient_tables(&cfg).unwrap();
        assert_eq!(t.rows.len(), 6);
        for r in [0, 3] {
            for c in ["xi0", "xi1", "xi2"] {
                assert_eq!(num(&t, r, c), 0.0);
            }
        }
        for r in 0..6 {
            assert_eq!(t.rows[r][t.column("status").unwrap()], "ok");
            assert!(num(&t, r, "K1").is_finite() && num(&t, r, "K2").is_finite());
        }
        assert_eq!(t.to_bytes().unwrap(), run_coefficient_tables(&cfg).unwrap().to_bytes().unwrap());
    }

    #[test]
    fn loss_curves_are_nonnegative() {
        let mut cfg = ExperimentConfig::paper(ExperimentKind::Losscurves, Model::Vmf);
        cfg.s_grid = vec![0.5, 2.0, 4.0];
        let t = run_typical_losses(&cfg).unwrap();
        assert_eq!(t.rows.len(), 9);
        for r in 0..9 {
            assert!(num(&t, r, "dP1") >= -1e-12 && num(&t, r, "dP2") >= -1e-12);
        }
    }

    #[test]
    fn wrong_experiment_is_rejected() {
        let cfg = ExperimentConfig::paper(ExperimentKind::SeqSim, Model::Vmf);
        assert!(run_coefficient_tables(&cfg).is_err());
        assert!(run_typical_losses(&cfg).is_err());
    }
}
