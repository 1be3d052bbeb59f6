//! Experiment configuration, parallel Monte Carlo runs and CSV output.

pub mod alternatives;
pub mod config;
pub mod output;
pub mod simulate;
pub mod tables;

pub use alternatives::{alternatives, unit_directions};
pub use config::{linear_grid, ExperimentConfig, ExperimentKind};
pub use output::{plot_script, resolve_output, CsvTable, OUT_DIR_ENV, SCHEMA_VERSION};
pub use simulate::{
    calibration_table, run_calibration, run_nonseq_experiment, run_seq_experiment, sequential_plan, with_workers,
    PowerRow, SimulationReport, MAX_TRUNCATION, NONSEQ_TESTS, SEQ_TESTS,
};
pub use tables::{run_coefficient_tables, run_typical_losses, TYPICAL_TESTS};

use crate::error::Result;

/// Runs whichever experiment `cfg` names and returns its table.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<CsvTable> {
    match cfg.experiment {
        ExperimentKind::Coeffs => run_coefficient_tables(cfg),
        ExperimentKind::Losscurves => run_typical_losses(cfg),
        ExperimentKind::NonseqSim => Ok(run_nonseq_experiment(cfg)?.to_table()),
        ExperimentKind::SeqSim => Ok(run_seq_experiment(cfg)?.to_table()),
        ExperimentKind::Calibrate => Ok(calibration_table(cfg, &run_calibration(cfg)?)),
    }
}
