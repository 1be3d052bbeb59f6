//! Maximum likelihood estimation, fixed-sample tests and the sequential test.

mod nonseq;
mod sequential;
mod stats;

pub use nonseq::{coordinate_delta, nonseq_statistic, TestDesign, TestOutcome, TestVariant};
pub use sequential::{calibrate_epsilon, sequential_run, Calibration, SequentialPlan, StoppingConfig};
pub use stats::{coordinates_of, mle, observed_mean_curvature, observed_mean_curvature_at_mle, SuffStats};
