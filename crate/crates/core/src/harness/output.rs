//! CSV tables and gnuplot scripts.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::config::{ExperimentConfig, ExperimentKind};

/// Bumped whenever a column is added, removed or reinterpreted.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "CURVEDSEQ_OUT_DIR";

/// An in-memory CSV table. Every row starts with the provenance columns
/// `schema_version, seed, config_hash`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-trip decimal form, so re-parsing recovers the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        let mut header: Vec<String> = ["schema_version", "seed", "config_hash"].iter().map(|s| s.to_string()).collect();
        header.extend(columns.iter().map(|s| s.to_string()));
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, cfg: &ExperimentConfig, hash: &str, values: Vec<String>) {
        let mut row = vec![SCHEMA_VERSION.to_string(), cfg.seed.to_string(), hash.to_string()];
        row.extend(values);
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { header, rows })
    }
}

/// Default file name for an experiment's CSV.
pub fn default_file_name(cfg: &ExperimentConfig) -> String {
    match cfg.experiment {
        ExperimentKind::Coeffs | ExperimentKind::Losscurves => format!("{}.csv", cfg.experiment),
        _ => format!("{}-{}.csv", cfg.experiment, cfg.model),
    }
}

/// Output path: the configured path, else the environment directory joined
/// with the default name, else `None` (standard output).
pub fn resolve_output(cfg: &ExperimentConfig) -> Option<PathBuf> {
    if let Some(p) = &cfg.out {
        return Some(p.clone());
    }
    std::env::var_os(OUT_DIR_ENV)
        .filter(|d| !d.is_empty())
        .map(|d| PathBuf::from(d).join(default_file_name(cfg)))
}

fn quoted(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', "''"))
}

/// A gnuplot script that plots `csv` for the experiment in `cfg`.
pub fn plot_script(cfg: &ExperimentConfig, csv: &Path) -> String {
    let file = quoted(csv);
    let mut out = String::from("set datafile separator ','\nset key autotitle columnhead outside\nset xlabel 's'\nset grid\n");
    match cfg.experiment {
        ExperimentKind::Coeffs => {
            out.push_str("set ylabel 'coefficient'\n");
            for (col, name) in [(6, "xi0"), (7, "xi1"), (8, "xi2"), (9, "K1"), (10, "K2")] {
                out.push_str(&format!("set title '{name}'\nplot "));
                let series: Vec<String> = cfg
                    .m_values
                    .iter()
                    .map(|m| format!("{file} using 5:($4=={m} ? ${col} : 1/0) with lines title 'm={m}'"))
                    .collect();
                out.push_str(&series.join(", \\\n     "));
                out.push_str("\npause -1\n");
            }
        }
        ExperimentKind::Losscurves => {
            for (col, name) in [(9, "dP1"), (10, "dP2")] {
                out.push_str(&format!("set title '{name}'\nplot "));
                let series: Vec<String> = ["MLT", "LRT", "EST"]
                    .iter()
                    .map(|t| format!("{file} using 5:(strcol(6) eq '{t}' ? ${col} : 1/0) with lines title '{t}'"))
                    .collect();
                out.push_str(&series.join(", \\\n     "));
                out.push_str("\npause -1\n");
            }
        }
        ExperimentKind::NonseqSim | ExperimentKind::SeqSim => {
            let tests: &[&str] = if cfg.experiment == ExperimentKind::SeqSim {
                &["CMLT", "OMLT", "OLRT", "OEST"]
            } else {
                &["MLT", "LRT", "EST", "DMLT", "DLRT", "DEST", "SEFF"]
            };
            let diff = if cfg.experiment == ExperimentKind::SeqSim { "DP" } else { "loss" };
            out.push_str("set title 'power'\nset yrange [0:1]\nplot ");
            let series: Vec<String> = tests
                .iter()
                .map(|t| format!("{file} using 6:(strcol(7) eq '{t}' ? $10 : 1/0) with linespoints title '{t}'"))
                .collect();
            out.push_str(&series.join(", \\\n     "));
            out.push_str(&format!("\npause -1\nset title '{diff}'\nset autoscale y\nplot "));
            let series: Vec<String> = tests
                .iter()
                .filter(|t| **t != "CMLT" && **t != "SEFF")
                .map(|t| format!("{file} using 6:(strcol(7) eq '{t}' ? $12 : 1/0):13 with yerrorlines title '{t}'"))
                .collect();
            out.push_str(&series.join(", \\\n     "));
            out.push_str("\npause -1\n");
        }
        ExperimentKind::Calibrate => {
            out.push_str("# calibration output is a single row; nothing to plot\n");
        }
    }
    out
}
