use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use curvedseq::geometry::Model;
use curvedseq::harness::{plot_script, resolve_output, run_experiment, ExperimentConfig, ExperimentKind};
use curvedseq::Error;

/// Power theory and Monte Carlo experiments for sequential tests in curved
/// exponential families.
#[derive(Parser, Debug)]
#[command(name = "curvedseq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Power-loss coefficients and optimal proportions over m and s.
    Coeffs(Overrides),
    /// Loss curves of the MLT, LRT and EST.
    Losscurves(Overrides),
    /// Fixed-sample power simulation.
    NonseqSim(Overrides),
    /// Sequential against fixed-sample power simulation.
    SeqSim(Overrides),
    /// Monte Carlo calibration of the sequential critical radius.
    Calibrate(Overrides),
    /// Runs the experiment named by --experiment or the config file.
    Run(Overrides),
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    /// vmf or hyperboloid.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// Null point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    u0: Option<Vec<f64>>,
    /// Distances, comma separated and ascending.
    #[arg(long = "s-grid", value_delimiter = ',')]
    s_grid: Option<Vec<f64>>,
    /// Dimensions for the coefficient table, comma separated.
    #[arg(long = "m-values", value_delimiter = ',')]
    m_values: Option<Vec<usize>>,
    #[arg(long = "H1")]
    h1: Option<usize>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "K")]
    k: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Calibrate the critical radius before a sequential simulation.
    #[arg(long)]
    calibrate: bool,
    #[arg(long = "calibration-reps")]
    calibration_reps: Option<usize>,
    /// Output CSV; defaults to $CURVEDSEQ_OUT_DIR/<experiment>.csv, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script for the CSV here.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Print the effective config as JSON and exit.
    #[arg(long = "print-config")]
    print_config: bool,
}

fn build_config(kind: Option<ExperimentKind>, o: &Overrides) -> Result<ExperimentConfig, Error> {
    let model: Option<Model> = o.model.as_deref().map(str::parse).transpose()?;
    let flag_kind: Option<ExperimentKind> = o.experiment.as_deref().map(str::parse).transpose()?;
    let mut cfg = match &o.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let kind = kind.or(flag_kind).ok_or_else(|| Error::Config("no experiment given".into()))?;
            ExperimentConfig::paper(kind, model.unwrap_or(Model::Vmf))
        }
    };
    if let Some(k) = kind.or(flag_kind) {
        if let (Some(a), Some(b)) = (kind, flag_kind) {
            if a != b {
                return Err(Error::Config(format!("subcommand {a} conflicts with --experiment {b}")));
            }
        }
        cfg.experiment = k;
    }
    if let Some(m) = model {
        cfg.model = m;
    }
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = &o.$field { cfg.$field = v.clone(); } )* };
    }
    set!(m, alpha, r, u0, s_grid, m_values, h1, n, k, reps, seed, workers, calibration_reps);
    if o.calibrate {
        cfg.calibrate = true;
    }
    if o.out.is_some() {
        cfg.out = o.out.clone();
    }
    if cfg.u0.len() != cfg.m && o.u0.is_none() {
        return Err(Error::Config(format!("u0 has {} coordinates but m = {}; pass --u0", cfg.u0.len(), cfg.m)));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    let (kind, o) = match cli.command {
        Command::Coeffs(o) => (Some(ExperimentKind::Coeffs), o),
        Command::Losscurves(o) => (Some(ExperimentKind::Losscurves), o),
        Command::NonseqSim(o) => (Some(ExperimentKind::NonseqSim), o),
        Command::SeqSim(o) => (Some(ExperimentKind::SeqSim), o),
        Command::Calibrate(o) => (Some(ExperimentKind::Calibrate), o),
        Command::Run(o) => (None, o),
    };
    let cfg = build_config(kind, &o)?;
    if o.print_config {
        println!("{}", cfg.to_json());
        return Ok(());
    }
    let table = run_experiment(&cfg)?;
    let bytes = table.to_bytes()?;
    match resolve_output(&cfg) {
        Some(path) => {
            table.write(&path)?;
            let mut sidecar = path.clone().into_os_string();
            sidecar.push(".config.json");
            std::fs::write(&sidecar, cfg.to_json())?;
            if let Some(script) = &o.plot {
                std::fs::write(script, plot_script(&cfg, &path))?;
            }
            eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
        }
        None => {
            if o.plot.is_some() {
                return Err(Error::Config("--plot needs a file output (--out or CURVEDSEQ_OUT_DIR)".into()));
            }
            std::io::stdout().write_all(&bytes)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
