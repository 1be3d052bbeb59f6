use std::process::{Command, Output};

fn curvedseq(args: &[&str]) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_curvedseq"));
    c.args(args).env_remove("CURVEDSEQ_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    curvedseq(args).output().unwrap()
}

#[test]
fn coeffs_to_stdout() {
    let out = run(&["coeffs", "--m-values", "2,3", "--s-grid", "0,1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "schema_version,seed,config_hash,m,s,xi0,xi1,xi2,K1,K2,status");
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.starts_with("1,") && l.ends_with(",ok")));
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["losscurves", "--s-grid", "0.5,1.5,3"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn invalid_config_exits_with_2() {
    for args in [
        &["seq-sim", "--N", "0"][..],
        &["coeffs", "--alpha", "1.5"],
        &["run"],
        &["coeffs", "--experiment", "seq-sim"],
        &["nonseq-sim", "--model", "torus"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    let printed = run(&["nonseq-sim", "--model", "hyperboloid", "--print-config"]);
    assert!(printed.status.success());
    std::fs::write(&cfg, &printed.stdout).unwrap();

    let out = run(&["run", "--config", cfg.to_str().unwrap(), "--H1", "3", "--reps", "2", "--s-grid", "0,1", "--seed", "9"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = text.lines().skip(1);
    let first: Vec<&str> = rows.next().unwrap().split(',').collect();
    assert_eq!(first[1], "9");
    assert_eq!(first[3], "nonseq-sim");
    assert_eq!(first[4], "hyperboloid");
    assert_eq!(text.lines().count(), 1 + 2 * 7);
}

#[test]
fn out_dir_env_plot_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("coeffs.gp");
    let out = curvedseq(&["coeffs", "--m-values", "2", "--s-grid", "0,2", "--plot", plot.to_str().unwrap()])
        .env("CURVEDSEQ_OUT_DIR", dir.path().join("nested"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let csv = dir.path().join("nested/coeffs.csv");
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 3);
    let sidecar = std::fs::read_to_string(dir.path().join("nested/coeffs.csv.config.json")).unwrap();
    assert!(sidecar.contains("\"experiment\": \"coeffs\""));
    assert!(std::fs::read_to_string(&plot).unwrap().contains("coeffs.csv"));
}

#[test]
fn plot_without_file_output_is_rejected() {
    let out = run(&["coeffs", "--plot", "x.gp"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn worker_count_does_not_change_output() {
    let base = ["seq-sim", "--model", "hyperboloid", "--H1", "2", "--reps", "3", "--s-grid", "0,2", "--K", "20"];
    let one = run(&[&base[..], &["--workers", "1"]].concat());
    let three = run(&[&base[..], &["--workers", "3"]].concat());
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, three.stdout);
}
