use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

use takayama::report::Results;

fn takayama(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_takayama")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn survey(dir: &Path) -> String {
    let path = dir.join("survey.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "household_id,region,income,adult_equiv").unwrap();
    let incomes = [
        90_000.0, 120_000.0, 150_000.0, 60_000.0, 300_000.0, 110_000.0, 140_000.0, 80_000.0, 250_000.0, 95_000.0,
        130_000.0, 70_000.0,
    ];
    for (i, x) in incomes.iter().enumerate() {
        let region = if i % 3 == 0 { "north" } else { "south" };
        writeln!(f, "h{i},{region},{x},1").unwrap();
    }
    path.to_str().unwrap().to_string()
}

#[test]
fn help_and_version_exit_zero() {
    let out = takayama(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("simulate"));
    let out = takayama(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = takayama(&["index", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--bogus"));
    assert_eq!(takayama(&[]).status.code(), Some(1));
}

#[test]
fn index_prints_value_variance_and_interval() {
    let dir = tempfile::tempdir().unwrap();
    let input = survey(dir.path());
    let out = takayama(&["index", "--input", &input, "--poverty-line", "143080"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("Index(%)"), "{text}");
    assert!(text.contains("Asymptotic variance"), "{text}");
    assert!(text.contains("95% CI"), "{text}");
}

#[test]
fn missing_poverty_line_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = survey(dir.path());
    let out = takayama(&["index", "--input", &input]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("poverty line"));
}

#[test]
fn bad_data_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "household_id,income\nh1,abc\n").unwrap();
    let out = takayama(&["index", "--input", path.to_str().unwrap(), "--z", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row 2: income not numeric"));
    let out = takayama(&["index", "--input", "/nonexistent.csv", "--z", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let input = survey(dir.path());
    let config = dir.path().join("run.json");
    std::fs::write(&config, r#"{"poverty_line": 100000, "confidence_level": 0.9}"#).unwrap();
    let out = takayama(&["index", "--input", &input, "--config", config.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let Results::Index(r) = serde_json::from_slice(&out.stdout).unwrap() else { panic!() };
    assert_eq!(r.poverty_line, 100000.0);
    assert_eq!(r.interval.level, 0.9);
    let out = takayama(&[
        "index", "--input", &input, "--config", config.to_str().unwrap(), "--z", "143080", "--format", "json",
    ]);
    let Results::Index(r) = serde_json::from_slice(&out.stdout).unwrap() else { panic!() };
    assert_eq!(r.poverty_line, 143080.0);
    std::fs::write(&config, r#"{"povertyline": 1}"#).unwrap();
    let out = takayama(&["index", "--input", &input, "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn variance_with_bootstrap() {
    let dir = tempfile::tempdir().unwrap();
    let input = survey(dir.path());
    let out = takayama(&[
        "variance", "--input", &input, "--z", "143080", "--bootstrap", "200", "--seed", "4", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let Results::Index(r) = serde_json::from_slice(&out.stdout).unwrap() else { panic!() };
    assert!(r.bootstrap_variance.unwrap() > 0.0);
    let out = takayama(&["variance", "--input", &input, "--z", "143080", "--bootstrap", "50"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn decompose_prints_gap_table() {
    let dir = tempfile::tempdir().unwrap();
    let input = survey(dir.path());
    let out = takayama(&["decompose", "--input", &input, "--z", "143080", "--group-column", "region"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    for needle in ["north", "south", "Global", "Gap: gd_n", "Recomposed: T ="] {
        assert!(text.contains(needle), "{needle} missing from {text}");
    }
    let out = takayama(&["decompose", "--input", &input, "--z", "143080"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_reports_coverage_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("sim.json");
    let plot = dir.path().join("sim_plot.csv");
    let out = takayama(&[
        "simulate", "--model", "uniform:0,1", "--z", "1", "--n", "300", "--reps", "150", "--seed", "3",
        "--format", "json", "--output", report.to_str().unwrap(), "--plot-data", plot.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let Results::Simulation(sim) = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap() else {
        panic!()
    };
    assert_eq!(sim.records.len(), 150);
    assert!(sim.summary.coverage.unwrap() > 0.85);
    let plot = std::fs::read_to_string(&plot).unwrap();
    assert_eq!(plot.lines().count(), 151);

    let out = takayama(&["report", "--input", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("Coverage:"));
}

#[test]
fn simulate_rejects_bad_models_and_targets() {
    let out = takayama(&["simulate", "--model", "cauchy:0,1", "--z", "1", "--n", "10"]);
    assert_eq!(out.status.code(), Some(1));
    let out = takayama(&["simulate", "--model", "uniform:0,1", "--z", "1", "--n", "10", "--target", "gini"]);
    assert_eq!(out.status.code(), Some(1));
    let out = takayama(&["simulate", "--model", "uniform:0,1", "--z", "1", "--n", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn in_process_runner_matches_binary() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = takayama::cli::run(
        ["takayama", "simulate", "--model", "exponential:1", "--z", "1", "--n", "50", "--reps", "5", "--seed", "1"],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    let binary = takayama(&["simulate", "--model", "exponential:1", "--z", "1", "--n", "50", "--reps", "5", "--seed", "1"]);
    assert_eq!(out, binary.stdout);
}
