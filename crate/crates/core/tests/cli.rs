//! End-to-end runs of the `ctcsim` binary against the bundled fixtures.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use ctcsim::counterfactual::{PiecemealRow, SweepRow};
use ctcsim::money::Money;
use ctcsim::output::{parse, ClassifyRow, Format, RegressionRow, ThresholdRow};
use ctcsim::params::ParentalGroup;

fn ctcsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctcsim"))
        .args(args)
        .env("CTCSIM_DATA_DIR", common::data_dir())
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = ctcsim(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn thresholds_example_row() {
    let text = stdout_of(&[
        "thresholds",
        "--scenario",
        "s1",
        "--year",
        "2009",
        "--group",
        "single_mother",
    ]);
    let rows: Vec<ThresholdRow> = parse(&text, Format::Csv).unwrap();
    assert_eq!(rows.len(), 1);
    let near = |m: Money, d: i64| (m.cents() - d * 100).abs() <= 5_000;
    assert!(near(rows[0].t_full_actc, 9_667));
    assert!(near(rows[0].t_full_ctc, 25_650));
}

#[test]
fn io_failures_exit_2_and_validation_failures_exit_1() {
    let missing = ctcsim(&["thresholds", "--params", "/definitely/not/here.json"]);
    assert_eq!(missing.status.code(), Some(2));
    let bad_year = ctcsim(&["thresholds", "--year", "1999"]);
    assert_eq!(bad_year.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_year.stderr).contains("1999"));
    let bad_flag = ctcsim(&["thresholds", "--scenario", "s9"]);
    assert_eq!(bad_flag.status.code(), Some(1));
    let bad_override = ctcsim(&["thresholds", "--set", "actc_per_child=5000"]);
    assert_eq!(bad_override.status.code(), Some(1));
}

#[test]
fn classify_matches_golden_file() {
    let text = stdout_of(&["classify", "--scenario", "s1"]);
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/classify_s1.csv");
    if std::env::var_os("CTCSIM_UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &text).unwrap();
    }
    let expected = std::fs::read_to_string(&golden).expect("golden file present");
    assert!(
        text == expected,
        "classify output differs from {}",
        golden.display()
    );
    let rows: Vec<ClassifyRow> = parse(&text, Format::Csv).unwrap();
    assert_eq!(rows.len(), 16 * 3 * 6);
}

#[test]
fn sweep_has_32_rows_per_group_and_never_rises() {
    let text = stdout_of(&[
        "sweep",
        "--credits",
        "500:3600:100",
        "--year",
        "2018",
        "--scenario",
        "s1",
    ]);
    let rows: Vec<SweepRow> = parse(&text, Format::Csv).unwrap();
    for group in ParentalGroup::ALL {
        let series: Vec<f64> = rows
            .iter()
            .filter(|r| r.group == group)
            .map(|r| r.proportion)
            .collect();
        assert_eq!(series.len(), 32);
        assert!(series.windows(2).all(|w| w[1] <= w[0]), "{group}");
    }
}

#[test]
fn piecemeal_1a_has_eight_steps_per_group() {
    let text = stdout_of(&["piecemeal", "--table", "1a"]);
    let rows: Vec<PiecemealRow> = parse(&text, Format::Csv).unwrap();
    assert_eq!(rows.len(), 8 * 3);
    assert_eq!(rows.iter().map(|r| r.step).max(), Some(8));
}

#[test]
fn json_and_csv_carry_the_same_rows() {
    let csv = stdout_of(&["classify", "--scenario", "s2", "--years", "2010:2012"]);
    let json = stdout_of(&[
        "classify",
        "--scenario",
        "s2",
        "--years",
        "2010:2012",
        "--format",
        "json",
    ]);
    let a: Vec<ClassifyRow> = parse(&csv, Format::Csv).unwrap();
    let b: Vec<ClassifyRow> = parse(&json, Format::Json).unwrap();
    assert_eq!(a, b);
}

#[test]
fn regressions_run_from_the_command_line() {
    let fe: Vec<RegressionRow> =
        parse(&stdout_of(&["regress", "--scenario", "s1"]), Format::Csv).unwrap();
    assert_eq!(fe.len(), 45);
    assert_eq!(fe[0].r_squared, Some(1.0));
    let did: Vec<RegressionRow> =
        parse(&stdout_of(&["did", "--scenario", "s2"]), Format::Csv).unwrap();
    assert_eq!(
        did.iter().map(|r| r.term.as_str()).collect::<Vec<_>>(),
        ["Constant", "Treated", "Post", "Treated*Post"]
    );
    assert_eq!(did[0].n, 32);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "scenario = \"s2\"\nformat = \"json\"\nyears = \"2011:2011\"\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let json: Vec<ThresholdRow> =
        parse(&stdout_of(&["thresholds", "--config", cfg]), Format::Json).unwrap();
    assert_eq!(json.len(), 3);
    assert!(json
        .iter()
        .all(|r| r.year == 2011 && r.scenario == ctcsim::classifier::Scenario::S2));
    let csv: Vec<ThresholdRow> = parse(
        &stdout_of(&[
            "thresholds",
            "--config",
            cfg,
            "--format",
            "csv",
            "--scenario",
            "s1",
        ]),
        Format::Csv,
    )
    .unwrap();
    assert!(csv
        .iter()
        .all(|r| r.scenario == ctcsim::classifier::Scenario::S1));
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let printed = stdout_of(&["thresholds", "--out", out.to_str().unwrap()]);
    assert!(printed.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<ThresholdRow> = parse(&text, Format::Csv).unwrap();
    assert_eq!(rows.len(), 16 * 3);
}

#[test]
fn report_is_byte_identical_across_runs() {
    for format in ["csv", "json"] {
        let a = stdout_of(&["report", "--format", format]);
        let b = stdout_of(&["report", "--format", format]);
        assert!(!a.is_empty());
        assert!(a == b, "{format} report differs between runs");
    }
}
