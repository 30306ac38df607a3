use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn igei(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_igei"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn demo_prints_the_fictional_comparison() {
    let out = igei(&["demo"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for row in [
        "A         0.10  0.30   0.20  12.00  18.18",
        "C         0.40  0.60   0.50  45.00  57.14",
        "E         0.80  1.00   0.90  89.00  88.89",
    ] {
        assert!(text.contains(row), "{text}");
    }
}

#[test]
fn verify_passes_and_flags_the_released_index() {
    let out = igei(&["verify"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("KNOWN-DEVIATION  index-released/Provincia Autonoma di Trento"));
    assert!(text.contains("known deviations, 0 failed"), "{text}");
    assert!(!text.lines().any(|l| l.starts_with("FAIL")));

    let json: serde_json::Value = serde_json::from_slice(&igei(&["verify", "--format", "json"]).stdout).unwrap();
    assert_eq!(json["passed"], true);
}

#[test]
fn aggregate_reproduces_released_domains() {
    let out = igei(&["aggregate", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let trento: Vec<&str> = text
        .lines()
        .find(|l| l.starts_with("Provincia Autonoma di Trento,"))
        .unwrap()
        .split(',')
        .collect();
    let col = |name: &str| -> f64 { trento[header.iter().position(|h| *h == name).unwrap()].parse().unwrap() };
    for (domain, value) in [("work", 69.325), ("economy", 73.619), ("health", 90.327)] {
        assert!((col(domain) - value).abs() <= 0.002, "{domain}");
    }
    assert!((col("index") - 73.184).abs() <= 0.005);
}

#[test]
fn score_reads_observations_in_both_number_formats() {
    let spec = fixture("fictional_spec.toml");
    let data = fixture("fictional_countries.csv");
    let out = igei(&["score", "--spec", &spec, "--data", &data, "--format", "json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = json["territories"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[2]["territory"], "C");
    assert!((rows[2]["index"].as_f64().unwrap() - 57.142857).abs() < 1e-5);

    let dir = tempfile::tempdir().unwrap();
    let comma = dir.path().join("comma.csv");
    std::fs::write(
        &comma,
        std::fs::read_to_string(&data).unwrap().replace(',', ";").replace("0.", "0,").replace("1.0", "1,0"),
    )
    .unwrap();
    let comma = comma.display().to_string();
    let out = igei(&["score", "--spec", &spec, "--data", &comma, "--decimal-comma", "--format", "csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("C;57,14285714285"), "{}", stdout(&out));
}

#[test]
fn invalid_data_exits_with_findings() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(
        &path,
        "territory,indicator,period,kind,x_w,x_m,x_a,value\nA,X,2020,standard,0.1,0.3,0.2,\nB,X,2020,standard,0,0,0.5,\n",
    )
    .unwrap();
    let out = igei(&["score", "--spec", &fixture("fictional_spec.toml"), "--data", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("error: B/X/2020: x_w and x_m are both zero"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn unreadable_input_is_a_usage_failure() {
    let out = igei(&["score", "--data", "/nonexistent/obs.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/nonexistent/obs.csv"));
    assert_eq!(igei(&["score"]).status.code(), Some(2));
}

#[test]
fn report_is_deterministic_and_can_be_written_to_a_file() {
    let first = igei(&["report"]);
    assert!(first.status.success());
    assert_eq!(first.stdout, igei(&["report"]).stdout);
    let text = stdout(&first);
    let top = text.lines().find(|l| l.trim_start().starts_with("1 ")).unwrap();
    assert!(top.contains("Provincia Autonoma di Trento") && top.ends_with("73.18"), "{top}");
    assert!(!text.lines().any(|l| l.contains("Italia")), "aggregates are not ranked");
    assert!(text.contains("index      21  62.13"), "{text}");

    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.csv");
    let out = igei(&["report", "--format", "csv", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(out_path).unwrap();
    assert!(csv.starts_with("table,row,column,value\nRanking,1,territory,Provincia Autonoma di Trento\n"));
}

#[test]
fn report_scores_observation_files_and_honours_scope() {
    let args = [
        "report",
        "--spec",
        &fixture("fictional_spec.toml"),
        "--data",
        &fixture("fictional_countries.csv"),
    ];
    let out = igei(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("correlations unavailable"), "{text}");

    let mut scoped = args.to_vec();
    scoped.extend(["--scope", "B,D,E"]);
    let text = stdout(&igei(&scoped));
    let ranked: Vec<&str> = text
        .lines()
        .skip_while(|l| !l.starts_with("Ranking"))
        .skip(3)
        .take_while(|l| !l.is_empty())
        .collect();
    assert_eq!(ranked.len(), 3, "{text}");
    assert!(ranked[0].contains(" E "), "{text}");
}
