use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("rzchart").chain(args.iter().copied());
    let code = rzchart_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

const MUESLI: &[&str] = &[
    "--side", "upper", "--n", "5", "--gamma-x", "0.02", "--gamma-y", "0.01", "--rho0", "0.8", "--I", "15",
];

fn args(parts: &[&[&str]]) -> Vec<String> {
    parts.concat().into_iter().map(String::from).collect()
}

fn run_owned(args: &[String]) -> (i32, String, String) {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(&refs)
}

#[test]
fn design_prints_four_decimal_limit() {
    let (code, out, _) = run_owned(&args(&[&["design"], MUESLI]));
    assert_eq!(code, 0);
    let ucl = out.lines().find(|l| l.starts_with("ucl")).unwrap();
    assert_eq!(ucl.split_whitespace().nth(1), Some("1.0142"));
}

#[test]
fn design_json_round_trips() {
    let (code, out, _) = run_owned(&args(&[&["design"], MUESLI, &["--format", "json"]]));
    assert_eq!(code, 0);
    let cfg: rzchart::design::ChartConfig = serde_json::from_str(&out).unwrap();
    assert!((cfg.ucl - 1.01421).abs() < 5e-4);
    assert!(cfg.validate().is_ok());
}

#[test]
fn negative_correlation_is_accepted() {
    let (code, out, err) = run(&[
        "design", "--side", "lower", "--n", "5", "--gamma-x", "0.2", "--gamma-y", "0.2", "--rho0", "-0.4", "--I", "30",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("rho0          -0.4"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["design", "--help"]).0, 0);
    assert_eq!(run(&["--version"]).0, 0);
    assert_eq!(run(&[]).0, 1);
    assert_eq!(run(&["design", "--side", "upper"]).0, 1);
    assert_eq!(run(&["design", "--side", "middle", "--n", "5", "--gamma-x", "0.1", "--gamma-y", "0.1", "--rho0", "0", "--I", "10"]).0, 1);
    let (code, _, err) = run(&[
        "design", "--side", "upper", "--n", "5", "--gamma-x", "0.1", "--gamma-y", "0.1", "--rho0", "1", "--I", "10",
    ]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"), "{err}");
    let (code, _, err) = run(&[
        "design", "--side", "upper", "--n", "1", "--gamma-x", "0.5", "--gamma-y", "0.5", "--rho0", "0", "--I", "1000",
    ]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn tarl_rows_are_sorted_and_deduplicated() {
    let (code, out, _) = run_owned(&args(&[&["tarl"], MUESLI, &["--taus", "1.05,1.01,1.05"]]));
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "tau,rho1,alpha,beta,tarl1");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1.01,"));
    assert!(lines[2].starts_with("1.05,"));
    let t: Vec<f64> = lines[1..].iter().map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(t[0] > t[1], "larger shift must be detected sooner: {t:?}");
}

#[test]
fn limits_table_matches_reference() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("limits.csv");
    let (code, out, _) = run(&["tables", "--which", "limits", "--I", "10", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 100);
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), ["gamma_x", "gamma_y", "rho0", "n", "I", "lcl", "ucl"]);
}

#[test]
fn tables_are_byte_identical_across_runs() {
    let a = run(&["tables", "--which", "tarl", "--I", "10"]);
    let b = run(&["tables", "--which", "tarl", "--I", "10"]);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
}

#[test]
fn monitor_replays_unit_data() {
    let dir = tempfile::tempdir().unwrap();
    let chart = dir.path().join("chart.json");
    fs::write(
        &chart,
        r#"{"side":"upper","n":5,"gamma_x":0.02,"gamma_y":0.01,"z0":1.0,"rho0":0.8,"horizon_inspections":15}"#,
    )
    .unwrap();
    let state = dir.path().join("state.json");
    let samples = data("muesli_run.csv");
    let args = [
        "monitor",
        "--chart",
        chart.to_str().unwrap(),
        "--samples",
        samples.to_str().unwrap(),
        "--state",
        state.to_str().unwrap(),
    ];
    let (code, out, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().filter(|l| l.ends_with(",yes")).count(), 2);
    assert!(out.contains("# signals: 11,12"));
    let saved: rzchart::ChartState = serde_json::from_slice(&fs::read(&state).unwrap()).unwrap();
    assert_eq!(saved.records.len(), 15);
    assert_eq!(run(&args).1, out, "text output must not depend on wall-clock time");
}

#[test]
fn monitor_rejects_bad_samples() {
    let dir = tempfile::tempdir().unwrap();
    let chart = dir.path().join("chart.json");
    fs::write(
        &chart,
        r#"{"side":"upper","n":2,"gamma_x":0.02,"gamma_y":0.01,"rho0":0.8,"horizon_inspections":5}"#,
    )
    .unwrap();
    let samples = dir.path().join("bad.csv");
    fs::write(&samples, "inspection,label,x,y\n1,a,1.0,0.0\n1,a,1.0,-0.5\n").unwrap();
    let (code, _, err) = run(&["monitor", "--chart", chart.to_str().unwrap(), "--samples", samples.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"));
    let (code, _, _) = run(&["monitor", "--chart", "/nonexistent.json", "--samples", samples.to_str().unwrap()]);
    assert_eq!(code, 1);
}

#[test]
fn simulate_is_seeded() {
    let argv = args(&[&["simulate"], MUESLI, &["--tau", "1.01", "--replications", "4000", "--seed", "7"]]);
    let (code, a, _) = run_owned(&argv);
    assert_eq!(code, 0);
    assert_eq!(run_owned(&argv).1, a);
    assert!(a.contains("replications     4000"));
    assert!(a.lines().last().unwrap().starts_with("PASS"), "{a}");
}

#[test]
fn binary_matches_library_entry_point() {
    let output = Command::new(env!("CARGO_BIN_EXE_rzchart"))
        .args(args(&[&["design"], MUESLI]))
        .output()
        .unwrap();
    assert!(output.status.success());
    assert_eq!(String::from_utf8(output.stdout).unwrap(), run_owned(&args(&[&["design"], MUESLI])).1);
    let output = Command::new(env!("CARGO_BIN_EXE_rzchart")).arg("bogus").output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}
