use std::path::Path;
use std::process::{Command, Output};

use fleetcg_cli::{read_trace_csv, RunReport};

fn fleetcg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fleetcg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path, tours: usize, seed: u64) -> std::path::PathBuf {
    let path = dir.join(format!("inst{tours}_{seed}.json"));
    let out = fleetcg(&[
        "generate",
        "--tours",
        &tours.to_string(),
        "--models",
        "5",
        "--allowed",
        "3",
        "--seed",
        &seed.to_string(),
        "-o",
        s(&path),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn generate_writes_a_valid_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), 32, 1);
    let inst = fleetcg::read_instance(&path).unwrap();
    assert_eq!(inst.n_tours(), 32);
    assert_eq!(inst.n_models(), 5);
    assert!(inst.tours.iter().all(|t| t.allowed_models.len() == 3));
}

#[test]
fn generate_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = fleetcg(&["generate", "--tours", "4", "--models", "2", "--allowed", "1"]);
    assert_eq!(missing.status.code(), Some(2));
    let out = dir.path().join("x.json");
    let too_many = fleetcg(&["generate", "--tours", "4", "--models", "5", "--allowed", "6", "-o", s(&out)]);
    assert_eq!(too_many.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn solve_defaults_at_32_tours() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), 32, 3);
    let report_path = dir.path().join("run.json");
    let out = fleetcg(&["solve", s(&inst), "--seed", "1", "-o", s(&report_path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = RunReport::read(&report_path).unwrap();
    assert_eq!(report.config.penalty, Some(10.0));
    assert_eq!((report.config.ga_population, report.config.ga_iterations), (20, 50));
    assert_eq!(report.qubits, 6);
    assert!(report.rounded_objective >= report.lp_objective - 1e-9);
    let rows = read_trace_csv(&report_path.with_extension("csv")).unwrap();
    assert_eq!(rows, report.trace);
    let text = std::fs::read_to_string(&report_path).unwrap();
    assert_eq!(serde_json::from_str::<RunReport>(&text).unwrap(), report);
}

#[test]
fn solve_defaults_at_64_tours() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), 64, 4);
    let report_path = dir.path().join("run.json");
    // Classical mode keeps the test quick; the echo still shows the defaults.
    let out = fleetcg(&["solve", s(&inst), "--mode", "classical", "-o", s(&report_path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = RunReport::read(&report_path).unwrap();
    assert_eq!(report.config.penalty, Some(20.0));
    assert_eq!((report.config.ga_population, report.config.ga_iterations), (40, 100));
    assert_eq!(report.qubits, 7);
    assert_eq!(report.quantum_success_pct, 0.0);
}

#[test]
fn sampled_solve_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), 10, 5);
    let report_path = dir.path().join("run.json");
    let trace_path = dir.path().join("trace.csv");
    let out = fleetcg(&[
        "solve", s(&inst), "--expectation", "sampled", "--shots", "200", "--ga-pop", "10",
        "--ga-iters", "15", "--penalty", "7.5", "-o", s(&report_path), "--trace", s(&trace_path),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = RunReport::read(&report_path).unwrap();
    assert_eq!(report.config.expectation, "sampled");
    assert_eq!(report.config.shots, Some(200));
    assert_eq!(report.config.penalty, Some(7.5));
    assert_eq!(read_trace_csv(&trace_path).unwrap().len(), report.trace.len());
}

#[test]
fn shots_without_sampling_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), 4, 0);
    let out = fleetcg(&["solve", s(&inst), "--shots", "10", "-o", s(&dir.path().join("r.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn abort_keeps_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), 16, 2);
    let report_path = dir.path().join("run.json");
    let out = fleetcg(&[
        "solve", s(&inst), "--mode", "classical", "--max-iterations", "1", "-o", s(&report_path),
    ]);
    assert!(!out.status.success());
    assert!(!report_path.exists());
    assert_eq!(read_trace_csv(&report_path.with_extension("csv")).unwrap().len(), 1);
}

#[test]
fn missing_instance_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = fleetcg(&["solve", s(&dir.path().join("nope.json")), "-o", s(&dir.path().join("r.json"))]);
    assert!(!out.status.success());
}

#[test]
fn report_aggregates_by_size() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for (tours, seed) in [(12, 0), (12, 1), (16, 2)] {
        let inst = generate(dir.path(), tours, seed);
        let rp = dir.path().join(format!("r{seed}.json"));
        let out = fleetcg(&["solve", s(&inst), "--seed", &seed.to_string(), "-o", s(&rp)]);
        assert!(out.status.success());
        paths.push(rp);
    }
    let summary_path = dir.path().join("summary.json");
    let series_path = dir.path().join("series.csv");
    let mut args = vec!["report"];
    args.extend(paths.iter().map(|p| s(p)));
    args.extend(["-o", s(&summary_path), "--series", s(&series_path)]);
    let out = fleetcg(&args);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("several instance sizes"));
    let summary: fleetcg_cli::Summary =
        serde_json::from_str(&std::fs::read_to_string(&summary_path).unwrap()).unwrap();
    assert!(summary.mixed_sizes);
    let counts: Vec<(usize, usize)> = summary.rows.iter().map(|r| (r.instance_size, r.count)).collect();
    assert_eq!(counts, vec![(12, 2), (16, 1)]);
    let expected: f64 = paths[..2]
        .iter()
        .map(|p| RunReport::read(p).unwrap().quantum_success_pct)
        .sum::<f64>()
        / 2.0;
    assert!((summary.rows[0].mean_quantum_pct - expected).abs() < 1e-12);
    assert!(std::fs::read_to_string(&series_path).unwrap().lines().count() > 3);

    let empty = fleetcg(&["report"]);
    assert!(!empty.status.success());
}
