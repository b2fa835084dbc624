use std::fs;

use loopwcs::cli::{parse_config, run_with_io, to_json, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE};
use loopwcs::cycles::CycleResult;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("loopwcs").chain(args.iter().copied());
    let code = run_with_io(argv, &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

const FAST: [&str; 4] = ["--nodes", "8", "--max-refinements", "1"];

#[test]
fn verify_reference_metrics() {
    let r = run(&["verify", "--metric", "flat_torus3", "--samples", "10"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    assert!(r.out.contains("PASS"));
    let r = run(&["verify", "--metric", "ypq", "--p", "7", "--q", "3", "--samples", "20"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
}

#[test]
fn invalid_pairs_and_unknown_metrics_are_usage_errors() {
    assert_eq!(run(&["verify", "--metric", "ypq", "--p", "3", "--q", "3"]).code, EXIT_USAGE);
    assert_eq!(run(&["verify", "--metric", "ypq", "--p", "7"]).code, EXIT_USAGE);
    assert_eq!(run(&["verify", "--metric", "klein_bottle"]).code, EXIT_USAGE);
    assert_eq!(run(&["wcs", "--metric", "ypq", "--p", "7", "--q", "3", "--action", "rotate:theta"]).code, EXIT_USAGE);
    assert_eq!(run(&["bogus"]).code, EXIT_USAGE);
}

#[test]
fn trivial_action_prints_zero() {
    let mut args = vec!["wcs", "--metric", "ypq", "--p", "7", "--q", "3", "--action", "trivial"];
    args.extend(FAST);
    let r = run(&args);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let res: CycleResult = serde_json::from_str(&r.out).unwrap();
    assert_eq!(res.value, 0.0);
}

#[test]
fn json_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("y73.json");
    let mut args = vec!["wcs", "--metric", "ypq", "--p", "7", "--q", "3", "--output", path.to_str().unwrap()];
    args.extend(FAST);
    let r = run(&args);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.contains("value"), "summary goes to stdout when --output is set: {}", r.out);
    let text = fs::read_to_string(&path).unwrap();
    let res: CycleResult = serde_json::from_str(&text).unwrap();
    assert_eq!(to_json(&res).trim_end(), text.trim_end());
    assert!(res.value < -6.8 && res.value > -6.9, "{}", res.value);
    let again: CycleResult = serde_json::from_str(&to_json(&res)).unwrap();
    assert_eq!(again.value.to_bits(), res.value.to_bits());
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["value", "pi4_multiple", "error_estimate", "node_counts", "wall_time", "provenance"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["orientation", "speed_convention", "normalization", "version", "parameters"] {
        assert!(v["provenance"].get(key).is_some(), "missing provenance.{key}");
    }
}

#[test]
fn csv_output_has_header_and_row() {
    let mut args = vec!["wcs", "--metric", "ypq", "--p", "7", "--q", "3", "--format", "csv"];
    args.extend(FAST);
    let r = run(&args);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let mut rd = csv::Reader::from_reader(r.out.as_bytes());
    let headers = rd.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "value"));
    assert_eq!(rd.records().count(), 1);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    assert_eq!(
        parse_config("# comment\nmetric = ypq\np=7\n\nq = 3\nmax_refinements = 1\n").unwrap().get("max-refinements"),
        Some(&"1".to_string())
    );
    assert!(parse_config("no equals sign").is_err());

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "metric = ypq\np = 7\nq = 5\nnodes = 8\nmax_refinements = 1\naction = trivial\n").unwrap();
    let r = run(&["wcs", "--config", cfg.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let res: CycleResult = serde_json::from_str(&r.out).unwrap();
    assert_eq!(res.value, 0.0);
    assert_eq!(res.provenance.parameters["q"], 5);

    // explicit flags override the file
    let r = run(&["wcs", "--config", cfg.to_str().unwrap(), "--q", "3", "--action", "rotate:alpha"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let res: CycleResult = serde_json::from_str(&r.out).unwrap();
    assert_eq!(res.provenance.parameters["q"], 3);
    assert!(res.value < -6.8);

    let missing = dir.path().join("absent.cfg");
    assert_eq!(run(&["wcs", "--config", missing.to_str().unwrap()]).code, EXIT_USAGE);
    fs::write(&cfg, "garbage line\n").unwrap();
    assert_eq!(run(&["wcs", "--config", cfg.to_str().unwrap()]).code, EXIT_USAGE);
}

#[test]
fn empty_sweeps_are_usage_errors() {
    assert_eq!(run(&["sweep", "--pairs", ""]).code, EXIT_USAGE);
    assert_eq!(run(&["sweep", "--a-grid", ""]).code, EXIT_USAGE);
    assert_eq!(run(&["sweep"]).code, EXIT_USAGE);
    assert_eq!(run(&["sweep", "--pairs", "7,3", "--scan-pmax", "9"]).code, EXIT_USAGE);
}

#[test]
fn scan_sweep_writes_csv_rows_for_exact_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let mut args = vec!["sweep", "--scan-pmax", "7", "--output", path.to_str().unwrap()];
    args.extend(FAST);
    let r = run(&args);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    let mut rd = csv::Reader::from_path(&path).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    let pairs: Vec<(String, String)> = rows.iter().map(|r| (r[1].to_string(), r[2].to_string())).collect();
    assert_eq!(pairs, [("7".to_string(), "3".to_string()), ("7".to_string(), "5".to_string())]);
    assert!(rows.iter().all(|r| !r[6].is_empty()), "exact pairs carry a rational multiple");
}

#[test]
fn a_sweep_with_a_bad_point_reports_failure() {
    let mut args = vec!["sweep", "--a-grid", "0.9,1.0"];
    args.extend(FAST);
    let r = run(&args);
    assert_eq!(r.code, EXIT_NUMERIC, "{}{}", r.out, r.err);
    assert!(r.out.contains("fitted_exponent") || r.out.contains("a=1"), "{}", r.out);
}

#[test]
fn selftest_passes_and_detects_an_injected_fault() {
    let r = run(&["selftest"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    assert!(r.out.lines().filter(|l| l.contains("PASS")).count() >= 10, "{}", r.out);
    let r = run(&["selftest", "--inject-fault", "riemann-sign"]);
    assert_eq!(r.code, EXIT_NUMERIC);
    assert!(r.out.contains("first bianchi"), "{}", r.out);
}
