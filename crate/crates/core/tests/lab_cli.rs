//! Run configs, CSV metadata headers and the `germlab` binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use germlab::lab::{self, Overrides, RunConfig, EXIT_CONFIG, EXIT_OK};
use germlab::parallel::Execution;

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn golden(name: &str) -> Vec<String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

fn small_origin_column() -> RunConfig {
    let mut cfg = RunConfig::from_path(&config_path("origin-column.json")).unwrap();
    cfg.experiments.retain(|e| e.name == "origin-column");
    cfg.apply(&Overrides { replicas: Some(200), ..Default::default() });
    cfg
}

fn germlab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_germlab")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn shipped_configs_parse() {
    for name in ["origin-column.json", "tree-suite.json"] {
        let cfg = RunConfig::from_path(&config_path(name)).unwrap();
        assert!(!cfg.experiments.is_empty(), "{name}");
    }
}

#[test]
fn headers_match_golden_and_echo_round_trips() {
    let cfg = small_origin_column();
    let dir = tempfile::tempdir().unwrap();
    let outcome = lab::run(&cfg, dir.path(), Execution::Sequential).unwrap();
    assert_eq!(outcome.exit_code, EXIT_OK);

    let header = lab::read_header(&dir.path().join("origin-column.csv")).unwrap();
    assert_eq!(header, golden("origin-column.header"));
    let summary = lab::read_header(&dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary, golden("summary.header"));

    // The echoed experiment parses back to the same experiment.
    let echo = header.iter().find_map(|l| l.strip_prefix("# config: ")).unwrap();
    let again = RunConfig::from_json(&format!(r#"{{ "experiments": [{echo}] }}"#)).unwrap();
    assert_eq!(
        serde_json::to_value(&again.experiments[0]).unwrap(),
        serde_json::to_value(&cfg.experiments[0]).unwrap()
    );
}

#[test]
fn sequential_and_parallel_runs_write_identical_files() {
    let cfg = small_origin_column();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    lab::run(&cfg, a.path(), Execution::Sequential).unwrap();
    lab::run(&cfg, b.path(), Execution::default()).unwrap();
    for f in ["origin-column.csv", "summary.csv"] {
        let x = std::fs::read_to_string(a.path().join(f)).unwrap();
        let y = std::fs::read_to_string(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}

#[test]
fn cli_compare_reports_relations_and_threshold() {
    let (code, out, _) = germlab(&["compare", "--mu", "{1:1/2,2:1/2}", "--nu", "{0:1/10,3:9/10}"]);
    assert_eq!(code, EXIT_OK);
    let germ = out.lines().find(|l| l.starts_with("germ\t")).unwrap();
    assert!(germ.contains("Less"), "{out}");
    assert!(out.lines().any(|l| l.starts_with("germ_threshold\t")), "{out}");

    let (code, out, _) = germlab(&["compare", "--mu", "{0:1/4,2:3/4}", "--nu", "{2:1}", "--order", "st"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("st\tLess"), "{out}");
}

#[test]
fn cli_extinction_is_exact_for_quadratics() {
    let (code, out, _) = germlab(&["extinction", "--mu", "{0:1/4,2:3/4}"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "q\t1/3\texact");
}

#[test]
fn cli_rejects_bad_input_with_config_exit() {
    let (code, _, err) = germlab(&["compare", "--mu", "{0:1/2,2:1/3}", "--nu", "{2:1}"]);
    assert_eq!(code, EXIT_CONFIG, "{err}");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{ "experiments": [ { "name": "x", "experiment": "monotonicity", "horizon": "soon" } ] }"#)
        .unwrap();
    let out = dir.path().join("out.csv");
    let (code, _, err) = germlab(&["recurse", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG, "{err}");
    assert!(err.contains("experiments[0]"), "{err}");
}

#[test]
fn cli_germ_check_passes_and_rejects_uncertified_levels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path("origin-column.json");
    let out = dir.path().join("gc.csv");
    let args = |alpha: Option<&str>| {
        let mut v = vec![
            "recurse".to_string(),
            "--config".into(),
            cfg.to_str().unwrap().into(),
            "--experiment".into(),
            "origin-column-crossing".into(),
            "--engine".into(),
            "germ-check".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ];
        if let Some(a) = alpha {
            v.extend(["--alpha".into(), a.into()]);
        }
        v
    };
    let run = |v: Vec<String>| germlab(&v.iter().map(String::as_str).collect::<Vec<_>>());

    let (code, _, err) = run(args(None));
    assert_eq!(code, EXIT_OK, "{err}");
    let header = lab::read_header(&out).unwrap();
    assert_eq!(header.last().unwrap(), "series,generation,state,value,exact");

    // A level below the germ threshold is not certified and is rejected up front.
    let (code, _, err) = run(args(Some("1/100")));
    assert_eq!(code, EXIT_CONFIG, "{err}");
    assert!(err.contains("does not certify"), "{err}");
}

#[test]
fn cli_simulate_writes_one_row_per_replica() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    let cfg = config_path("tree-suite.json");
    let (code, _, err) =
        germlab(&["simulate", "--config", cfg.to_str().unwrap(), "--replicas", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&out).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 8);
    assert!(body[0].starts_with("replica,extinct_at,cap_hit,final_size"));
}
