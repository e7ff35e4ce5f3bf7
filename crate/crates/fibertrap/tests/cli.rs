//! Black-box tests of the command-line binary: exit codes, output files,
//! determinism across reruns, and the simulate -> analyze closure.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_fibertrap");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn version_and_help_run_clean() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["--version"]);
    assert_eq!(exit_code(&out), 0);
    let out = run(tmp.path(), &["--help"]);
    assert_eq!(exit_code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("fibertrap"));
}

#[test]
fn reproduce_targets_pass() {
    let tmp = TempDir::new().unwrap();
    for target in [
        "kappa",
        "lowerbound108",
        "mixture155",
        "table1",
        "lifetime260ms",
        "odpeak",
        "trapsites",
        "betamap",
    ] {
        let out = run(tmp.path(), &["--quiet", "--out", "out", "reproduce", target]);
        assert_eq!(exit_code(&out), 0, "{target}: {}", stderr(&out));
        let report = read_json(&tmp.path().join(format!("out/reproduce_{target}.json")));
        assert_eq!(report["target"], target);
        assert_eq!(report["pass"], true, "{target}: {report}");
        assert!(report["checks"].as_array().is_some_and(|c| !c.is_empty()));
    }
}

#[test]
fn failed_reproduction_exits_one() {
    let tmp = TempDir::new().unwrap();
    // a detuned tweezer moves the standing-wave fringes off the expected sites
    let config = write_config(
        tmp.path(),
        "shifted.toml",
        "version = 1\n\n[tweezer]\nwavelength_nm = 1064.0\n",
    );
    let out = run(
        tmp.path(),
        &["--quiet", "--config", &config, "--out", "out", "reproduce", "trapsites"],
    );
    assert_eq!(exit_code(&out), 1);
    let report = read_json(&tmp.path().join("out/reproduce_trapsites.json"));
    assert_eq!(report["pass"], false);
}

#[test]
fn bad_inputs_exit_two() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["reproduce", "nonsense"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("unknown reproduce target"));

    let out = run(tmp.path(), &["--config", "no_such_file.toml", "reproduce", "kappa"]);
    assert_eq!(exit_code(&out), 2);

    let broken = write_config(tmp.path(), "broken.toml", "version = [\n");
    let out = run(tmp.path(), &["--config", &broken, "reproduce", "kappa"]);
    assert_eq!(exit_code(&out), 2);

    let unknown = write_config(tmp.path(), "unknown.toml", "version = 1\nbogus_key = 3\n");
    let out = run(tmp.path(), &["--config", &unknown, "reproduce", "kappa"]);
    assert_eq!(exit_code(&out), 2);

    fs::write(tmp.path().join("stream.bin"), b"not a stream").unwrap();
    let out = run(tmp.path(), &["analyze", "--input", "stream.bin"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn solver_failures_exit_three() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        "multimode.toml",
        "version = 1\n\n[fiber]\nradius_nm = 2000.0\n",
    );
    let out = run(tmp.path(), &["--quiet", "--config", &config, "mode"]);
    assert_eq!(exit_code(&out), 3);
    assert!(stderr(&out).contains("multimode"));
}

#[test]
fn simulate_rerun_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    for dir in ["a", "b"] {
        let out = run(
            tmp.path(),
            &["--quiet", "--out", dir, "simulate", "--scans", "40"],
        );
        assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    }
    let a = fs::read(tmp.path().join("a/stream.ttag")).unwrap();
    let b = fs::read(tmp.path().join("b/stream.ttag")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let manifest = read_json(&tmp.path().join("a/stream.manifest.json"));
    assert_eq!(manifest["n_scans"], 40);
}

#[test]
fn seed_flag_changes_the_stream() {
    let tmp = TempDir::new().unwrap();
    for (dir, seed) in [("a", "5"), ("b", "5"), ("c", "6")] {
        let out = run(
            tmp.path(),
            &["--quiet", "--seed", seed, "--out", dir, "simulate", "--scans", "10"],
        );
        assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    }
    let a = fs::read(tmp.path().join("a/stream.ttag")).unwrap();
    let b = fs::read(tmp.path().join("b/stream.ttag")).unwrap();
    let c = fs::read(tmp.path().join("c/stream.ttag")).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn simulate_then_analyze_closes() {
    let tmp = TempDir::new().unwrap();
    let out = run(
        tmp.path(),
        &["--quiet", "--out", "out", "simulate", "--scans", "300"],
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let out = run(
        tmp.path(),
        &["--quiet", "--out", "out", "analyze", "--input", "out/stream.ttag"],
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let report = read_json(&tmp.path().join("out/analysis.json"));
    assert!(report["g2_zero"].is_number());
    assert!(report["mixture"]["weight"].is_number());
    assert!(report["lower_bound_occupied"].is_u64());
    for file in ["g2.csv", "g2.svg", "window_counts_hist.csv"] {
        assert!(tmp.path().join("out").join(file).exists(), "{file} missing");
    }
}

#[test]
fn csv_stream_analyzes_via_manifest() {
    let tmp = TempDir::new().unwrap();
    let out = run(
        tmp.path(),
        &["--quiet", "--out", "out", "--format", "csv", "simulate", "--scans", "300"],
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    assert!(tmp.path().join("out/stream.manifest.json").exists());
    let out = run(
        tmp.path(),
        &["--quiet", "--out", "out", "analyze", "--input", "out/stream.csv"],
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let report = read_json(&tmp.path().join("out/analysis.json"));
    assert!(report["g2_zero"].is_number());
}

#[test]
fn quiet_suppresses_progress_output() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["--quiet", "--out", "out", "reproduce", "kappa"]);
    assert_eq!(exit_code(&out), 0);
    assert!(out.stdout.is_empty());
    let noisy = run(tmp.path(), &["--out", "out", "reproduce", "kappa"]);
    assert!(!noisy.stdout.is_empty());
}
