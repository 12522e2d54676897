//! Integration tests for the command-line interface and the end-to-end
//! artifact contract on the bundled synthetic fixture.

use std::path::Path;
use std::process::Command;

use complexity::pipeline::fixture::{write_fixture, FixtureOptions};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_complexity"))
}

fn fixture_dir(seed: u64) -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_fixture(dir.path(), &FixtureOptions::small(seed)).unwrap();
    (dir, cfg)
}

#[test]
fn run_subcommand_completes_and_writes_tables() {
    let (dir, cfg) = fixture_dir(42);
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let outdir = dir.path().join("out");
    for artifact in [
        "manifest.json",
        "config_echo.toml",
        "selection.json",
        "tables/growth.txt",
        "tables/growth.csv",
        "ingest/trade.csv",
        "specialize/trade_2000-2010.csv",
        "metrics/eci_trade_2000-2010.csv",
        "instrument/trade_2000-2010.csv",
    ] {
        assert!(outdir.join(artifact).exists(), "missing {artifact}");
    }
    // Logs go to stderr; stdout stays clean for scripting.
    assert!(out.stdout.is_empty());
}

#[test]
fn metrics_subcommand_stops_before_regression() {
    let (dir, cfg) = fixture_dir(7);
    let out = bin()
        .args(["metrics", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let outdir = dir.path().join("out");
    assert!(outdir.join("metrics").exists());
    assert!(!outdir.join("tables").exists());
    assert!(!outdir.join("instrument").exists());
}

#[test]
fn out_flag_overrides_configured_directory() {
    let (dir, cfg) = fixture_dir(8);
    let custom = dir.path().join("elsewhere");
    let out = bin()
        .args(["ingest", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&custom)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(custom.join("ingest/trade.csv").exists());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn missing_config_is_a_config_error() {
    let out = bin()
        .args(["run", "--config", "/nonexistent/run.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2)); // unreadable path -> i/o class
}

#[test]
fn invalid_config_reference_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "out_dir = \"out\"\n[[dimensions]]\nid = \"trade\"\noutput = \"missing.csv\"\n\
         [[panels]]\nstart = 2000\nend = 2010\n",
    )
    .unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(3)); // validation failure -> config class
}

#[test]
fn malformed_data_row_reports_input_error() {
    let (dir, cfg) = fixture_dir(9);
    // Corrupt one dimension file with an unparseable value.
    let trade = dir.path().join("trade.csv");
    let mut text = std::fs::read_to_string(&trade).unwrap();
    text.push_str("E000,A0001,2000,not-a-number\n");
    std::fs::write(&trade, text).unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("not-a-number"), "stderr: {stderr}");
}

#[test]
fn manifest_lists_every_artifact_with_hash() {
    let (dir, cfg) = fixture_dir(11);
    assert!(bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .status()
        .unwrap()
        .success());
    let outdir = dir.path().join("out");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("manifest.json")).unwrap())
            .unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert!(!files.is_empty());
    for f in files {
        let path = f["path"].as_str().unwrap();
        let sha = f["sha256"].as_str().unwrap();
        assert!(outdir.join(path).exists(), "{path} listed but missing");
        assert_eq!(sha.len(), 64);
    }
    // Every emitted file except the manifest itself must be listed.
    let listed: std::collections::BTreeSet<&str> =
        files.iter().map(|f| f["path"].as_str().unwrap()).collect();
    for entry in walk(&outdir) {
        let rel = entry.strip_prefix(&outdir).unwrap().to_string_lossy().replace('\\', "/");
        if rel == "manifest.json" {
            continue;
        }
        assert!(listed.contains(rel.as_str()), "{rel} not in manifest");
    }
}

#[test]
fn regression_csv_schema_is_stable() {
    let (dir, cfg) = fixture_dir(12);
    assert!(bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .status()
        .unwrap()
        .success());
    let csv = std::fs::read_to_string(dir.path().join("out/tables/growth.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "model,term,coefficient,std_error,p_value"
    );
    // Summary statistics rows present for every model.
    for stat in ["Observations", "R2", "AdjustedR2"] {
        assert!(csv.contains(&format!("baseline,{stat},")));
    }
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}
