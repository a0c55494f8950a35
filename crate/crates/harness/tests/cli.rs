mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

use common::{brute_min, mincut_minimum, random_table_instance};
use dsfm_harness::{load_instance, read_instance, write_instance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn dsfm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsfm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn field(out: &Output, key: &str) -> String {
    let text = String::from_utf8_lossy(&out.stdout);
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().to_string()))
        .unwrap_or_else(|| panic!("no '{key}' line in:\n{text}"))
}

#[test]
fn solve_matches_max_flow_on_mincut_fixture() {
    let path = fixture("mincut8.dsfm");
    let reference = mincut_minimum(&load_instance(&path).unwrap());
    for solver in ["ibfs", "ekd"] {
        let out = dsfm(&["solve", path.to_str().unwrap(), "--solver", solver]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let value: f64 = field(&out, "value").parse().unwrap();
        let gap: f64 = field(&out, "gap").parse().unwrap();
        assert!(
            (value - reference).abs() < 1e-6,
            "{solver}: {value} vs {reference}"
        );
        assert!(gap < 1e-6);
        assert_eq!(field(&out, "certified"), "true");
    }
}

#[test]
fn validate_rejects_supermodular_tables() {
    for name in ["supermodular.dsfm", "supermodular_large.dsfm"] {
        let out = dsfm(&["validate", fixture(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(4), "{name}");
    }
    let ok = dsfm(&["validate", fixture("mincut8.dsfm").to_str().unwrap()]);
    assert!(ok.status.success());
}

#[test]
fn strict_flow_rejects_capped_wolfe() {
    let path = fixture("regions16.dsfm");
    let out = dsfm(&[
        "solve",
        path.to_str().unwrap(),
        "--solver",
        "ekd",
        "--oracle",
        "region=wolfe:10:warm",
        "--strict",
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"oracle_exactness\""));
}

#[test]
fn missing_file_is_an_io_error() {
    let out = dsfm(&["solve", "/nonexistent/instance.dsfm"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn ingest_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = dir.path().join("blob8.dsfm");
    let out = dsfm(&[
        "ingest",
        fixture("blob8.ppm").to_str().unwrap(),
        "-o",
        inst_path.to_str().unwrap(),
        "--lambda-pair",
        "0.6",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let inst = load_instance(&inst_path).unwrap();
    assert_eq!(inst.n(), 64);
    let out = dsfm(&["solve", inst_path.to_str().unwrap(), "--solver", "ibfs"]);
    let value: f64 = field(&out, "value").parse().unwrap();
    assert!((value - mincut_minimum(&inst)).abs() < 1e-6);
}

#[test]
fn solve_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture("mincut8.dsfm");
    let mut reports = Vec::new();
    for k in 0..2 {
        let json = dir.path().join(format!("r{k}.json"));
        let out = dsfm(&[
            "solve",
            path.to_str().unwrap(),
            "--solver",
            "rcdm",
            "--iterations",
            "2000",
            "--seed",
            "3",
            "--json",
            json.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
        let keys = [
            "minimizer",
            "value",
            "objective",
            "gap",
            "iterations",
            "oracle_calls",
        ];
        reports.push(keys.map(|k| v[k].clone()));
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn bench_prints_averaged_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.toml");
    std::fs::write(
        &cfg,
        format!(
            "trials = 10\nbudgets = [5, 10]\n\n[[run]]\nlabel = \"tiny\"\ninstance = \"{}\"\nsolvers = [\"ibfs\", \"rcdm\"]\n",
            fixture("mincut8.dsfm").display()
        ),
    )
    .unwrap();
    let out = dsfm(&["bench", cfg.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("averaged over 10 trials"), "{text}");
    assert!(text.contains("5r") && text.contains("10r"));
}

#[test]
fn diagnose_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let inst = random_table_instance(&mut rng, 6, 4, 4);
    let path = dir.path().join("small.dsfm");
    std::fs::write(&path, write_instance(&inst).unwrap()).unwrap();
    let out = dsfm(&["diagnose", path.to_str().unwrap(), "--samples", "40"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn instance_files_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_table_instance(&mut rng, 8, 5, 4);
        let text = write_instance(&inst).unwrap();
        let back = read_instance(&text).unwrap();
        prop_assert_eq!(write_instance(&back).unwrap(), text);
        prop_assert_eq!(brute_min(&back), brute_min(&inst));
    }
}
