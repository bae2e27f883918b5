//! End-to-end tests for the experiment driver: exit codes, report
//! shapes, determinism, and the closed-form rows the commands promise.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CLOSED_FORM: f64 = 1e-10;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_paraosc")
}

fn fresh_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("paraosc_cli_{}_{name}", std::process::id()));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).expect("stale test dir should be removable");
    }
    std::fs::create_dir_all(&dir).expect("test dir should be creatable");
    dir
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(bin())
        .args(args)
        .args(["--out", out.to_str().unwrap()])
        .output()
        .expect("binary should launch")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|_| panic!("missing report {}", path.display()))
}

fn text_column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines
        .next()
        .expect("csv should have a header row")
        .split(',')
        .collect();
    let idx = header
        .iter()
        .position(|h| *h == name)
        .unwrap_or_else(|| panic!("column {name} should exist in {header:?}"));
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    text_column(csv, name)
        .into_iter()
        .map(|v| v.parse().expect("column should hold numbers"))
        .collect()
}

fn write_symbol_json(dir: &Path, name: &str, values: &[f64]) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(values).unwrap()).unwrap();
    format!("custom-json({})", path.display())
}

#[test]
fn same_seed_runs_emit_byte_identical_reports() {
    let first = fresh_dir("det_a");
    let second = fresh_dir("det_b");
    let third = fresh_dir("det_c");
    let args = [
        "jn",
        "--depth",
        "5",
        "--measure",
        "doubling(0.2)",
        "--symbol",
        "random",
        "--trials",
        "3",
        "--seed",
        "11",
    ];
    assert!(run(&args, &first).status.success(), "first run should pass");
    assert!(run(&args, &second).status.success(), "second run should pass");
    for name in ["jn_tail.csv", "jn_verify.csv", "jn_forest.json"] {
        assert_eq!(
            read(&first.join(name)),
            read(&second.join(name)),
            "same seed should reproduce {name} byte for byte"
        );
    }
    let mut reseeded = args;
    reseeded[10] = "12";
    assert!(run(&reseeded, &third).status.success(), "reseeded run should pass");
    assert_ne!(
        read(&first.join("jn_verify.csv")),
        read(&third.join("jn_verify.csv")),
        "a different seed should change the sampled families"
    );
}

#[test]
fn constant_symbol_produces_the_zero_moduli_table() {
    let dir = fresh_dir("const_moduli");
    let symbol = write_symbol_json(&dir, "flat.json", &[1.0; 16]);
    let out = run(&["moduli", "--depth", "4", "--symbol", &symbol], &dir);
    assert!(out.status.success(), "constant symbol should succeed");
    let csv = read(&dir.join("moduli.csv"));
    for name in ["heavy", "light", "distant"] {
        assert!(
            column(&csv, name).iter().all(|&v| v == 0.0),
            "constant symbol should zero the {name} column"
        );
    }
}

#[test]
fn decaying_symbol_moduli_columns_are_nonincreasing() {
    let dir = fresh_dir("decay_moduli");
    let out = run(
        &["moduli", "--depth", "6", "--symbol", "vmo-decay(0.5)"],
        &dir,
    );
    assert!(out.status.success(), "moduli run should succeed");
    let csv = read(&dir.join("moduli.csv"));
    for name in ["heavy", "light", "distant"] {
        let values = column(&csv, name);
        assert!(
            values.windows(2).all(|w| w[1] <= w[0]),
            "{name} moduli should be nonincreasing in the threshold"
        );
    }
    let light = column(&csv, "light");
    assert!(
        light[0] > light[light.len() - 1],
        "light moduli of a decaying symbol should strictly drop"
    );
}

#[test]
fn single_haar_symbol_gives_the_closed_form_opnorm_row() {
    let dir = fresh_dir("haar_opnorm");
    let mut values = [0.5; 16];
    for v in values.iter_mut().skip(8) {
        *v = -0.5;
    }
    let symbol = write_symbol_json(&dir, "haar.json", &values);
    let out = run(
        &["opnorm", "--depth", "4", "--trials", "1", "--symbol", &symbol],
        &dir,
    );
    assert!(out.status.success(), "opnorm run should succeed");
    let csv = read(&dir.join("opnorm.csv"));
    for name in ["bmo", "a_0", "carleson", "lower_bound"] {
        let value = column(&csv, name)[0];
        assert!(
            (value - 0.5).abs() < CLOSED_FORM,
            "{name} should equal 1/2 for the rank-one symbol, got {value}"
        );
    }
    assert_eq!(
        text_column(&csv, "necessity_ok"),
        vec!["true"],
        "factor-2 testing bound should hold"
    );
}

#[test]
fn usage_errors_exit_with_code_2() {
    let dir = fresh_dir("usage");
    let cases: [&[&str]; 4] = [
        &["moduli", "--p", "0.5"],
        &["moduli", "--measure", "doubling(2)"],
        &["moduli", "--depth", "0"],
        &["opnorm", "--trials", "0"],
    ];
    for args in cases {
        let out = run(args, &dir);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?} should be rejected as usage"
        );
    }
    let out = Command::new(bin()).arg("bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(2), "unknown subcommand should exit 2");
}

#[test]
fn jn_reports_satisfy_the_declared_bounds() {
    let dir = fresh_dir("jn_bounds");
    let out = run(
        &[
            "jn",
            "--depth",
            "5",
            "--measure",
            "doubling(0.25)",
            "--symbol",
            "random",
            "--trials",
            "4",
            "--seed",
            "9",
        ],
        &dir,
    );
    assert!(out.status.success(), "jn run should succeed");
    let tail = read(&dir.join("jn_tail.csv"));
    let mass = column(&tail, "mass");
    let bound = column(&tail, "bound");
    for (m, b) in mass.iter().zip(&bound) {
        assert!(m <= &(b + 1e-9), "tail mass {m} should sit under the bound {b}");
    }
    let verify = read(&dir.join("jn_verify.csv"));
    for name in ["ok_half", "ok_pointwise", "ok_tail"] {
        assert!(
            text_column(&verify, name).iter().all(|v| v == "true"),
            "{name} should hold on every trial"
        );
    }
    let forest: serde_json::Value =
        serde_json::from_str(&read(&dir.join("jn_forest.json"))).unwrap();
    for key in ["b", "c", "gamma", "root"] {
        assert!(forest.get(key).is_some(), "forest dump should carry {key}");
    }
}

#[test]
fn constant_symbol_yields_the_trivial_forest() {
    let dir = fresh_dir("jn_trivial");
    let symbol = write_symbol_json(&dir, "flat.json", &[2.0; 16]);
    let out = run(
        &["jn", "--depth", "4", "--trials", "1", "--symbol", &symbol],
        &dir,
    );
    assert!(out.status.success(), "zero family should succeed");
    let verify = read(&dir.join("jn_verify.csv"));
    assert_eq!(column(&verify, "b_gamma"), vec![0.0], "zero family has B = 0");
    assert_eq!(column(&verify, "c_sup"), vec![0.0], "zero family has C = 0");
    let forest: serde_json::Value =
        serde_json::from_str(&read(&dir.join("jn_forest.json"))).unwrap();
    let root = &forest["root"];
    assert!(
        root["children"].as_array().unwrap().is_empty(),
        "zero family should stop nowhere"
    );
    assert!(
        root["stopping"].as_array().unwrap().is_empty(),
        "zero family should select no stopping cubes"
    );
}

#[test]
fn env_variable_sets_the_default_output_directory() {
    let dir = fresh_dir("env_out");
    let out = Command::new(bin())
        .args(["moduli", "--depth", "4"])
        .env("PARAOSC_OUT_DIR", &dir)
        .output()
        .expect("binary should launch");
    assert!(out.status.success(), "env-directed run should succeed");
    assert!(
        dir.join("moduli.csv").exists(),
        "reports should land in the directory from the environment"
    );
}

#[test]
fn json_format_emits_tables_as_json() {
    let dir = fresh_dir("json_tables");
    let out = run(&["moduli", "--depth", "4", "--format", "json"], &dir);
    assert!(out.status.success(), "json run should succeed");
    assert!(!dir.join("moduli.csv").exists(), "csv should be skipped");
    let rows: serde_json::Value = serde_json::from_str(&read(&dir.join("moduli.json"))).unwrap();
    let rows = rows.as_array().expect("json table should be an array");
    assert_eq!(rows.len(), 4, "one row per default threshold");
    for key in ["m", "heavy", "light", "distant"] {
        assert!(rows[0].get(key).is_some(), "rows should carry {key}");
    }
    let config: serde_json::Value =
        serde_json::from_str(&read(&dir.join("run_config.json"))).unwrap();
    assert_eq!(config["format"], "json", "config echo should record the format");
}

#[test]
fn admissibility_certificates_hold_on_lebesgue() {
    let dir = fresh_dir("admissibility");
    let out = run(&["admissibility", "--depth", "6"], &dir);
    assert!(out.status.success(), "admissibility run should succeed");
    let cesaro = read(&dir.join("admissibility_cesaro.csv"));
    let ks = column(&cesaro, "k");
    let profile = column(&cesaro, "cesaro");
    for (k, value) in ks.iter().zip(&profile) {
        assert!(
            (value - 1.0 / k.sqrt()).abs() < CLOSED_FORM,
            "orthonormal Haar Cesaro profile should equal 1/sqrt(k)"
        );
    }
    let pairing = read(&dir.join("admissibility_pairing.csv"));
    assert_eq!(
        column(&pairing, "value").len(),
        14,
        "two duals against seven level families"
    );
    let greedy: serde_json::Value =
        serde_json::from_str(&read(&dir.join("admissibility_greedy.json"))).unwrap();
    assert_eq!(greedy["triangle_ok"], true, "greedy certificate should hold");
    assert_eq!(
        greedy["repeated_constant_flagged"], true,
        "repeated constants should be flagged non-admissible"
    );
}

#[test]
fn compactness_discarded_norms_decrease_with_the_cutoff() {
    let dir = fresh_dir("compactness");
    let out = run(
        &[
            "compactness",
            "--depth",
            "8",
            "--symbol",
            "vmo-decay(0.5)",
            "--thresholds",
            "4,16,64",
        ],
        &dir,
    );
    assert!(out.status.success(), "compactness run should succeed");
    let csv = read(&dir.join("compactness.csv"));
    let parts = text_column(&csv, "part");
    let norms = column(&csv, "discarded_norm");
    let light: Vec<f64> = parts
        .iter()
        .zip(&norms)
        .filter(|(p, _)| p.as_str() == "light")
        .map(|(_, &n)| n)
        .collect();
    assert_eq!(light.len(), 3, "one light row per threshold");
    assert!(
        light.windows(2).all(|w| w[1] < w[0]),
        "light discarded norms should drop as the cutoff widens"
    );
    assert!(
        text_column(&csv, "ok").iter().all(|v| v == "true"),
        "every pipeline row should satisfy its bound"
    );
    let spectra: serde_json::Value =
        serde_json::from_str(&read(&dir.join("compactness_spectra.json"))).unwrap();
    let spectra = spectra.as_array().expect("spectra dump should be an array");
    assert_eq!(spectra.len(), 3, "one spectrum per threshold");
    for entry in spectra {
        let rank = entry["rank"].as_u64().unwrap();
        let size = entry["retained_size"].as_u64().unwrap();
        assert!(rank <= size, "rank should never exceed the retained size");
        let values: Vec<f64> = entry["values"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        assert!(
            values.windows(2).all(|w| w[1] <= w[0]),
            "singular values should be sorted descending"
        );
    }
}
