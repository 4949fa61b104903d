use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kolmo_core::bitcodec::SymbolSeries;
use serde_json::Value;
use tempfile::TempDir;

const STRING_B: &str = "01101001100101101001011001101001100101100110100101101001100101101001011001101001";

fn kolmo(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kolmo")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = kolmo(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

const SMALL_CONFIG: &str = r#"
coders = ["huffman", "cm"]
trials = 150

[[stage]]
transform = "log_returns"
tests = [{ test = "ljung_box", lags = 10 }]

[[stage]]
transform = "empirical_quantile"
width = 8
"#;

#[test]
fn thue_morse_prefix_is_string_b() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "thue-morse", "--n", "80", "--out", "tm.bin"]);
    let s = SymbolSeries::from_file_bytes(&fs::read(tmp.path().join("tm.bin")).unwrap(), 1).unwrap();
    let text: String = s.symbols().iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
    assert_eq!(text, STRING_B);
}

#[test]
fn generate_echoes_seed_and_params() {
    let tmp = TempDir::new().unwrap();
    let out = ok(tmp.path(), &["--seed", "11", "generate", "bernoulli", "--n", "64", "--p", "0.25", "--out", "b.bin"]);
    let line: Value = serde_json::from_slice(out.stderr.split(|&b| b == b'\n').next().unwrap()).unwrap();
    assert_eq!(line["seed"], 11);
    assert_eq!(line["params"]["p"], 0.25);
}

#[test]
fn gaussian_of_length_zero_is_an_empty_file() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "gaussian", "--n", "0", "--out", "g.csv"]);
    assert!(fs::read(tmp.path().join("g.csv")).unwrap().is_empty());
}

#[test]
fn pi_returns_reports_symbol_count() {
    let tmp = TempDir::new().unwrap();
    let out =
        ok(tmp.path(), &["generate", "pi-returns", "--digits", "50000", "--out", "pi.csv", "--symbols-out", "pi.bin"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("25000 symbols"));
    assert_eq!(fs::read(tmp.path().join("pi.bin")).unwrap().len(), 25000);
}

#[test]
fn compress_round_trips_any_file() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "gaussian", "--n", "500", "--out", "g.csv"]);
    for coder in ["huffman", "rle", "lz", "cm"] {
        let out = ok(tmp.path(), &["compress", "--coder", coder, "g.csv", "g.krep"]);
        let outcome: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(outcome["coder"], coder);
        ok(tmp.path(), &["decompress", "g.krep", "back.csv"]);
        assert_eq!(fs::read(tmp.path().join("g.csv")).unwrap(), fs::read(tmp.path().join("back.csv")).unwrap());
    }
}

#[test]
fn discretize_then_tests() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "gaussian", "--n", "1000", "--out", "g.csv"]);
    ok(
        tmp.path(),
        &[
            "discretize",
            "g.csv",
            "--scheme",
            "normal-quantile",
            "--width",
            "4",
            "--bounds-out",
            "b.csv",
            "--out",
            "s.bin",
        ],
    );
    ok(tmp.path(), &["discretize", "g.csv", "--bounds", "b.csv", "--out", "s2.bin"]);
    assert_eq!(fs::read(tmp.path().join("s.bin")).unwrap(), fs::read(tmp.path().join("s2.bin")).unwrap());
    let s = SymbolSeries::from_file_bytes(&fs::read(tmp.path().join("s.bin")).unwrap(), 4).unwrap();
    assert_eq!(s.len(), 1000);

    let out = ok(tmp.path(), &["--format", "csv", "test", "g.csv", "--test", "all", "--m", "2", "--eps", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "test,lags,m,eps_multiple,statistic,p_value");
    assert_eq!(rows.len(), 4);
}

#[test]
fn rep_is_deterministic_for_a_seed() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "rep.toml", SMALL_CONFIG);
    ok(tmp.path(), &["generate", "toy-e1", "--n", "300", "--out", "p.csv"]);
    let args = ["rep", "p.csv", "--config", "rep.toml", "--trials", "100", "--seed", "7"];
    let a = ok(tmp.path(), &args).stdout;
    let b = ok(tmp.path(), &args).stdout;
    assert_eq!(a, b);
    let report: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(report["seed"], 7);
    assert_eq!(report["settings"]["trials"], 100);
    let outcomes = report["stages"][1]["outcomes"].as_array().unwrap();
    assert!(outcomes.iter().all(|o| o["rate"].is_f64() && o["p_value"].is_f64()));
}

#[test]
fn tables_match_report_rates() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "rep.toml", SMALL_CONFIG);
    ok(tmp.path(), &["generate", "toy-e1", "--n", "300", "--out", "p.csv"]);
    ok(tmp.path(), &["rep", "p.csv", "--config", "rep.toml", "--out", "r.json"]);
    ok(tmp.path(), &["tables", "r.json", "--out-dir", "tables"]);
    let report: Value = serde_json::from_slice(&fs::read(tmp.path().join("r.json")).unwrap()).unwrap();
    let csv = fs::read_to_string(tmp.path().join("tables/stage1_empirical_quantile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("algorithm,file_size_bits,rate"));
    let outcomes = report["stages"][1]["outcomes"].as_array().unwrap();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), outcomes.len());
    for (row, o) in rows.iter().zip(outcomes) {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[0], o["coder"].as_str().unwrap());
        assert_eq!(f[1].parse::<u64>().unwrap(), o["compressed_bits"].as_u64().unwrap());
        assert_eq!(f[2].parse::<f64>().unwrap(), o["rate"].as_f64().unwrap());
    }
}

#[test]
fn tables_without_compressed_stages_are_header_only() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "rep.toml", SMALL_CONFIG);
    ok(tmp.path(), &["generate", "toy-e1", "--n", "300", "--out", "p.csv"]);
    ok(tmp.path(), &["rep", "p.csv", "--config", "rep.toml", "--out", "r.json"]);
    let mut report: Value = serde_json::from_slice(&fs::read(tmp.path().join("r.json")).unwrap()).unwrap();
    report["stages"] = Value::Array(Vec::new());
    fs::write(tmp.path().join("empty.json"), serde_json::to_vec(&report).unwrap()).unwrap();
    let out = ok(tmp.path(), &["tables", "empty.json"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "algorithm,file_size_bits,rate\n");
}

#[test]
fn hidden_cycle_case_two_is_regular() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "case2.toml",
        "coders = [\"cm\"]\ntrials = 100\n\n[[stage]]\ntransform = \"normal_quantile\"\nwidth = 8\n",
    );
    ok(tmp.path(), &["--seed", "3", "generate", "lowbit-case2", "--n", "8000", "--out", "c2.csv"]);
    let out = ok(tmp.path(), &["rep", "c2.csv", "--config", "case2.toml", "--input-kind", "returns"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "REGULAR");
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let code = |args: &[&str]| kolmo(tmp.path(), args).status.code();
    assert_eq!(code(&["generate", "mandelbrot"]), Some(2));
    assert_eq!(code(&["no-such-command"]), Some(2));
    assert_eq!(code(&["compress", "--coder", "zip", "a", "b"]), Some(2));

    write(tmp.path(), "bad.toml", "trials = 5\n[[stage]]\ntransform = \"to_bits\"\n");
    write(tmp.path(), "p.csv", "price\n100\n101\n");
    assert_eq!(code(&["rep", "p.csv", "--config", "bad.toml"]), Some(2));

    write(tmp.path(), "broken.csv", "price\n100\nabc\n");
    write(tmp.path(), "ok.toml", SMALL_CONFIG);
    let out = kolmo(tmp.path(), &["rep", "broken.csv", "--config", "ok.toml"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert_eq!(code(&["decompress", "missing.krep", "x"]), Some(3));

    // A constant series has a singular ADF regression.
    let flat: String =
        std::iter::once("return".to_string()).chain((0..300).map(|_| "0.5".to_string())).collect::<Vec<_>>().join("\n");
    write(tmp.path(), "flat.csv", &flat);
    assert_eq!(code(&["test", "flat.csv", "--test", "adf"]), Some(4));
}
