use std::path::Path;
use std::process::{Command, Output};

fn kinex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kinex"))
        .args(args)
        .output()
        .expect("run kinex")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv_text: &str, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records()
        .map(|rec| rec.unwrap()[idx].to_string())
        .collect()
}

#[test]
fn convergents_pell() {
    let o = kinex(&["convergents", "--a", "2", "--N", "5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(column(&text, "q"), ["1", "2", "5", "12", "29", "70"]);
    let det = column(&text, "determinant");
    assert!(det[..5].iter().all(|d| d == "1" || d == "-1"));
    assert!(column(&text, "seed").iter().all(|s| s == "0"));
}

#[test]
fn convergents_fibonacci() {
    let o = kinex(&["convergents", "--a", "1", "--N", "4", "--format", "csv"]);
    assert_eq!(column(&stdout(&o), "q"), ["1", "1", "2", "3", "5"]);
}

#[test]
fn tower_identity_is_exactly_one() {
    let o = kinex(&["tower", "--a", "3", "--n-min", "0", "--n-max", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["ok"], true);
    for t in doc["towers"].as_array().unwrap() {
        assert_eq!(t["verified"], true);
        assert_eq!(t["identity"]["p"], "1/1");
        assert_eq!(t["identity"]["q"], "0/1");
    }
}

#[test]
fn bad_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "a = 3\nno-such-key = true\n").unwrap();
    let o = kinex(&["--config", cfg.to_str().unwrap(), "convergents"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(
        kinex(&["tower", "--n-min", "3", "--n-max", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(kinex(&["convergents", "--a", "0"]).status.code(), Some(2));
    assert_eq!(
        kinex(&["probe", "--epsilon", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(kinex(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "a = 1\nN = 3\nseed = 7\nformat = \"csv\"\n").unwrap();
    let o = kinex(&["--config", cfg.to_str().unwrap(), "convergents", "--a", "2"]);
    let text = stdout(&o);
    assert_eq!(column(&text, "q"), ["1", "2", "5", "12"]);
    assert!(column(&text, "seed").iter().all(|s| s == "7"));
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let one = tempfile::tempdir().unwrap();
    let two = tempfile::tempdir().unwrap();
    for d in [&one, &two] {
        let out = d.path().to_str().unwrap();
        for cmd in [
            vec![
                "build",
                "--a",
                "2",
                "--N",
                "3",
                "--n-max",
                "2",
                "--samples",
                "32",
            ],
            vec!["scan", "--a", "1000", "--samples", "4", "--seed", "11"],
            vec!["probe", "--a", "1000", "--samples", "4", "--seed", "11"],
        ] {
            let mut args = cmd.clone();
            args.extend(["--out", out]);
            assert_eq!(kinex(&args).status.code(), Some(0), "{cmd:?}");
        }
    }
    let a = read_dir(one.path());
    let b = read_dir(two.path());
    let names: Vec<_> = a.iter().map(|f| f.0.as_str()).collect();
    assert_eq!(
        names,
        ["build.json", "build_samples.csv", "probe.json", "scan.json"]
    );
    assert_eq!(a, b);
}

#[test]
fn build_matches_layer_spec() {
    let o = kinex(&[
        "build", "--a", "2", "--N", "3", "--n-min", "1", "--n-max", "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let layers = doc["layers"].as_array().unwrap();
    // a = 2, n = 2: q_3 = 12 floors, 3 positive bumps and 6 negative half bumps
    let l2 = &layers[1];
    assert_eq!(l2["positive_bumps"], "3");
    assert_eq!(l2["negative_half_bumps"], "6");
    assert_eq!(l2["spec"]["j"], "3");
    for l in layers {
        assert_eq!(l["sup_within_interval"], true);
        assert_eq!(l["indicator"]["pieces"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn verify_large_a_passes_main() {
    let o = kinex(&["verify", "--a", "1000", "--n-max", "1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let h = r.headers().unwrap().clone();
    let col = |n: &str| h.iter().position(|x| x == n).unwrap();
    let rows: Vec<_> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 21);
    for row in &rows {
        assert_eq!(&row[col("verdict")], "pass");
        if &row[col("prop")] == "p3" {
            assert_eq!(&row[col("lhs")], "0");
        }
        assert!(!row[col("margin")].is_empty() && !row[col("margin_decimal")].is_empty());
    }
    assert!(rows.iter().any(|r| &r[col("prop")] == "main"));
}

#[test]
fn verify_small_a_keeps_out_of_regime_rows() {
    let o = kinex(&[
        "verify", "--a", "2", "--n-min", "2", "--n-max", "2", "--format", "csv",
    ]);
    let text = stdout(&o);
    let verdicts = column(&text, "verdict");
    assert_eq!(verdicts.len(), 21);
    assert!(
        verdicts.iter().any(|v| v == "out-of-regime"),
        "{verdicts:?}"
    );
    let fails = verdicts.iter().any(|v| v == "fail");
    assert_eq!(o.status.code(), Some(if fails { 1 } else { 0 }));
}

#[test]
fn scan_and_probe_agree() {
    let scan = kinex(&["scan", "--a", "1000", "--samples", "10"]);
    assert_eq!(scan.status.code(), Some(0));
    let cert: serde_json::Value = serde_json::from_slice(&scan.stdout).unwrap();
    assert_eq!(cert["holds"], true);
    assert_eq!(cert["config"]["seed"], 0);
    let probe = kinex(&["probe", "--a", "1000", "--samples", "10"]);
    assert_eq!(probe.status.code(), Some(0));
    let res: serde_json::Value = serde_json::from_slice(&probe.stdout).unwrap();
    assert_eq!(res["separated_count"], 10);
}
