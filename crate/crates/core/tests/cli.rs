//! The `kimgold` binary: exit codes, file formats and output stability.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kimgold(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kimgold"))
        .args(args)
        .current_dir(dir)
        .env_remove("KIMGOLD_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn check_zero_triple() {
    let dir = tempfile::tempdir().unwrap();
    let out = kimgold(
        &[
            "--m", "4", "check", "0", "0", "0", "--format", "json", "--oracle", "full",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["gamma1"], true);
    assert_eq!(v["apn"], true);
    assert_eq!(v["oracle"], true);
}

#[test]
fn scope_gate_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in [
        &["--m", "3", "enumerate"][..],
        &["--m", "3", "check", "0", "0", "0"],
        &["--m", "2", "witness", "0", "0", "0"],
    ] {
        let out = kimgold(cmd, dir.path());
        assert_eq!(out.status.code(), Some(1), "{cmd:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("ddt"));
    }
    // ddt itself is fine below the predicate's range
    let out = kimgold(&["--m", "2", "ddt", "exp:3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in [
        &["--m", "4", "check", "0", "256", "0"][..],
        &["--m", "4", "check", "zero", "0", "0"],
        &["--m", "11", "gold"],
        &["--m", "4", "--fq-poly", "0x15", "gold"],
        &["--m", "4", "--nu", "1", "gold"],
        &["ddt", "exp:3"],
        &["--m", "4", "ddt", "poly:3"],
        &["--m", "4", "enumerate", "--oracle", "sometimes"],
    ] {
        let out = kimgold(cmd, dir.path());
        assert_eq!(
            out.status.code(),
            Some(1),
            "{cmd:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn a1_outside_subfield_is_normalized() {
    let dir = tempfile::tempdir().unwrap();
    let out = kimgold(
        &["--m", "4", "check", "16", "0", "0", "--format", "json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["input"]["a1"], 16);
    assert!(v["normalized"]["a1"].as_u64().unwrap() < 16);
}

#[test]
fn witness_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    // a2 ≠ 0 and a3 outside F_q: goes through the a2-elimination
    let out = kimgold(
        &[
            "--m", "4", "witness", "0", "16", "245", "--out", "w.json", "--oracle", "full",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("w.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "APN");
    assert_eq!(report["oracle"], true);
    assert_eq!(report["route"][0], "P22");
    let w = &report["witness"];
    assert_eq!(w["L1"].as_array().unwrap().len(), 8);
    assert_eq!(w["field_ctx"]["m"], 4);

    let out = kimgold(&["verify", "w.json", "--format", "json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["valid"], true);

    // the bare witness object is accepted too
    std::fs::write(dir.path().join("bare.json"), w.to_string()).unwrap();
    assert_eq!(
        kimgold(&["verify", "bare.json"], dir.path()).status.code(),
        Some(0)
    );

    // and a perturbed one is a verification failure
    let mut bad = w.clone();
    let c = bad["L2"][3].as_u64().unwrap();
    bad["L2"][3] = (c ^ 1).into();
    std::fs::write(dir.path().join("bad.json"), bad.to_string()).unwrap();
    let out = kimgold(&["verify", "bad.json", "--format", "json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["valid"], false);
}

#[test]
fn not_apn_witness_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = kimgold(
        &["--m", "4", "witness", "3", "0", "0", "--out", "n.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let report: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("n.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "NotAPN");
    assert!(report["witness"].is_null());
    assert_eq!(
        kimgold(&["verify", "n.json"], dir.path()).status.code(),
        Some(1)
    );
}

#[test]
fn enumerate_rows_are_stable_across_jobs_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "--m",
        "4",
        "enumerate",
        "--stratum",
        "subfield",
        "--oracle",
        "sample=100",
    ];
    let one = kimgold(
        &[&base[..], &["--jobs", "1", "--format", "csv"]].concat(),
        dir.path(),
    );
    let four = kimgold(
        &[&base[..], &["--jobs", "4", "--format", "csv"]].concat(),
        dir.path(),
    );
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stderr, four.stderr);
    let rows = String::from_utf8(one.stdout).unwrap();
    assert_eq!(rows.lines().count(), 1 + 16 * 16 * 16);
    // the summary goes to stderr when rows take stdout
    let summary: Value = serde_json::from_slice(&one.stderr).unwrap();
    assert_eq!(summary["triples"], 4096);
    assert_eq!(summary["oracle_checked_negative"], 100);
    assert_eq!(summary["disagreement_count"], 0);

    let out = kimgold(
        &[
            &base[..],
            &["--out", "rows.csv", "--positives-only", "--format", "json"],
        ]
        .concat(),
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let apn = json(&out)["apn"].as_u64().unwrap();
    let file = std::fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    assert_eq!(file.lines().count() as u64, 1 + apn);
    assert!(file
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(5) == Some("true")));
}

#[test]
fn seed_changes_the_sample_not_the_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_kimgold"))
            .args([
                "--m",
                "4",
                "enumerate",
                "--stratum",
                "a2-zero",
                "--oracle",
                "sample=200",
                "--format",
                "csv",
            ])
            .current_dir(dir.path())
            .env("KIMGOLD_SEED", seed)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        let sampled: Vec<String> = String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .filter(|l| l.ends_with(",false"))
            .map(String::from)
            .collect();
        let summary: Value = serde_json::from_slice(&out.stderr).unwrap();
        (sampled, summary["apn"].clone())
    };
    let (s1, a1) = run("1");
    let (s1b, _) = run("1");
    let (s2, a2) = run("0x2");
    assert_eq!(s1.len(), 200);
    assert_eq!(s1, s1b);
    assert_ne!(s1, s2);
    assert_eq!(a1, a2);
}

#[test]
fn ddt_specs_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = kimgold(
        &[
            "--m",
            "4",
            "ddt",
            "kim:0,0,0",
            "--export",
            "k.bin",
            "--format",
            "json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["n"], 8);
    assert_eq!(v["differential_uniformity"], 2);
    assert_eq!(
        std::fs::metadata(dir.path().join("k.bin")).unwrap().len(),
        256 * 4
    );
    let out = kimgold(&["ddt", "file:k.bin", "--format", "csv"], dir.path());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "function,n,differential_uniformity,apn\nfile:k.bin,8,2,true\n"
    );
    // x^5 on GF(2^8): gcd(2, 8) = 2, not APN
    let out = kimgold(
        &["--m", "4", "ddt", "exp:5", "--format", "json"],
        dir.path(),
    );
    assert_eq!(json(&out)["apn"], false);
}

#[test]
fn gold_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = kimgold(&["--m", "4", "gold", "--format", "json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["g1"]["exponent"], 3);
    assert_eq!(v["g2"]["exponent"], 9);
    assert_eq!(v["g1"]["differential_uniformity"], 2);
    assert_eq!(v["g2"]["differential_uniformity"], 2);
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = kimgold(&["selftest", "--format", "json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["oracle_disagreements"], 0);
    assert_eq!(v["witness_failures"], 0);
    assert_eq!(v["witnesses_verified"], v["predicate_apn"]);
}

#[test]
fn alternate_field_presentation() {
    let dir = tempfile::tempdir().unwrap();
    // y^4 + y^3 + 1 and a different trace-one ν
    let out = kimgold(
        &[
            "--m",
            "4",
            "--fq-poly",
            "0x19",
            "--nu",
            "0x8",
            "witness",
            "0",
            "0",
            "7",
            "--out",
            "w.json",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = kimgold(&["verify", "w.json", "--format", "json"], dir.path());
    assert_eq!(json(&out)["field_ctx"]["fq_poly"], 25);
    assert_eq!(json(&out)["valid"], true);
}
