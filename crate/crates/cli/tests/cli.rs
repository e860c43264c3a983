use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padic-lab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn lacunary_pipeline_verifies() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "construct",
            "lacunary",
            "--p",
            "2",
            "--growth",
            "pow:3",
            "--terms",
            "6",
            "-o",
            "xi.json",
        ],
    );
    ok(
        d,
        &[
            "approx", "--input", "xi.json", "--norm", "sup", "-o", "sup.csv",
        ],
    );
    ok(
        d,
        &[
            "approx", "--input", "xi.json", "--norm", "mult", "-o", "mult.csv",
        ],
    );
    ok(
        d,
        &[
            "estimate",
            "--chain",
            "sup.csv",
            "--mult-chain",
            "mult.csv",
            "--p",
            "2",
            "-o",
            "report.json",
        ],
    );
    let r = json(d.join("report.json"));
    assert!((r["mu"].as_f64().unwrap() - 3.0).abs() < 0.15);
    assert!((r["mu_times"].as_f64().unwrap() - 6.0).abs() < 0.3);
    ok(
        d,
        &["verify", "--report", "report.json", "-o", "checks.json"],
    );
    let checks = json(d.join("checks.json"));
    assert!(checks
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == Value::Bool(true)));
    // exact checks on the chain: the upper window is only a diagnostic
    ok(
        d,
        &[
            "verify",
            "--report",
            "report.json",
            "--chain",
            "sup.csv",
            "--p",
            "2",
            "--exact-checks",
            "-o",
            "exact.json",
        ],
    );
    let names: Vec<String> = json(d.join("exact.json"))
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect();
    assert!(names.contains(&"no_two_independent_small_solutions".to_string()));
    assert!(names.contains(&"consecutive_height_lower".to_string()));
}

#[test]
fn oracle_and_lattice_agree_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "construct",
            "rule",
            "--p",
            "3",
            "--name",
            "random",
            "--seed",
            "11",
            "--precision",
            "18",
            "-o",
            "xi.json",
        ],
    );
    for (norm, bound) in [("sup", "2000"), ("mult", "100000")] {
        let a = ok(
            d,
            &[
                "approx",
                "--input",
                "xi.json",
                "--norm",
                norm,
                "--height-bound",
                bound,
            ],
        );
        let b = ok(
            d,
            &[
                "approx",
                "--input",
                "xi.json",
                "--norm",
                norm,
                "--oracle",
                "--height-bound",
                bound,
            ],
        );
        assert_eq!(a.stdout, b.stdout, "{norm}");
        assert!(a.stdout.len() > 60);
    }
}

#[test]
fn rational_input_gives_censored_chain_notice() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    // -1 in Z_2
    let digits = vec!["1"; 16].join(",");
    let text = format!(
        "{{\"format\":\"padic-digits-v1\",\"p\":2,\"precision\":16,\"digits\":[{digits}]}}\n"
    );
    std::fs::write(d.join("minus_one.json"), text).unwrap();
    let out = ok(d, &["approx", "--input", "minus_one.json"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 2, "{csv}");
    assert!(csv.ends_with("0,-1,1,16,false,1,1\n"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lower bound"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("one.csv"),
        "k,x,y,valuation,valuation_exact,height_sup,height_mult_sq\n0,1,1,3,true,1,1\n",
    )
    .unwrap();
    let out = run(d, &["estimate", "--chain", "one.csv", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("insufficient data"));

    std::fs::write(
        d.join("bad.json"),
        "{\"format\":\"padic-digits-v1\",\"p\":2}",
    )
    .unwrap();
    assert_eq!(
        run(d, &["approx", "--input", "bad.json"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(d, &["construct", "factorial", "--p", "4", "--terms", "3"])
            .status
            .code(),
        Some(2)
    );

    let report = r#"{"mu":2.0,"mu_times":5.0,"hat_mu":2.0,"hat_mu_times":2.5,"burn_in":2,"precision_limited":false,"pointwise":[]}"#;
    std::fs::write(d.join("report.json"), report).unwrap();
    let out = run(
        d,
        &["verify", "--report", "report.json", "--checks", "bounds"],
    );
    assert_eq!(out.status.code(), Some(1));
    let checks: Value = serde_json::from_slice(&out.stdout).unwrap();
    let failed: Vec<&str> = checks
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == Value::Bool(false))
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["mu_times_at_most_twice_mu"]);
    assert_eq!(
        run(
            d,
            &["verify", "--report", "report.json", "--checks", "nope"]
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn sweep_rows_follow_grid_and_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let args = [
        "sweep", "--family", "lacunary", "--p", "2", "--d-from", "2", "--d-to", "3", "--d-step",
        "0.5", "--terms", "7",
    ];
    let one = Command::new(env!("CARGO_BIN_EXE_padic-lab"))
        .current_dir(d)
        .args(args)
        .env("PADIC_LAB_THREADS", "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_padic-lab"))
        .current_dir(d)
        .args(args)
        .env("PADIC_LAB_THREADS", "3")
        .output()
        .unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
    let text = String::from_utf8(one.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(
        rows.iter().map(|r| r[0]).collect::<Vec<_>>(),
        ["2", "2.5", "3"]
    );
    let last = &rows[2];
    let mu: f64 = last[1].parse().unwrap();
    let mu_times: f64 = last[2].parse().unwrap();
    assert!(
        (mu - 3.0).abs() <= 0.15 && (mu_times - 6.0).abs() <= 0.3,
        "{last:?}"
    );
    assert_eq!((last[4], last[5]), ("3", "6"));
}

#[test]
fn schneider_ledger_and_surgery() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "construct",
            "schneider",
            "--p",
            "2",
            "--mu-seq",
            "list:5/2,5/2,9,5/2,5/2,5/2,5/2",
            "--steps",
            "8",
            "--ledger",
            "ledger.csv",
            "-o",
            "zeta.json",
        ],
    );
    let ledger = std::fs::read_to_string(d.join("ledger.csv")).unwrap();
    assert!(ledger.starts_with("n,p_n,q_n,g_n,H_n,v_L_n\n"));
    assert_eq!(ledger.lines().count(), 9);
    let out = run(
        d,
        &[
            "construct",
            "surgery",
            "--p",
            "2",
            "--t",
            "3/2",
            "--mu",
            "6",
            "--source",
            "zeta.json",
            "--sigma",
            "2",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let xi: Value = serde_json::from_slice(&out.stdout).unwrap();
    let digits = xi["digits"].as_array().unwrap();
    // ν = ⌊9·2⌋ + 1 = 19, τ = 6·19 = 114
    assert_eq!(digits[19], 1);
    assert_eq!(digits[114], 1);
    assert!(digits[20..114].iter().all(|v| v == 0));
    let bad = run(
        d,
        &[
            "construct",
            "surgery",
            "--p",
            "3",
            "--t",
            "3/2",
            "--mu",
            "6",
            "--source",
            "zeta.json",
            "--sigma",
            "2",
        ],
    );
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn help_lists_flags() {
    let dir = TempDir::new().unwrap();
    let out = ok(dir.path(), &["sweep", "--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in [
        "--family",
        "--d-from",
        "--d-to",
        "--d-step",
        "--terms",
        "--burn-in",
        "--output",
    ] {
        assert!(text.contains(flag), "{flag}");
    }
}
