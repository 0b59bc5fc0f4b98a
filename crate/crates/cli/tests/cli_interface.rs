//! End-to-end checks of the binary: exit codes, config precedence, scheme
//! files, and report output.

use std::process::Command;

fn qclab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qclab"))
}

#[test]
fn list_prints_the_registry() {
    let out = qclab().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "commit-eval",
        "commit-convert",
        "commit-amplify",
        "commit-combine",
        "owsg-transform",
        "owsg-combine",
        "owsg-universal",
        "money-check",
        "money-transform",
        "money-combine",
        "money-clone",
        "unclone-transform",
        "unclone-combine",
        "unclone-game",
        "expand-roundtrip",
        "expand-hybrid",
    ] {
        assert!(text.lines().any(|l| l == name), "missing {name}");
    }
}

#[test]
fn unknown_experiment_exits_one() {
    let out = qclab()
        .args(["run", "no-such-experiment", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_seed_fails_validation() {
    let out = qclab().args(["run", "commit-eval"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("seed required"));
}

#[test]
fn validate_reports_diagnostics() {
    let out = qclab().arg("validate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed required"));
}

#[test]
fn violated_bound_exits_two() {
    // A negative tolerance makes the equality-style checks unsatisfiable.
    let out = qclab()
        .args(["run", "commit-eval", "--seed", "3", "--tol", "-1", "--quiet"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = std::env::temp_dir().join(format!("qclab-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("config.json");
    std::fs::write(
        &config_path,
        r#"{"experiment": "commit-eval", "params": {"scheme": "orthogonal"}, "seed": 5}"#,
    )
    .unwrap();
    let report_path = dir.join("report.json");
    let out = qclab()
        .args([
            "run",
            "commit-eval",
            "--config",
            config_path.to_str().unwrap(),
            "--seed",
            "9",
            "--out",
            report_path.to_str().unwrap(),
            "--quiet",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    // The flag seed overrides the config seed; the config scheme survives.
    assert_eq!(report["seed"], 9);
    assert_eq!(report["params"]["scheme"], "orthogonal");
    assert_eq!(report["metrics"]["hidingTd"], 1.0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn directory_out_appends_json_lines() {
    let dir = std::env::temp_dir().join(format!("qclab-lines-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for seed in ["1", "2"] {
        let out = qclab()
            .args([
                "run",
                "commit-eval",
                "--seed",
                seed,
                "--out",
                dir.to_str().unwrap(),
                "--quiet",
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let lines = std::fs::read_to_string(dir.join("reports.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 2);
    for line in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["experiment"], "commit-eval");
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn scheme_file_is_consumed() {
    let dir = std::env::temp_dir().join(format!("qclab-scheme-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let scheme_path = dir.join("bb84.json");
    let scheme = qclab_cli::schema::CommitmentJson::from_commitment(
        &qclab_core::commit::candidates::bb84(),
    );
    std::fs::write(&scheme_path, serde_json::to_string(&scheme).unwrap()).unwrap();
    let out = qclab()
        .args([
            "commit",
            "eval",
            "--scheme",
            scheme_path.to_str().unwrap(),
            "--seed",
            "4",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"hidingTd\": 0.707106781186547"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn domain_subcommands_map_to_experiments() {
    let cases: &[&[&str]] = &[
        &["owsg", "universal", "--lambda", "2"],
        &["money", "clone-game", "--scheme", "bb84", "--attack", "copy"],
        &["unclone", "normalize", "--scheme", "qotp"],
        &["expand", "hybrid", "--trials", "10", "--m0", "01", "--m1", "10"],
    ];
    for args in cases {
        let out = qclab()
            .args(*args)
            .args(["--seed", "6", "--quiet"])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{:?}: {}",
            args,
            String::from_utf8_lossy(&out.stderr)
        );
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.starts_with("PASS"), "{:?}: {text}", args);
    }
}
