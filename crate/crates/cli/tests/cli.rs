//! End-to-end tests driving the compiled binary: the bound -> check ->
//! curve chain, family-pair workflows, exit codes, and reproducibility.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cancellative"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut p = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    p.push(name);
    p
}

#[test]
fn bound_check_curve_chain() {
    let cert = tmp("chain_cert.txt");
    let out = run(&[
        "bound",
        "--n-intervals",
        "250",
        "--out",
        cert.to_str().unwrap(),
        "--quiet",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(&cert).unwrap();
    assert!(text.starts_with("N=250\n"));
    let final_line = text
        .lines()
        .find(|l| l.starts_with("theorem_bound="))
        .expect("theorem_bound line");
    let bound: f64 = final_line.strip_prefix("theorem_bound=").unwrap().parse().unwrap();
    assert!(bound > 2.25 && bound < 2.3264);

    let out = run(&["check", cert.to_str().unwrap()]);
    assert!(out.status.success());

    let csv = tmp("chain_curve.csv");
    let out = run(&[
        "curve",
        "--cert",
        cert.to_str().unwrap(),
        "--samples",
        "50",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv_text = fs::read_to_string(&csv).unwrap();
    let mut lines = csv_text.lines();
    assert_eq!(lines.next(), Some("x,upper,lower"));
    assert_eq!(lines.count(), 50);
}

#[test]
fn default_bound_reproduces_headline() {
    let cert = tmp("default_cert.txt");
    let out = run(&["bound", "--out", cert.to_str().unwrap(), "--quiet"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(&cert).unwrap();
    assert!(text.starts_with("N=100000\n"));
    let value = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(key))
            .unwrap_or_else(|| panic!("missing {key}"))
            .parse()
            .unwrap()
    };
    assert!((value("final_rho=") - 2.268166).abs() <= 5e-4);
    assert_eq!(value("theorem_bound="), 2.2682);

    let out = run(&["check", cert.to_str().unwrap()]);
    assert!(out.status.success());
}

#[test]
fn bound_output_is_reproducible() {
    let a = tmp("repro_a.txt");
    let b = tmp("repro_b.txt");
    for path in [&a, &b] {
        let out = run(&[
            "bound",
            "--n-intervals",
            "250",
            "--out",
            path.to_str().unwrap(),
            "--quiet",
        ]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn check_rejects_tampered_certificate() {
    let cert = tmp("tamper_cert.txt");
    let out = run(&[
        "bound",
        "--n-intervals",
        "250",
        "--out",
        cert.to_str().unwrap(),
        "--quiet",
    ]);
    assert!(out.status.success());

    let text = fs::read_to_string(&cert).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    // lower the rho_out field of a mid-grid step
    let target = 3 + 120;
    let mut fields: Vec<String> = lines[target].split_whitespace().map(String::from).collect();
    let rho_out: f64 = fields[4].parse().unwrap();
    fields[4] = format!("{:.16e}", rho_out - 1e-4);
    lines[target] = fields.join(" ");
    fs::write(&cert, lines.join("\n") + "\n").unwrap();

    let out = run(&["check", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let diag = String::from_utf8_lossy(&out.stderr);
    assert!(diag.contains("120"), "diagnostics lack the failing step: {diag}");

    // curve refuses to draw from a certificate that fails verification
    let out = run(&["curve", "--cert", cert.to_str().unwrap(), "--samples", "10"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn construct_and_verify_family_files() {
    let triple = tmp("triple.txt");
    let out = run(&["construct", "--triple-blocks", "2", "--out", triple.to_str().unwrap()]);
    assert!(out.status.success());

    let out = run(&["verify", triple.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "cancellative: true\n");

    // cancellative but not recovering: the recovering gate must fail it
    let out = run(&["verify", triple.to_str().unwrap(), "--recovering"]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("cancellative: true"));
    assert!(stdout.contains("recovering: false"));

    let split = tmp("split.txt");
    let out = run(&["construct", "--powerset-split", "4", "2", "--out", split.to_str().unwrap()]);
    assert!(out.status.success());
    let out = run(&["verify", split.to_str().unwrap(), "--recovering"]);
    assert!(out.status.success());

    // construction output is byte-stable
    let again = tmp("split_again.txt");
    let out = run(&["construct", "--powerset-split", "4", "2", "--out", again.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read(&split).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn search_emits_verifiable_witness() {
    let wit = tmp("witness.txt");
    let out = run(&["search", "--n", "3", "--emit", wit.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "value=9\n");

    let out = run(&["verify", wit.to_str().unwrap()]);
    assert!(out.status.success());

    let out = run(&["search", "--n", "2", "--k", "1"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "value=4\n");
}

#[test]
fn phi_prints_json_lines() {
    let out = run(&["phi", "--gamma", "4.5", "--x", "2", "--oracle", "150"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    let main: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(main["regime"], "closed_form");
    let value = main["value"].as_f64().unwrap();
    assert!((value - 0.9182958340544896).abs() < 1e-12);
    let oracle: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert!(oracle["oracle_lower"].as_f64().unwrap() <= value + 1e-9);
    assert!(lines.next().is_none());

    let out = run(&["phi", "--gamma", "2.26", "--x", "3.6"]);
    assert!(out.status.success());
    let main: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stdout).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(main["regime"], "infeasible");
    assert!(main["value"].is_null());
}

#[test]
fn domain_and_usage_errors_exit_2() {
    // gamma below the 2.25 floor is a domain error
    let out = run(&["phi", "--gamma", "2.0", "--x", "2"]);
    assert_eq!(out.status.code(), Some(2));

    // unknown flag is a usage error
    let out = run(&["bound", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));

    // over-large search is a domain error
    let out = run(&["search", "--n", "9"]);
    assert_eq!(out.status.code(), Some(2));

    // unreadable certificate path
    let out = run(&["check", "/nonexistent/cert.txt"]);
    assert_eq!(out.status.code(), Some(2));
}
