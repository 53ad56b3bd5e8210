//! End-to-end tests of the `bp` binary: output shapes, exit codes, and the
//! worker-count independence criterion.

use std::process::{Command, Output};

fn bp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = bp(args);
    assert!(
        out.status.success(),
        "bp {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 output")
}

#[test]
fn acceptance_12_output_independent_of_worker_count() {
    let base = [
        "fill", "--p", "0.3", "--size", "4", "--trials", "50000", "--seed", "42", "--model",
        "modified",
    ];
    for format in ["json", "csv"] {
        let one = bp(&[&base[..], &["--out", format, "--workers", "1"]].concat());
        let eight = bp(&[&base[..], &["--out", format, "--workers", "8"]].concat());
        assert!(one.status.success() && eight.status.success());
        let identical = one.stdout == eight.stdout;
        if format == "json" {
            println!(
                "acceptance 12 [workers] {}: fill {format} output byte-identical for \
                 --workers 1 and --workers 8 ({} bytes)",
                if identical { "PASS" } else { "FAIL" },
                one.stdout.len()
            );
        }
        assert!(identical, "{format} output differs between worker counts");
    }
}

#[test]
fn fill_json_reports_the_exact_value() {
    let text = stdout(&[
        "fill", "--p", "0.5", "--size", "2", "--trials", "100000", "--seed", "42", "--model",
        "modified", "--out", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&text).expect("valid json");
    assert_eq!(v["command"], "fill");
    assert_eq!(v["seed"], 42);
    assert_eq!(v["results"]["exact"], 0.4375);
    let (lo, hi) = (
        v["results"]["ci_low"].as_f64().unwrap(),
        v["results"]["ci_high"].as_f64().unwrap(),
    );
    assert!(lo <= 0.4375 && 0.4375 <= hi, "CI [{lo}, {hi}] misses 7/16");
    assert!(v["version"].is_string());
}

#[test]
fn fill_csv_has_the_contract_columns() {
    let text = stdout(&[
        "fill", "--p", "0.2", "--size", "3", "--trials", "2000", "--seed", "7", "--model",
        "classical", "--out", "csv", "--levels", "2,3",
    ]);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "p,size,trials,successes,estimate,ci_low,ci_high,exact,union_bound_log,seed"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 10);
    assert_eq!(row[0], "0.2");
    assert_eq!(row[1], "3");
    assert_eq!(row[9], "7");
    assert!(!row[7].is_empty(), "exact column filled for 9 cells");
    assert!(!row[8].is_empty(), "union bound requested via --levels");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = [
        "tau", "--p", "0.25", "--box-side", "51", "--trials", "10", "--seed", "9", "--out",
        "json",
    ];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn tau_csv_shape_and_summary() {
    let text = stdout(&[
        "tau", "--p", "1.0", "--box-side", "5", "--trials", "3", "--seed", "1", "--out", "csv",
    ]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "trial,tau,p_log_tau");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,0,"));
}

#[test]
fn bound_csv_header_matches_the_contract() {
    let text = stdout(&[
        "bound", "--p-grid", "0.2,0.3", "--levels", "2,4", "--m", "1", "--b", "6", "--out",
        "csv",
    ]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "p,B,union_bound_log,proposition_rhs_log,theorem_rhs_log,N,m_effective"
    );
    assert_eq!(lines.len(), 3);
    for row in &lines[1..] {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 7);
        assert!(fields[2].parse::<f64>().unwrap() < 0.0);
    }
}

#[test]
fn lambda_text_reports_value_and_error() {
    let text = stdout(&["lambda", "--tol", "1e-9"]);
    assert!(text.contains("lambda = 1.644934066"));
    assert!(text.contains("|lambda - pi^2/6| ="));
}

#[test]
fn events_roundtrip_subcommand() {
    let text = stdout(&[
        "events",
        "reconstruct",
        "--schedule",
        "2,3,4,6,8",
        "--placement-seed",
        "11",
    ]);
    let v: serde_json::Value = serde_json::from_str(&text).expect("valid json");
    assert_eq!(v["results"]["matches"], true);
    assert_eq!(v["results"]["reconstructed"], "(2,3,4,6,8)");
}

#[test]
fn render_emits_svg() {
    let text = stdout(&[
        "render", "--p", "0.3", "--box", "12", "--seed", "5", "--cell-px", "4", "--color-by",
        "time",
    ]);
    assert!(text.starts_with("<svg"));
    assert!(text.contains("stroke=\"#000000\""), "initial cells outlined");
    assert!(text.trim_end().ends_with("</svg>"));
}

#[test]
fn verify_suite_exit_codes() {
    let good = bp(&["verify", "--suite", "oracle", "--seed", "42"]);
    assert_eq!(good.status.code(), Some(0));
    let text = String::from_utf8(good.stdout).unwrap();
    assert!(text.contains("suite oracle: ok"));

    let unknown = bp(&["verify", "--suite", "nonsense"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let bad_flag = bp(&["fill", "--p", "0.5", "--no-such-flag"]);
    assert_eq!(bad_flag.status.code(), Some(2));

    let bad_p = bp(&["fill", "--p", "1.5", "--size", "2", "--trials", "10"]);
    assert_eq!(bad_p.status.code(), Some(2));

    let bad_tol = bp(&["lambda", "--tol", "1e-30"]);
    assert_eq!(bad_tol.status.code(), Some(2));

    let even_box = bp(&["tau", "--p", "0.2", "--box-side", "10", "--trials", "1"]);
    assert_eq!(even_box.status.code(), Some(2));
}
