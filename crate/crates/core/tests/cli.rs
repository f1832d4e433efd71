use std::process::{Command, Output};

use cvtel::cli::{ReportJson, SweepRow, EXIT_FAILURE, EXIT_OK, EXIT_USAGE, SWEEP_HEADER};

fn cvtel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvtel")).args(args).output().expect("spawn cvtel")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn simulate_bs() {
    let o = cvtel(&["simulate", "bs", "--r", "1"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let j: ReportJson = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((j.mse_x - 2.0).abs() < 1e-10 && (j.mse_y - 2.0).abs() < 1e-10);
    assert!(j.is_teleportation);
    assert_eq!(j.protocol, "bs");
    assert_eq!(j.units, "e^-2r V0");
}

#[test]
fn simulate_czcz_csv() {
    let o = cvtel(&["simulate", "czcz", "--g1", "1", "--g2", "-1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let s = stdout(&o);
    assert!(s.starts_with("field,value\n"));
    assert!(s.contains("\nmse_x,1\n") && s.contains("\nmse_y,1\n"), "{s}");
}

#[test]
fn zero_weight_is_usage_error() {
    let o = cvtel(&["simulate", "czcz", "--g1", "0"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("g1"));
}

#[test]
fn bad_flag_is_usage_error() {
    assert_eq!(cvtel(&["simulate", "bs", "--bogus"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(cvtel(&["simulate", "warp"]).status.code(), Some(EXIT_USAGE));
}

#[test]
fn json_roundtrips_byte_for_byte() {
    for args in [
        vec!["simulate", "hybrid", "--g1", "1.3", "--theta1", "-0.4", "--theta2", "0.9"],
        vec!["simulate", "czcz-optical", "--R", "0.3"],
        vec!["simulate", "hybrid-optical"],
    ] {
        let text = stdout(&cvtel(&args));
        let parsed: ReportJson = serde_json::from_str(&text).unwrap();
        let again = format!("{}\n", serde_json::to_string_pretty(&parsed).unwrap());
        assert_eq!(again, text);
    }
}

#[test]
fn sweep_g1_matches_inverse_square() {
    let o = cvtel(&["sweep", "czcz", "--param", "g1", "--lo", "1", "--hi", "10", "--steps", "10", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some(SWEEP_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 10);
    for row in rows {
        let g: f64 = row[1].parse().unwrap();
        let mx: f64 = row[2].parse().unwrap();
        assert!((mx - 1.0 / (g * g)).abs() < 1e-11);
        assert_eq!(row[4], "true");
        assert_eq!(row[5], "2");
    }
}

#[test]
fn sweep_reflectivity_crosses_two_near_a_third() {
    let o = cvtel(&[
        "sweep", "czcz-optical", "--param", "R", "--lo", "0.01", "--hi", "0.9", "--steps", "90", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let rows: Vec<SweepRow> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 90);
    let cross = rows.windows(2).find(|w| w[0].mse_x < 2.0 && w[1].mse_x >= 2.0).unwrap();
    assert!((cross[0].value - 0.33).abs() < 0.02);
}

#[test]
fn sweep_closed_form_model() {
    let o = cvtel(&[
        "sweep", "czcz-optical", "--param", "R", "--lo", "0.1", "--hi", "0.5", "--steps", "3", "--model", "closed-form",
        "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let s = stdout(&o);
    // (1 + 3R - 2R^2)/(1 + R) at R = 0.1.
    let y: f64 = s.lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!((y - 1.28 / 1.1).abs() < 1e-11);
    assert_eq!(
        cvtel(&["sweep", "czcz", "--param", "g1", "--lo", "1", "--hi", "2", "--steps", "2", "--model", "closed-form"])
            .status
            .code(),
        Some(EXIT_USAGE)
    );
}

#[test]
fn sweep_two_steps_gives_endpoints() {
    let o = cvtel(&["sweep", "bs", "--param", "r", "--lo", "0", "--hi", "1", "--steps", "2", "--format", "csv"]);
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 3);
    assert!(s.contains("\nr,0,2,2,true,2\n") && s.contains("\nr,1,2,2,true,2\n"), "{s}");
}

#[test]
fn sweep_bad_range() {
    for args in [
        ["sweep", "bs", "--param", "r", "--lo", "1", "--hi", "0", "--steps", "5"],
        ["sweep", "bs", "--param", "r", "--lo", "0", "--hi", "1", "--steps", "1"],
    ] {
        assert_eq!(cvtel(&args).status.code(), Some(EXIT_USAGE));
    }
}

#[test]
fn absolute_units() {
    let o = cvtel(&["--absolute", "sweep", "bs", "--param", "r", "--lo", "0", "--hi", "1", "--steps", "2", "--format", "csv"]);
    let s = stdout(&o);
    assert!(s.contains("\nr,0,0.5,0.5,true,0.5\n"), "{s}");
    let j: ReportJson = serde_json::from_str(&stdout(&cvtel(&["simulate", "bs", "--r", "0", "--absolute"]))).unwrap();
    assert_eq!(j.units, "V0");
    assert!((j.mse_x - 0.5).abs() < 1e-12);
}

#[test]
fn crossover_default_and_errors() {
    let o = cvtel(&["crossover", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let s = stdout(&o);
    let r: f64 = s.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((r - 0.33).abs() < 0.01);

    let o = cvtel(&["crossover", "--threshold", "1.5", "--format", "csv"]);
    let r2: f64 = stdout(&o).lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(r2 > 0.0 && r2 < 0.33);

    assert_eq!(cvtel(&["crossover", "--threshold", "0.5"]).status.code(), Some(EXIT_USAGE));
}

#[test]
fn validate_pass_fail_and_determinism() {
    let args = ["validate", "--shots", "20000", "--seed", "5", "--format", "csv"];
    let a = cvtel(&args);
    assert_eq!(a.status.code(), Some(EXIT_OK), "{}", stdout(&a));
    let b = cvtel(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 6);

    let bad = cvtel(&["validate", "--shots", "20000", "--corrupt-gain", "0.1", "--format", "csv"]);
    assert_eq!(bad.status.code(), Some(EXIT_FAILURE));
    assert!(stdout(&bad).contains(",fail,"));

    assert_eq!(cvtel(&["validate", "--shots", "50"]).status.code(), Some(EXIT_USAGE));
}

#[test]
fn out_file_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"spec_version": "1", "format": "csv", "g1": 2.0, "r": 0.5}"#).unwrap();

    let o = cvtel(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "simulate", "czcz"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert!(o.stdout.is_empty());
    let s = std::fs::read_to_string(&out).unwrap();
    assert!(s.contains("param.g1,2\n") && s.contains("param.g2,-2\n") && s.contains("mse_x,0.25\n"), "{s}");

    // Flags override the config; irrelevant config keys are ignored.
    let o = cvtel(&["--config", cfg.to_str().unwrap(), "simulate", "bs", "--format", "json"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let j: ReportJson = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j.params["r"], 0.5);

    std::fs::write(&cfg, r#"{"spec_version": "0"}"#).unwrap();
    assert_eq!(cvtel(&["--config", cfg.to_str().unwrap(), "crossover"]).status.code(), Some(EXIT_USAGE));
    std::fs::write(&cfg, r#"{"spec_version": "1", "colour": 3}"#).unwrap();
    assert_eq!(cvtel(&["--config", cfg.to_str().unwrap(), "crossover"]).status.code(), Some(EXIT_USAGE));
}
