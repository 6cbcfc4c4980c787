use std::process::{Command, Output};

fn nicfdim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nicfdim")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn nicf_expand_prints_digits() {
    let o = nicfdim(&["nicf", "expand", "3/10", "--digits", "5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains('3'));
}

#[test]
fn bad_alphabet_reports_offset_and_exit_2() {
    let o = nicfdim(&["dim", "--alphabet", "3,2"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("|b| ≥ 3"), "{err}");
}

#[test]
fn unknown_ledger_case_lists_ids() {
    let o = nicfdim(&["ledger", "--case", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("case_esti") && err.contains("lemma_2_6"), "{err}");
}

#[test]
fn pressure_csv_header_and_divergent_rows() {
    let o = nicfdim(&["pressure", "--alphabet", "absmin:3:6", "--t-grid", "1/4:1:3/4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,pressure_lo,pressure_hi"));
    let first = lines.next().unwrap();
    assert!(first.ends_with("inf,inf"), "{first}");
    assert_eq!(lines.count(), 1);
}

#[test]
fn pressure_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let o = nicfdim(&["pressure", "--alphabet", "-3,3", "--t-grid", "1/2:1/2:1", "--csv", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("t,pressure_lo,pressure_hi\n"));
}

#[test]
fn dim_exit_code_tracks_tolerance() {
    let ok = nicfdim(&["dim", "--alphabet", "-3,3", "--depth", "10", "--tol", "0.05"]);
    assert_eq!(ok.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert!(v["lo"].is_string() || v["lo"].is_number());
    let tight = nicfdim(&["dim", "--alphabet", "-3,3", "--depth", "2", "--tol", "1e-9"]);
    assert_eq!(tight.status.code(), Some(3));
}

#[test]
fn appendix_csv_is_contained() {
    let o = nicfdim(&["appendix", "--example", "cycle4", "--t-grid", "1/5:1/2:3/10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("vertex,t,closed_lo,closed_hi,enclosure_lo,enclosure_hi,contained\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with("true")));
}

#[test]
fn help_exits_zero() {
    assert!(nicfdim(&["--help"]).status.success());
    assert_eq!(nicfdim(&["frobnicate"]).status.code(), Some(2));
}
