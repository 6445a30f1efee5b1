use std::process::Command;

fn starheat() -> Command {
    Command::new(env!("CARGO_BIN_EXE_starheat"))
}

#[test]
fn check_reports_kirchhoff() {
    let out = starheat().args(["check", "--xi", "0.7853981633974483"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("positive ✓"));
    assert!(text.contains("contractive ✓"));
    assert!(text.contains("irreducible ✓"));
}

#[test]
fn planar_sweep_writes_512_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let status = starheat()
        .args(["sweep", "--planar", "--step", "0.006135923151542565", "--csv"])
        .arg(&csv)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    assert_eq!(reader.headers().unwrap().get(0), Some("xi"));
    assert_eq!(reader.records().count(), 512);
}

#[test]
fn spherical_sweep_with_contours() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("levels.svg");
    let status = starheat()
        .args(["sweep", "--spherical", "--step", "0.09817477042468103", "--levels", "0.5,1", "--svg"])
        .arg(&svg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
    assert!(svg.with_extension("csv").exists());
}

#[test]
fn harness_finds_witness_for_anti_kirchhoff() {
    let out = starheat()
        .args(["harness", "--xi", "2.356194490192345", "--predicate", "positivity"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("matrix_level=false"));
    assert!(text.contains("WitnessFound"));
}

#[test]
fn simulate_and_spectrum_write_csv() {
    let out = starheat()
        .args(["simulate", "--xi", "0.7853981633974483", "--cells", "4", "--t-end", "0.1", "--dt", "0.05"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,edge,node,re,im"));

    let out = starheat().args(["spectrum", "--edges", "3", "--cells", "8", "--count", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn converge_prints_table() {
    let out = starheat().args(["converge", "--cells", "16", "--n-max", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,proj_gap,eig_gap,resolvent_gap"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn bad_input_exits_two() {
    let out = starheat().args(["check", "--S", "{\"dim\":3}"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = starheat().args(["simulate", "--cells", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
