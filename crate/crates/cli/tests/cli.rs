use std::fs;
use std::process::{Command, Output};

const C1: &str = "kind=ag-c1;curve=elliptic:q=13,a=2,b=5;t=2;r=2;s=2;m=2;n=2;N=9;seed=1";

fn agdmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agdmm"))
        .args(args)
        .output()
        .expect("spawn agdmm")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn curves_table() {
    let o = agdmm(&["curves"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(
        out.lines()
            .any(|l| l.starts_with("hermitian:u=3\t9\t3\t28\t<3,4>\t6\t{1,2,5}")),
        "{out}"
    );
    assert!(out
        .lines()
        .any(|l| l.starts_with("rational:q=11\t11\t0\t12")));
}

#[test]
fn build_prints_parameters() {
    let o = agdmm(&[
        "build",
        "--spec",
        "kind=ag-c1;curve=hermitian:u=2;t=2;r=2;s=2;m=2;n=2;N=6",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("R=6 K=5 N=6"), "{out}");
    assert!(out.contains("all hold"));
}

#[test]
fn build_errors_exit_two() {
    let rs = agdmm(&[
        "build",
        "--spec",
        "kind=rs-poly;curve=elliptic:q=5,a=1,b=1;t=2;r=2;s=2;m=2;n=2;N=5",
    ]);
    assert_eq!(rs.status.code(), Some(2));
    let c2 = agdmm(&[
        "build",
        "--spec",
        "kind=ag-c2;curve=hermitian:u=3;t=4;r=4;s=4;m=2;n=2;N=20",
    ]);
    assert_eq!(c2.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&c2.stderr).contains("pole number"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(agdmm(&["nonsense"]).status.code(), Some(1));
    assert_eq!(
        agdmm(&["build", "--spec", "kind=ag-c9;curve=rational:q=5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(agdmm(&["build"]).status.code(), Some(1));
    assert_eq!(agdmm(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, format!("spec={C1}\ncolour=blue\n")).unwrap();
    assert_eq!(
        agdmm(&["build", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn emitted_config_rebuilds_same_instance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    let o = agdmm(&[
        "build",
        "--spec",
        C1,
        "--emit-config",
        "--out",
        cfg.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let direct = stdout(&agdmm(&["build", "--spec", C1]));
    let via = stdout(&agdmm(&["build", "--config", cfg.to_str().unwrap()]));
    assert_eq!(direct, via);
}

#[test]
fn run_survives_adversarial_erasures() {
    let o = agdmm(&[
        "run",
        "--spec",
        C1,
        "--model",
        "adversarial:1,4",
        "--seed",
        "3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["decoded_equals_oracle"], true);
    assert_eq!(v["straggler_model"]["model"], "adversarial");
    let survivors = v["survivors"].as_array().unwrap();
    assert_eq!(survivors.len(), 6);
    assert!(!survivors.iter().any(|w| w == 1 || w == 4));
}

#[test]
fn run_too_many_erasures_is_runtime_error() {
    let o = agdmm(&["run", "--spec", C1, "--model", "adversarial:0,1,2,3"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn run_csv_with_delay_model() {
    let o = agdmm(&[
        "run",
        "--spec",
        C1,
        "--model",
        "delay:0.5,2@1",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("scheme,seed,survivors"));
    assert!(lines.next().unwrap().contains(",true,"));
}

#[test]
fn sweep_succeeds_from_threshold() {
    let o = agdmm(&["sweep", "--spec", C1, "--trials", "40"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row = out
        .lines()
        .find(|l| l.starts_with("6,"))
        .expect("row for k=R");
    assert!(row.ends_with(",1.0") || row.ends_with(",1"), "{row}");
    assert!(out.lines().any(|l| l.starts_with("9,1,1,")));
}

#[test]
fn compare_writes_csv() {
    let o = agdmm(&[
        "compare",
        "--curve",
        "hermitian:u=2",
        "--p",
        "1..2",
        "--mn",
        "2x2",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("curve,scheme,ours,prior,source"));
    assert!(out.contains("hermitian:u=2,matdot p=2,5,"));
    assert_eq!(
        agdmm(&["compare", "--curve", "hermitian:u=2", "--mn", "2by2"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn selftest_reports_every_criterion() {
    let o = agdmm(&["selftest"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert_eq!(
        out.lines().filter(|l| l.starts_with("criterion")).count(),
        12
    );
    assert_eq!(agdmm(&["selftest", "--strict"]).status.code(), Some(3));
}
