//! End-to-end runs of the `bregmin` binary.

use std::path::Path;
use std::process::{Command, Output};

fn bregmin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bregmin"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn compare_shares_instance_and_reports_winner() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("a.json"), r#"{"problem": "phase_retrieval_m1", "seed": 4, "solver": {"max_iters": 150}}"#).unwrap();
    std::fs::write(d.join("b.json"), r#"{"problem": "phase_retrieval_m2", "seed": 4, "solver": {"max_iters": 100}}"#).unwrap();
    let out = bregmin(d, &["compare", "--config-a", "a.json", "--config-b", "b.json", "--output", "cmp.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = stdout(&out);
    assert_eq!(field(&s, "instance_hash_a"), field(&s, "instance_hash_b"));
    assert_eq!(field(&s, "budget"), "100");
    assert!(["a", "b", "tie"].contains(&field(&s, "winner")));
    assert_eq!(field(&s, "certificates_a"), "pass");
    assert_eq!(field(&s, "certificates_b"), "pass");
    let csv = std::fs::read_to_string(d.join("cmp.csv")).unwrap();
    assert!(csv.starts_with("iter,f_a,time_a,f_b,time_b\n"));
}

#[test]
fn compare_rejects_different_instances() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("a.json"), r#"{"problem": "phase_retrieval_m1", "seed": 1}"#).unwrap();
    std::fs::write(d.join("b.json"), r#"{"problem": "phase_retrieval_m2", "seed": 2}"#).unwrap();
    let out = bregmin(d, &["compare", "--config-a", "a.json", "--config-b", "b.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seeds_write_one_file_each() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = bregmin(
        d,
        &["run", "--problem", "robust_pr", "--max-iters", "40", "--seeds", "1,2,3", "--jobs", "2", "--certificates", "--output", "t.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut hashes = Vec::new();
    for s in 1..=3 {
        let csv = std::fs::read_to_string(d.join(format!("t-seed{s}.csv"))).unwrap();
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 42);
        hashes.push(csv.lines().find(|l| l.starts_with("# instance_hash=")).unwrap().to_owned());
    }
    hashes.dedup();
    assert_eq!(hashes.len(), 3);
}

#[test]
fn flags_without_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = bregmin(
        dir.path(),
        &["run", "--problem", "poisson", "--reg", "l1", "--lambda", "0.05", "--max-iters", "5", "--certificates"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = stdout(&out);
    assert!(s.starts_with("iter,time_s,f,lyapunov,breg_step,L_k,tau_k,inner_residual\n"));
    assert!(s.contains("# certificates:"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0.05"));
}

#[test]
fn bad_flag_values_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bregmin(dir.path(), &["run", "--problem", "lasso"]).status.code(), Some(2));
    assert_eq!(bregmin(dir.path(), &["run", "--problem", "poisson", "--jobs", "0"]).status.code(), Some(2));
}
