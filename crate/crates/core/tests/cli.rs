use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rejsched")).args(args).output().unwrap()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn run_matches_golden_report() {
    let a = bin(&["run", &fixture("e1.jsonl")]);
    let b = bin(&["run", &fixture("e1.jsonl")]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, std::fs::read(fixture("e1_report.json")).unwrap());
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json").display().to_string();
    let out = bin(&["run", &fixture("e1.jsonl"), "--out", &path]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(fixture("e1_report.json")).unwrap());
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.jsonl", "{\"machines\":1,\"epsilon\":\"1/2\"}\n{\"id\":0,\"r\":0\n");
    let out = bin(&["run", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert_eq!(bin(&["run"]).status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(bin(&["run", &fixture("e1.jsonl"), "--epsilon", "3/2"]).status.code(), Some(2));
}

#[test]
fn empty_instance_passes_vacuously() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.jsonl", "{\"machines\":2,\"epsilon\":\"1/4\"}\n");
    let out = bin(&["verify", &empty]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["totals"]["alg_weighted_flow"]["exact"], "0/1");
    assert_eq!(r["all_pass"], true);
}

#[test]
fn verify_adds_monotonicity() {
    let out = bin(&["verify", &fixture("e1.jsonl")]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"monotonicity"), "{names:?}");
}

#[test]
fn gen_is_deterministic() {
    let args = ["gen", "--n", "12", "--m", "3", "--seed", "9", "--p-range", "1..5", "--w-range", "2-4", "--epsilon", "1/3"];
    let a = bin(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, bin(&args).stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(text.starts_with("{\"machines\":3,\"epsilon\":\"1/3\"}"));
}

#[test]
fn config_file_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.conf", "# workload\nn = 4\nm = 1\nseed = 5\nepsilon = 1/4\n");
    let from_cfg = bin(&["gen", "--config", &cfg]);
    assert_eq!(from_cfg.status.code(), Some(0));
    let text = String::from_utf8(from_cfg.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.contains("\"1/4\""));

    let flagged = bin(&["gen", "--config", &cfg, "--n", "2"]);
    assert_eq!(String::from_utf8(flagged.stdout).unwrap().lines().count(), 3);

    let bad = write(dir.path(), "bad.conf", "colour = blue\n");
    assert_eq!(bin(&["gen", "--config", &bad]).status.code(), Some(2));
}

#[test]
fn oracle_reports_idling_optimum() {
    let out = bin(&["oracle", &fixture("idling.jsonl")]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["oracle"]["opt_cost"]["exact"], "112/1");
    assert_eq!(r["oracle"]["theorem_bound"]["exact"], "330/1");
}

#[test]
fn oracle_single_job_ratio_one() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "one.jsonl", "{\"machines\":2,\"epsilon\":\"1/2\"}\n{\"id\":0,\"r\":3,\"w\":2,\"p\":{\"m0\":4,\"m1\":6}}\n");
    let r = json(&bin(&["oracle", &one]));
    assert_eq!(r["oracle"]["empirical_ratio"]["exact"], "1/1");
}

#[test]
fn oracle_too_large_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let gen = bin(&["gen", "--n", "9", "--m", "1"]);
    let big = write(dir.path(), "big.jsonl", &String::from_utf8(gen.stdout).unwrap());
    let out = bin(&["oracle", &big]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("oracle limit"));

    let warned = bin(&["oracle", &fixture("e1.jsonl"), "--oracle-limit", "9"]);
    assert_eq!(warned.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&warned.stderr).contains("warning"));
}

#[test]
fn sweep_rows_per_epsilon() {
    let args = ["sweep", "--n", "10", "--m", "2", "--count", "6", "--epsilons", "1/4,1/2", "--oracle", "--oracle-limit", "5"];
    let out = bin(&args);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(out.stdout, bin(&args).stdout);
    let r = json(&out);
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["count"], 6);
    assert_eq!(rows[0]["all_pass"], 6);
    // n = 10 is above the limit, so no oracle runs
    assert_eq!(rows[0]["oracle_runs"], 0);

    let single = json(&bin(&["sweep", "--n", "5", "--count", "1", "--epsilon", "1/2", "--seed", "4", "--oracle"]));
    assert_eq!(single["rows"].as_array().unwrap().len(), 1);
    assert_eq!(single["rows"][0]["oracle_runs"], 1);
}
