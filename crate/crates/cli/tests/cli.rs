use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mapf-local"))
        .args(args)
        .current_dir(dir)
        .env_remove("WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const C3: &str = r#"{"nodes":3,"edges":[[0,1],[1,2],[2,0]],"agents":[{"start":0,"target":2}]}"#;

#[test]
fn generate_plan_improve_validate() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let gen = run(d, &["gen", "--nodes", "20", "--edges", "80", "--agents", "3", "--seed", "7", "--out", "inst.json"]);
    assert!(gen.status.success(), "{gen:?}");
    let text = std::fs::read_to_string(d.join("inst.json")).unwrap();
    assert!(text.contains("\"seed\":7"));

    let init = run(d, &["plan-initial", "--instance", "inst.json", "--out", "f0.json"]);
    assert!(init.status.success(), "{init:?}");
    assert_eq!(run(d, &["validate", "--instance", "inst.json", "--plan", "f0.json"]).status.code(), Some(0));

    let imp = run(
        d,
        &["improve", "--instance", "inst.json", "--plan", "f0.json", "--out", "f1.json", "--stats", "stats.json"],
    );
    assert!(imp.status.success(), "{imp:?}");
    let check = run(d, &["validate", "--instance", "inst.json", "--plan", "f1.json"]);
    assert_eq!(check.status.code(), Some(0));
    assert!(stdout(&check).starts_with("valid"));

    let stats: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("stats.json")).unwrap()).unwrap();
    assert!(stats["final_length"].as_u64().unwrap() <= stats["initial_length"].as_u64().unwrap());
    assert_eq!(stats["distance"], "summin");
    assert!(stats["stats"]["states_expanded"].as_u64().is_some());
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    for out in ["a.json", "b.json"] {
        let o = run(d, &["gen", "--nodes", "12", "--edges", "30", "--agents", "2", "--seed", "99", "--out", out]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(d.join("a.json")).unwrap(), std::fs::read(d.join("b.json")).unwrap());
}

#[test]
fn improve_removes_interior_wait() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    std::fs::write(d.join("c3.json"), C3).unwrap();
    std::fs::write(d.join("f0.json"), r#"{"steps":[[[0,1]],[null],[[1,2]]]}"#).unwrap();
    let o = run(d, &["improve", "--instance", "c3.json", "--plan", "f0.json", "--out", "f1.json"]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(
        std::fs::read_to_string(d.join("f1.json")).unwrap().trim(),
        r#"{"steps":[[[0,1]],[[1,2]]]}"#
    );
    assert!(stdout(&o).contains("33.33%"));

    let oracle = run(d, &["oracle", "--instance", "c3.json"]);
    assert_eq!(oracle.status.code(), Some(0));
    assert_eq!(stdout(&oracle).trim(), "optimal makespan 2");
}

#[test]
fn domain_and_usage_errors() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    std::fs::write(d.join("c3.json"), C3).unwrap();
    std::fs::write(d.join("short.json"), r#"{"steps":[[[0,1]]]}"#).unwrap();

    let invalid = run(d, &["validate", "--instance", "c3.json", "--plan", "short.json"]);
    assert_eq!(invalid.status.code(), Some(1));
    assert!(stdout(&invalid).starts_with("invalid"));

    let infeasible = run(d, &["improve", "--instance", "c3.json", "--plan", "short.json", "--out", "x.json"]);
    assert_eq!(infeasible.status.code(), Some(1));
    assert!(!d.join("x.json").exists());

    let missing = run(d, &["validate", "--instance", "nope.json", "--plan", "short.json"]);
    assert_eq!(missing.status.code(), Some(1));

    std::fs::write(d.join("bad.json"), r#"{"nodes":3,"edges":[],"agents":[{"start":0,"target":0},{"start":0,"target":1}]}"#)
        .unwrap();
    assert_eq!(run(d, &["oracle", "--instance", "bad.json"]).status.code(), Some(1));

    assert_eq!(run(d, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(d, &["improve", "--instance", "c3.json"]).status.code(), Some(2));
    assert_eq!(
        run(d, &["improve", "--instance", "c3.json", "--plan", "short.json", "--out", "y.json", "--distance", "euclid"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(d, &["bench", "--grid", "nodes=5", "--csv", "b.csv"]).status.code(), Some(2));
}

#[test]
fn planner_failure_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    // A full directed triangle can only rotate.
    std::fs::write(
        d.join("stuck.json"),
        r#"{"nodes":3,"edges":[[0,1],[1,2],[2,0]],"agents":[{"start":0,"target":1},{"start":1,"target":0},{"start":2,"target":2}]}"#,
    )
    .unwrap();
    let o = run(d, &["plan-initial", "--instance", "stuck.json", "--out", "p.json", "--order", "random", "--retries", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(run(d, &["oracle", "--instance", "stuck.json"]).status.code(), Some(1));
}

#[test]
fn bench_writes_deterministic_csv() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let args = |csv: &'static str| {
        vec!["bench", "--grid", "nodes=20..30:10,agents=2..3", "--reps", "3", "--seed", "4", "--csv", csv]
    };
    assert!(run(d, &args("a.csv")).status.success());
    let b = Command::new(env!("CARGO_BIN_EXE_mapf-local"))
        .args(args("b.csv"))
        .args(["--workers", "1"])
        .current_dir(d)
        .output()
        .unwrap();
    assert!(b.status.success());

    let strip = |name: &str| -> Vec<String> {
        std::fs::read_to_string(d.join(name))
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    let a = strip("a.csv");
    assert_eq!(a[0], "nodes,edges,agents,seed,radius,distance,init_len,final_len,pct_decrease,outer_iters,states_expanded");
    assert_eq!(a, strip("b.csv"));
    let summary = std::fs::read_to_string(d.join("a.summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5);

    let empty = run(d, &["bench", "--grid", "nodes=20,agents=2", "--reps", "0", "--csv", "e.csv"]);
    assert!(empty.status.success());
    assert_eq!(std::fs::read_to_string(d.join("e.csv")).unwrap().lines().count(), 1);
}
