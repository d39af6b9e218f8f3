use std::path::Path;
use std::process::{Command, Output};

fn cachelink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cachelink"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = cachelink(args);
    assert!(out.status.success(), "{args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn run_writes_documented_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    ok(&[
        "run",
        "--seed",
        "4",
        "--slots",
        "40",
        "--scheduler",
        "bp-matching",
        "--set",
        "topology.max_users=5",
        "--set",
        "dump.channel_slot=3",
        "--set",
        "dump.marginals_slot=2",
        "--out",
        out.to_str().unwrap(),
    ]);

    let metrics = read(&out.join("metrics.csv"));
    let header = metrics.lines().next().unwrap();
    assert!(header.starts_with(
        "slot,total_backlog,served,arrivals,backlog_after,active_links,total_power,utility,oracle_utility,raw_conflicts,proposals,failed_d5,failed_d10,failed_d20,q0"
    ));
    assert!(header.ends_with(",schedule"));
    assert_eq!(metrics.lines().count(), 41);

    let summary: serde_json::Value = serde_json::from_str(&read(&out.join("summary.json"))).unwrap();
    assert_eq!(summary["slots"], 40);
    assert_eq!(summary["seed"], 4);
    assert_eq!(summary["scheduler"], "bp-matching");
    assert!(summary["stability"]["stable"].is_boolean());

    assert!(read(&out.join("channel_t3.csv")).starts_with("node,user,distance_m,gain"));
    let trace: serde_json::Value = serde_json::from_str(&read(&out.join("bp_marginals_t2.json"))).unwrap();
    assert_eq!(trace["slot"], 2);
    assert_eq!(trace["iterations"].as_array().unwrap().len(), 10);
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&["run", "--seed", "9", "--slots", "60", "--set", "topology.max_users=6", "--out", out.to_str().unwrap()]);
        (std::fs::read(out.join("metrics.csv")).unwrap(), std::fs::read(out.join("summary.json")).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn generated_topology_file_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let topo = dir.path().join("scenario.json");
    ok(&["gen-topology", "--seed", "2", "--set", "topology.scenario=\"d2d\"", "--set", "topology.side=250.0", "--out", topo.to_str().unwrap()]);

    let config = dir.path().join("from_file.toml");
    std::fs::write(&config, "seed = 2\nslots = 30\n\n[topology]\nfile = \"scenario.json\"\n").unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["run", "--config", config.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    ok(&[
        "run",
        "--seed",
        "2",
        "--slots",
        "30",
        "--set",
        "topology.scenario=\"d2d\"",
        "--set",
        "topology.side=250.0",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(read(&a.join("metrics.csv")), read(&b.join("metrics.csv")));
    assert_eq!(read(&a.join("topology.json")), read(&topo));
}

#[test]
fn compare_and_sweep_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cmp = dir.path().join("cmp");
    ok(&[
        "compare",
        "--slots",
        "30",
        "--set",
        "topology.max_users=4",
        "--scheduler",
        "bp-matching",
        "--against",
        "exhaustive",
        "--out",
        cmp.to_str().unwrap(),
    ]);
    let both: serde_json::Value = serde_json::from_str(&read(&cmp.join("compare.json"))).unwrap();
    assert_eq!(both["first"]["scheduler"], "bp-matching");
    assert_eq!(both["second"]["scheduler"], "exhaustive");
    assert!(cmp.join("exhaustive/metrics.csv").exists());

    let sw = dir.path().join("sweep");
    ok(&[
        "sweep",
        "--slots",
        "30",
        "--set",
        "topology.max_users=4",
        "--param",
        "v",
        "--values",
        "0.5,2",
        "--seeds",
        "1,2",
        "--out",
        sw.to_str().unwrap(),
    ]);
    let table = read(&sw.join("sweep.csv"));
    assert_eq!(table.lines().count(), 3);
    assert!(table.starts_with("parameter,value,runs,"));
}

#[test]
fn bad_input_is_rejected() {
    assert!(!cachelink(&["run", "--scheduler", "greedy"]).status.success());
    assert!(!cachelink(&["run", "--set", "phy.no_such_key=1", "--slots", "1"]).status.success());
    assert!(!cachelink(&["run", "--set", "phy.power_levels=0", "--slots", "1"]).status.success());
    let err = cachelink(&["run", "--scheduler", "cluster1", "--set", "shadow_oracle=true", "--slots", "1"]);
    assert!(!err.status.success());
}
