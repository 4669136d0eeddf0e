use std::path::PathBuf;
use std::process::{Command, Output};

use structcodes_cli::netfile::{EdgeJson, NetworkFile};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_structcodes")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn capacities(file: &NetworkFile) -> Vec<(u32, f64)> {
    file.edges_nn
        .iter()
        .map(|e| match e {
            EdgeJson::BitPipe { id, capacity, .. } => (*id, *capacity),
            other => panic!("transform left a non-pipe edge: {other:?}"),
        })
        .collect()
}

#[test]
fn binary_butterfly_transform_gives_mac_edges_one_minus_entropy() {
    let o = run(&["network", "transform", fixture("butterfly_binary.json").to_str().unwrap()]);
    assert!(o.status.success());
    let t = NetworkFile::parse(&stdout(&o)).unwrap();
    let h = -(0.11f64 * 0.11f64.log2() + 0.89 * 0.89f64.log2());
    for (id, c) in capacities(&t) {
        let want = if (5..=7).contains(&id) { 1.0 - h } else { 1.0 };
        assert!((c - want).abs() < 1e-12, "edge {id}: {c}");
    }
    assert_eq!(t.mac_relabel.len(), 1);
    // the output is itself a valid network file
    let path = std::env::temp_dir().join(format!("structcodes-transform-{}.json", std::process::id()));
    std::fs::write(&path, stdout(&o)).unwrap();
    assert!(run(&["network", "validate", path.to_str().unwrap()]).status.success());
    std::fs::remove_file(path).ok();
}

#[test]
fn fig7_transform_has_three_relays_with_linear_processing_rates() {
    let o = run(&["network", "transform", fixture("fig7.json").to_str().unwrap()]);
    assert!(o.status.success());
    let t = NetworkFile::parse(&stdout(&o)).unwrap();
    let relays: Vec<u32> = t.mac_relabel.iter().map(|r| r.node).collect();
    assert_eq!(relays, [9, 10, 11]);
    // J = 2, 2, 3 inputs with P = 10 and noise 1, 2, 0.5
    let rate = |j: f64, n: f64| 0.5 * (1.0 / j + 10.0 / n).log2();
    let caps = capacities(&t);
    for (mac_edges, r) in [(&[10u32, 11, 20][..], rate(2.0, 1.0)), (&[12, 13, 21], rate(2.0, 2.0)), (&[14, 15, 16, 22], rate(3.0, 0.5))] {
        for id in mac_edges {
            let c = caps.iter().find(|e| e.0 == *id).unwrap().1;
            assert!((c - r).abs() < 1e-12, "edge {id}: {c} vs {r}");
        }
    }
}

#[test]
fn figure4_preset_and_fixture_agree() {
    let a = run(&["rates", "--preset", "figure4"]);
    let b = run(&["rates", "--config", fixture("figure4.json").to_str().unwrap()]);
    assert!(a.status.success() && b.status.success());
    let body = |s: String| s.lines().filter(|l| !l.starts_with("# config")).collect::<Vec<_>>().join("\n");
    assert_eq!(body(stdout(&a)), body(stdout(&b)));
    assert!(stdout(&a).contains("# crossover_snr: 1.5"));
    assert_eq!(stdout(&a).lines().filter(|l| !l.starts_with('#')).count(), 201);
}

#[test]
fn exit_codes() {
    let bad = std::env::temp_dir().join(format!("structcodes-bad-{}.json", std::process::id()));
    std::fs::write(&bad, "{\n  \"nodes\": [1, 2],\n  \"source\": 1,,\n}").unwrap();
    let o = run(&["network", "validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    std::fs::remove_file(&bad).ok();

    assert_eq!(run(&["simulate", "korner-marton"]).status.code(), Some(2), "missing seed");
    assert_eq!(run(&["simulate", "korner-marton", "--seed", "1", "--param", "nn=3"]).status.code(), Some(2));
    assert_eq!(run(&["rates", "--preset", "figure4", "--param", "bogus=1"]).status.code(), Some(2));
    let guard = run(&["simulate", "gaussian-sum", "--seed", "1", "--param", "power=0.2", "--param", "k=10"]);
    assert_eq!(guard.status.code(), Some(3));
    let unit = fixture("butterfly_unit.json");
    assert_eq!(run(&["network", "code", unit.to_str().unwrap(), "--q", "2"]).status.code(), Some(3), "q must exceed L");
    let o = run(&["network", "maxflow", unit.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("5,2\n6,2\n"));
}

#[test]
fn json_output_and_thread_cap() {
    let o = Command::new(env!("CARGO_BIN_EXE_structcodes"))
        .args(["simulate", "--config", fixture("korner_marton.json").to_str().unwrap(), "--trials", "20", "--format", "json"])
        .env("STRUCTCODES_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metadata"]["config"]["trials"], 20);
    assert_eq!(v["columns"]["kind"].as_array().unwrap().len(), 21);
    let bad = Command::new(env!("CARGO_BIN_EXE_structcodes"))
        .args(["simulate", "korner-marton", "--seed", "1", "--trials", "2"])
        .env("STRUCTCODES_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
