use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn idesign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idesign")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn gen_then_design_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let out = idesign(&["gen", "--n", "12", "--count", "3", "--seed", "4", "--out", s(dir.path())]);
    assert_eq!(code(&out), 0);
    let graph = dir.path().join("instance_0001.graph");
    assert!(graph.exists() && dir.path().join("instance_0002.graph").exists());

    let report = json(&idesign(&["design", "--graph", s(&graph), "--k", "2", "--estimator", "exact"]));
    let targets = report["targets"].as_array().unwrap();
    assert_eq!(targets.len(), 2);
    assert_eq!(report["round_gains"].as_array().unwrap().len(), 2);
    assert!(report["evaluations_performed"].as_u64().unwrap() > 0);
    let ratio = report["ratio"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&ratio));
    assert!(report["config"].is_object() && report["objective"].is_object());

    // the same targets scored directly give the same objective
    let list = targets.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",");
    let eval = json(&idesign(&["eval", "--graph", s(&graph), "--targets", &list, "--estimator", "exact"]));
    assert_eq!(eval["objective"]["value"], report["objective"]["value"]);
    assert_eq!(eval["ratio"].as_f64().unwrap(), ratio);

    // runs are reproducible
    let again = json(&idesign(&["design", "--graph", s(&graph), "--k", "2", "--estimator", "exact"]));
    assert_eq!(again, report);
}

#[test]
fn design_writes_to_file_with_every_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "p4.graph", "# pdag n=4\n0 - 1\n1 - 2\n2 - 3\n");
    for alg in ["greedy", "lazy", "rand", "maxdeg", "brute"] {
        let out = dir.path().join(format!("{alg}.json"));
        let run = idesign(&["design", "--graph", &graph, "--k", "1", "--algorithm", alg, "--out", s(&out), "--samples", "50"]);
        assert_eq!(code(&run), 0, "{alg}: {}", String::from_utf8_lossy(&run.stderr));
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(v["targets"].as_array().unwrap().len(), 1);
        assert_eq!(v["undirected_edges"], 3);
        assert!(v["ratio"].is_null());
    }
}

#[test]
fn mec_count_and_sample() {
    let dir = tempfile::tempdir().unwrap();
    let k4 = write(dir.path(), "k4.graph", "# pdag n=4\n0 - 1\n0 - 2\n0 - 3\n1 - 2\n1 - 3\n2 - 3\n");
    let v = json(&idesign(&["mec", "count", "--graph", &k4]));
    assert_eq!(v["class_size"], "24");
    for fast in [false, true] {
        let mut args = vec!["mec", "sample", "--graph", &k4, "--draws", "5", "--seed", "9"];
        if fast {
            args.push("--fast");
        }
        let out = idesign(&args);
        assert_eq!(code(&out), 0);
        let text = String::from_utf8(out.stdout).unwrap();
        assert_eq!(text.matches("# pdag n=4").count(), 5);
        assert_eq!(text.matches(" > ").count(), 30);
    }
}

#[test]
fn ingest_dream3_and_cycle_error() {
    let dir = tempfile::tempdir().unwrap();
    let tsv = write(dir.path(), "gold.tsv", "G1\tG2\t1\nG2\tG3\t1\nG1\tG3\t0\n");
    let out = dir.path().join("net.graph");
    assert_eq!(code(&idesign(&["ingest-dream3", "--in", &tsv, "--out", s(&out)])), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("G1") && text.contains("G3"), "{text}");
    let v = json(&idesign(&["mec", "count", "--graph", s(&out)]));
    assert_eq!(v["class_size"], "3");

    let cyclic = write(dir.path(), "cycle.tsv", "A\tB\t1\nB\tC\t1\nC\tA\t1\n");
    let run = idesign(&["ingest-dream3", "--in", &cyclic, "--out", s(&dir.path().join("x.graph"))]);
    assert_eq!(code(&run), 2);
    assert!(String::from_utf8_lossy(&run.stderr).contains("cycle"));
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.toml",
        "seed = 3\ninstances = 4\nbudgets = [1, 2]\nalgorithms = [\"lazy\", \"rand\"]\nrecord_runtime = false\n[generator]\nn = 8\n[estimator]\nkind = \"exact\"\n",
    );
    let csv = dir.path().join("out.csv");
    assert_eq!(code(&idesign(&["bench", "--spec", &spec, "--out", s(&csv)])), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "instance_id,seed,n,k,algorithm,estimator,N,ratio,runtime_ms");
    assert_eq!(lines.count(), 4 * 2 * 2);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&idesign(&["design", "--k", "2"])), 1);
    assert_eq!(code(&idesign(&["frobnicate"])), 1);
    assert_eq!(code(&idesign(&["--help"])), 0);
}

#[test]
fn bad_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.graph");
    assert_eq!(code(&idesign(&["mec", "count", "--graph", s(&missing)])), 2);
    // a 4-cycle is not a valid essential graph
    let hole = write(dir.path(), "c4.graph", "# pdag n=4\n0 - 1\n1 - 2\n2 - 3\n3 - 0\n");
    assert_eq!(code(&idesign(&["mec", "count", "--graph", &hole])), 2);
    let p3 = write(dir.path(), "p3.graph", "# pdag n=3\n0 - 1\n1 - 2\n");
    assert_eq!(code(&idesign(&["eval", "--graph", &p3, "--targets", "7"])), 2);
}

#[test]
fn cap_exceeded_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("# pdag n=10\n");
    for u in 0..10 {
        for v in u + 1..10 {
            text += &format!("{u} - {v}\n");
        }
    }
    let k10 = write(dir.path(), "k10.graph", &text);
    let run = idesign(&["eval", "--graph", &k10, "--targets", "0", "--estimator", "exact"]);
    assert_eq!(code(&run), 3, "{}", String::from_utf8_lossy(&run.stderr));

    let mut path = String::from("# pdag n=60\n");
    for v in 0..59 {
        path += &format!("{v} - {}\n", v + 1);
    }
    let p60 = write(dir.path(), "p60.graph", &path);
    let run = idesign(&["design", "--graph", &p60, "--k", "5", "--algorithm", "brute", "--samples", "10"]);
    assert_eq!(code(&run), 3, "{}", String::from_utf8_lossy(&run.stderr));
}
