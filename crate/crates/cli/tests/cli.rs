use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dichotomy"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin().args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dichotomy-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn classify_exit_codes() {
    let o = run(&["classify", "catalog:Z/4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["verdict"], "PIR");
    let o = run(&["classify", "catalog:F2[x,y]/(x^2,xy,y^2)"]);
    assert_eq!(o.status.code(), Some(10));
    assert_eq!(json(&o)["witness"]["kind"], "ThmB");
    let bad = scratch("bad.ring", "{ not json");
    assert_eq!(run(&["classify", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["census", "catalog:Z/2", "--max-order", "99"]).status.code(), Some(3));
}

#[test]
fn witnesses() {
    let z = scratch("z.ring", r#"{"kind": "Z"}"#);
    let o = run(&["verify-witness", z.to_str().unwrap(), "--thmA", "r=2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["result"], true);
    let o = run(&["verify-witness", "catalog:Z/4", "--thmA", "r=2"]);
    assert_eq!(json(&o)["result"], false);
    let o = run(&["verify-witness", "catalog:F2[x,y]/(x^2,xy,y^2)", "--thmB", "x=2,y=4"]);
    assert_eq!(json(&o)["result"], true);
}

#[test]
fn graph_pipeline_round_trips() {
    let engine = run(&["engine"]);
    assert!(engine.status.success());
    let e = scratch("engine.json", std::str::from_utf8(&engine.stdout).unwrap());
    let g = scratch("path3.graph", "3\n0 1\n1 2\n");
    let coded = run(&["code-graph", e.to_str().unwrap(), g.to_str().unwrap()]);
    assert!(coded.status.success());
    let back = run_with_stdin(&["decode-module"], &coded.stdout);
    assert_eq!(String::from_utf8(back.stdout).unwrap(), "3\n0 1\n1 2\n");
    // determinism
    let again = run(&["code-graph", e.to_str().unwrap(), g.to_str().unwrap()]);
    assert_eq!(coded.stdout, again.stdout);
    let mut tampered: serde_json::Value = serde_json::from_slice(&coded.stdout).unwrap();
    tampered["module"]["tags"] = serde_json::json!([]);
    let o = run_with_stdin(&["decode-module"], tampered.to_string().as_bytes());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn reductions_pipe_into_their_decoders() {
    // ℤ/4 as a module over itself with T = multiplication by 2 (T(a) = 2a)
    let add: Vec<Vec<usize>> = (0..4).map(|a| (0..4).map(|b| (a + b) % 4).collect()).collect();
    let ring = serde_json::json!({ "size": 4, "add": add, "mul": (0..4).map(|a| (0..4).map(|b| a * b % 4).collect::<Vec<usize>>()).collect::<Vec<_>>(), "zero": 0, "one": 1 });
    let endo = serde_json::json!({ "ring": ring, "size": 4, "add": add, "action": (0..4).map(|r| (0..4).map(|a| r * a % 4).collect::<Vec<usize>>()).collect::<Vec<_>>(), "T": [0, 2, 0, 2] });
    let four = run_with_stdin(&["reduce", "endo-to-4sub"], endo.to_string().as_bytes());
    assert!(four.status.success(), "{}", String::from_utf8_lossy(&four.stderr));
    let back = run_with_stdin(&["reduce", "4sub-to-endo"], &four.stdout);
    assert!(back.status.success());
    assert_eq!(json(&back)["T"], serde_json::json!([0, 2, 0, 2]));

    let tagged = serde_json::json!({ "ring": ring, "size": 4, "add": add, "action": endo["action"], "tags": [[0, 2]] });
    let fl = run_with_stdin(&["reduce", "freelike"], tagged.to_string().as_bytes());
    assert!(fl.status.success());
    let rec = run_with_stdin(&["reduce", "freelike-decode"], &fl.stdout);
    assert!(rec.status.success());
    assert_eq!(json(&rec)["tags"], serde_json::json!([[0, 2]]));
}

#[test]
fn tfab_output_shape() {
    let g = scratch("edge.graph", "2\n0 1\n");
    let o = run(&["tfab-code", g.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let rank: usize = lines[0].strip_prefix("rank ").unwrap().parse().unwrap();
    assert_eq!(lines[1], "depth 64");
    let gi = lines.iter().position(|l| l.starts_with("generators ")).unwrap();
    let count: usize = lines[gi].strip_prefix("generators ").unwrap().parse().unwrap();
    assert_eq!(lines.len(), gi + 1 + count);
    assert!(lines[gi + 1..].iter().all(|l| l.split(' ').count() == rank));
}

#[test]
fn help_documents_formats() {
    let o = run(&["--help"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for word in ["ring      :=", "module    :=", "graph     :=", "witness   :=", "EXIT CODES"] {
        assert!(text.contains(word), "{word}");
    }
}
