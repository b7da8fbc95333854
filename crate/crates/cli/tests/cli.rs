use std::path::Path;
use std::process::{Command, Output};

fn lielength(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lielength")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn el_estimate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = lielength(&["el", "estimate", "--group", "u4", "--seed", "7", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v: serde_json::Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["command"], "el estimate");
    assert_eq!(v["passed"], true);
    let bracket = &v["result"]["bracket"];
    assert!(bracket["lower"].as_f64().unwrap() <= bracket["upper"].as_f64().unwrap());
    assert!(bracket["certificate"]["factors"].is_array());
}

#[test]
fn different_seeds_give_different_targets() {
    let x = stdout(&lielength(&["el", "estimate", "--group", "gl2", "--seed", "1"]));
    let y = stdout(&lielength(&["el", "estimate", "--group", "gl2", "--seed", "2"]));
    assert_ne!(x, y);
}

#[test]
fn cel_compute_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    std::fs::write(&f, r#"{"vertices": 3, "edges": [[0, 1], [1, 2]], "phase": [0.7, 0.9, 0.05]}"#).unwrap();
    let o = lielength(&["cel", "compute", "--input", f.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    // Lift (0.7, 0.9, 1.05) shifted by -1: quotient norm 0.3.
    let q = v["result"]["quotient_norm"].as_f64().unwrap();
    assert!((q - 0.3).abs() < 1e-12);
    let c = v["result"]["cel"].as_f64().unwrap();
    assert!((c - 2.0 * std::f64::consts::PI * 0.3).abs() < 1e-12);
}

#[test]
fn winding_function_fails_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("w.json");
    std::fs::write(&f, r#"{"vertices": 3, "edges": [[0, 1], [1, 2], [2, 0]], "phase": [0.0, 0.34, 0.67]}"#).unwrap();
    let o = lielength(&["cel", "compute", "--input", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn csv_tables_for_plotting() {
    let o = lielength(&["schatten", "sandwich", "--dims", "2,4", "--samples", "3", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("dim,p,lhs,mid,rhs"));
    assert_eq!(lines.count(), 2 * 3 * 3);
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"command": "trotter", "dim": 2, "samples": 2, "seed": 5}"#).unwrap();
    let from_cfg = lielength(&["run", "--config", cfg.to_str().unwrap()]);
    let from_flags = lielength(&["trotter", "--dim", "2", "--samples", "2", "--seed", "5"]);
    assert!(from_cfg.status.success());
    assert_eq!(from_cfg.stdout, from_flags.stdout);
}

#[test]
fn malformed_inputs_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"command": "no-such-command"}"#).unwrap();
    assert_eq!(lielength(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(lielength(&["el", "estimate", "--group", "zz3"]).status.code(), Some(2));
    let unwritable = Path::new("/nonexistent-dir/out.json");
    let o = lielength(&["en", "witness", "--out", unwritable.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn coarse_checks_on_csv_sample() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("line.csv");
    let mut csv = String::from("from,to,distance\n");
    for i in 0..6 {
        for j in i + 1..6 {
            csv.push_str(&format!("p{i},p{j},{}\n", (j - i) as f64 * 0.5));
        }
    }
    std::fs::write(&f, csv).unwrap();
    let o = lielength(&["coarse", "--input", f.to_str().unwrap(), "--big-delta", "3", "--delta", "0.75"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["label"], "sampled at 6 points, radius 2.5");
}

#[test]
fn word_determinant_from_json() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("word.json");
    std::fs::write(&f, r#"[{"kind":"E","i":1,"j":2,"a":[2,1]},{"kind":"E","i":2,"j":1,"a":-3}]"#).unwrap();
    let o = lielength(&["en", "hsdet", "--input", f.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
}
