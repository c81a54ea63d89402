use std::path::Path;
use std::process::{Command, Output};

use hashprop::broadcast::BcProblem;
use hashprop::cli::{parse_matrix, CSV_HEADER};
use hashprop::gf::FieldMatrix;
use hashprop::slepian_wolf::dsbs;
use hashprop::types::Distribution;
use serde_json::Value;

fn hashprop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hashprop")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_matrix(dir: &Path, name: &str, dense: &[Vec<usize>]) -> String {
    let path = dir.join(name);
    let a = FieldMatrix::from_dense(2, dense).unwrap();
    std::fs::write(&path, hashprop::cli::emit_matrix(&a)).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn gen_matrix_writes_a_parseable_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.txt");
    let args = ["gen-matrix", "--q", "2", "--rows", "4", "--cols", "8", "--tau", "2", "--seed", "7", "--out", out.to_str().unwrap()];
    let rec = stdout_json(&hashprop(&args));
    assert_eq!(rec["command"], "gen-matrix");
    let a = parse_matrix(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((a.q(), a.rows(), a.cols()), (2, 4, 8));
    assert_eq!(rec["metrics"]["nnz"], a.nnz());

    // without --out the matrix itself goes to stdout, identically
    let plain = hashprop(&args[..args.len() - 2]);
    assert!(plain.status.success());
    assert_eq!(String::from_utf8(plain.stdout).unwrap(), std::fs::read_to_string(&out).unwrap());
}

#[test]
fn hash_audit_uniform() {
    let rec = stdout_json(&hashprop(&["hash-audit", "--family", "uniform", "--q", "2", "--l", "1", "--n", "2", "--exhaustive"]));
    assert_eq!(rec["metrics"]["alpha"], 1.0);
    assert_eq!(rec["metrics"]["beta"], 0.0);
    assert_eq!(rec["metrics"]["holds"], true);
}

#[test]
fn hash_audit_from_descriptor_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("e.json");
    std::fs::write(&d, r#"{"family":"sparse","q":2,"l":2,"n":3,"tau":2}"#).unwrap();
    let a = stdout_json(&hashprop(&["hash-audit", "--descriptor", d.to_str().unwrap()]));
    let b = stdout_json(&hashprop(&["hash-audit", "--family", "sparse", "--q", "2", "--l", "2", "--n", "3", "--tau", "2"]));
    assert_eq!(a["metrics"], b["metrics"]);
    assert_eq!(a["metrics"]["holds"], true);
}

#[test]
fn spectrum_command() {
    let rec = stdout_json(&hashprop(&["spectrum", "--family", "uniform", "--q", "2", "--l", "1", "--n", "3"]));
    let rows = rec["metrics"]["types"].as_array().unwrap();
    assert!(!rows.is_empty());
    for r in rows {
        let (s, u) = (r["spectrum"].as_f64().unwrap(), r["uniform"].as_f64().unwrap());
        assert!((s - u).abs() < 1e-12, "{r}");
    }
}

#[test]
fn sw_sim_exact_and_mc() {
    let dir = tempfile::tempdir().unwrap();
    let dist = dir.path().join("d.json");
    std::fs::write(&dist, dsbs(0.1).unwrap().to_json()).unwrap();
    let a = write_matrix(dir.path(), "a.txt", &[vec![1, 0, 1], vec![0, 1, 1]]);
    let b = write_matrix(dir.path(), "b.txt", &[vec![1, 1, 0], vec![0, 1, 1], vec![1, 1, 1]]);
    let (ma, mb) = (format!("A={a}"), format!("B={b}"));
    let d = dist.to_str().unwrap();
    let exact = stdout_json(&hashprop(&["sw-sim", "--dist", d, "--matrix", &ma, "--matrix", &mb, "--mode", "exact"]));
    let e = exact["metrics"]["error"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&e));
    assert_eq!(exact["metrics"]["n"], 3);

    let mc_args = ["sw-sim", "--dist", d, "--matrix", &ma, "--matrix", &mb, "--mode", "mc", "--trials", "4000", "--seed", "3"];
    let mc = hashprop(&mc_args);
    let rec = stdout_json(&mc);
    let ci = rec["metrics"]["ci"].as_array().unwrap();
    assert!(ci[0].as_f64().unwrap() <= rec["metrics"]["error"].as_f64().unwrap());
    // same seed, same bytes
    assert_eq!(hashprop(&mc_args).stdout, mc.stdout);

    let unseeded = hashprop(&["sw-sim", "--dist", d, "--matrix", &ma, "--matrix", &mb, "--mode", "mc"]);
    assert_eq!(unseeded.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unseeded.stderr).contains("--seed"));
}

#[test]
fn bc_sim_noiseless_identity_code() {
    let dir = tempfile::tempdir().unwrap();
    let p = BcProblem::noiseless_split(Distribution::uniform(vec![2, 2]).unwrap()).unwrap();
    std::fs::write(dir.path().join("p.json"), p.to_json()).unwrap();
    // no shared rows; the message matrix is the identity, so decoding is exact
    std::fs::write(dir.path().join("s.txt"), "2 0 2\n").unwrap();
    write_matrix(dir.path(), "m.txt", &[vec![1, 0], vec![0, 1]]);
    let code = r#"{"receivers":[{"shared":"s.txt","message":"m.txt","shared_vector":[]},{"shared":"s.txt","message":"m.txt","shared_vector":[]}]}"#;
    std::fs::write(dir.path().join("code.json"), code).unwrap();
    let pp = dir.path().join("p.json");
    let cp = dir.path().join("code.json");
    let rec = stdout_json(&hashprop(&["bc-sim", "--problem", pp.to_str().unwrap(), "--code", cp.to_str().unwrap()]));
    assert_eq!(rec["metrics"]["error"], 0.0);
    assert_eq!(rec["metrics"]["message_rates"], serde_json::json!([1.0, 1.0]));
}

#[test]
fn lp_md_command() {
    let dir = tempfile::tempdir().unwrap();
    let dist = dir.path().join("d.json");
    std::fs::write(&dist, dsbs(0.1).unwrap().to_json()).unwrap();
    let a = write_matrix(dir.path(), "a.txt", &[vec![1, 1, 0, 0], vec![0, 0, 1, 1]]);
    let a2 = write_matrix(dir.path(), "a2.txt", &[vec![1, 0, 1, 0]]);
    let b = write_matrix(dir.path(), "b.txt", &[vec![1, 1, 1, 1]]);
    let stack_x = format!("A={a},A'={a2}");
    let stack_y = format!("B={b}");
    let rec = stdout_json(&hashprop(&[
        "lp-md", "--dist", dist.to_str().unwrap(), "--stack", &stack_x, "--stack", &stack_y,
        "--syndrome", "a=10,m=1", "--syndrome", "b=0", "--fallback", "exhaustive", "--json",
    ]));
    let best = &rec["metrics"]["best"];
    assert!(best.is_array(), "{rec}");
    let x: Vec<usize> = serde_json::from_value(best[0].clone()).unwrap();
    let y: Vec<usize> = serde_json::from_value(best[1].clone()).unwrap();
    assert_eq!(x.len(), 4);
    assert_eq!((x[0] + x[1]) % 2, 1);
    assert_eq!((x[2] + x[3]) % 2, 0);
    assert_eq!((x[0] + x[2]) % 2, 1);
    assert_eq!(y.iter().sum::<usize>() % 2, 0);
    assert!(rec["metrics"]["per_type"].is_array());
}

#[test]
fn sweep_sw_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let dist = dir.path().join("d.json");
    std::fs::write(&dist, dsbs(0.05).unwrap().to_json()).unwrap();
    let d = dist.to_str().unwrap();
    let out = hashprop(&["sweep", "sw", "--dist", d, "--rates", "0.5:1.0:0.1", "--n", "3", "--seed", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len() - 1, 36);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&first[..3], &["0.5", "0.5", "3"]);
    let summary: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(summary["metrics"]["points"], 36);

    // CSV to a file, summary to stdout; the table is the same
    let csv = dir.path().join("s.csv");
    let rec = stdout_json(&hashprop(&[
        "sweep", "sw", "--dist", d, "--rates", "0.5:1.0:0.1", "--n", "3", "--seed", "1", "--csv", csv.to_str().unwrap(),
    ]));
    assert_eq!(rec["command"], "sweep-sw");
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), text);
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let dist = dir.path().join("d.json");
    std::fs::write(&dist, dsbs(0.1).unwrap().to_json()).unwrap();
    let args = ["sweep", "sw", "--dist", dist.to_str().unwrap(), "--rates", "0.6:1.0:0.2", "--n", "3,4", "--tries", "2", "--seed", "9", "--mode", "mc", "--trials", "500"];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_hashprop")).args(args).env("HASHPROP_THREADS", threads).output().unwrap()
    };
    let (one, four) = (run("1"), run("4"));
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn malformed_inputs_name_the_file_and_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let dist = dir.path().join("d.json");
    std::fs::write(&dist, dsbs(0.1).unwrap().to_json()).unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "2 1 3\n0 0 1\n0 1 0\n").unwrap();
    let m = format!("A={}", bad.display());
    let out = hashprop(&["sw-sim", "--dist", dist.to_str().unwrap(), "--matrix", &m, "--matrix", &m]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.txt") && err.contains("line 3"), "{err}");

    let garbage = dir.path().join("g.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    let out = hashprop(&["hash-audit", "--descriptor", garbage.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("g.json"));

    let missing = hashprop(&["sw-sim", "--dist", "/nonexistent/d.json", "--matrix", &m]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/d.json"));

    assert_eq!(hashprop(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn too_large_is_a_compute_error() {
    let out = hashprop(&["hash-audit", "--family", "uniform", "--q", "2", "--l", "6", "--n", "6"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
