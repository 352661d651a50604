use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mtl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtl"))
        .args(args)
        .env_remove("MTL_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_cube(dir: &Path) -> String {
    let path = dir.join("cube.json");
    std::fs::write(
        &path,
        r#"{"dim":3,"vertices":[[0,0,0],[1,0,0],[0,1,0],[1,1,0],[0,0,1],[1,0,1],[0,1,1],[1,1,1]]}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn basis_lists_fourteen_elements_for_n3_p2() {
    let o = mtl(&["basis", "--n", "3", "--p", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 14);
    let o = mtl(&["basis", "--n", "3", "--p", "2", "--json"]);
    for line in stdout(&o).lines() {
        serde_json::from_str::<Value>(line).unwrap();
    }
}

#[test]
fn compute_cube_mean_width_term() {
    let dir = tempfile::tempdir().unwrap();
    let cube = write_cube(dir.path());
    let o = mtl(&["compute", "--polytope", &cube, "--valuation", "phi", "--k", "1", "--j", "0"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rank"], 0);
    assert!((v["coeffs"]["[]"].as_f64().unwrap() - 3.0).abs() < 1e-12);

    let out = dir.path().join("t.json");
    let o = mtl(&[
        "compute", "--polytope", &cube, "--valuation", "phi", "--k", "2", "--s", "2", "--j", "0", "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let t = mtl_core::io::read_tensor(&out).unwrap();
    assert_eq!((t.dim(), t.rank()), (3, 2));
}

#[test]
fn rank_reports_pass() {
    let o = mtl(&["rank", "--n", "2", "--p", "1", "--seed", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "rank=6 expected=6 PASS");
}

#[test]
fn exit_codes() {
    let o = mtl(&["compute", "--polytope", "/nonexistent.json", "--valuation", "phi", "--k", "1", "--j", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mtl(&["check", "--oracle", "bogus", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mtl(&["check", "--oracle", "builtin:tilde2:0,0,0", "--n", "2", "--trials", "3", "--improper"]);
    assert_eq!(o.status.code(), Some(1));
    let o = mtl(&["check", "--oracle", "builtin:tilde2:0,0,0", "--n", "2", "--trials", "3"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn check_is_deterministic_and_reads_seed_from_env() {
    let args = ["check", "--oracle", "builtin:phi:1,0,1,0", "--n", "2", "--trials", "3"];
    let a = stdout(&mtl(&args));
    assert_eq!(a, stdout(&mtl(&args)));

    let with_env = Command::new(env!("CARGO_BIN_EXE_mtl"))
        .args(args)
        .env("MTL_SEED", "5")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&with_env.stdout).unwrap();
    assert_eq!(v["seed"], 5);
    let mut explicit = args.to_vec();
    explicit.extend(["--seed", "5"]);
    assert_eq!(String::from_utf8(with_env.stdout).unwrap(), stdout(&mtl(&explicit)));
}

#[test]
fn delta_of_tilde_on_quarter_arc() {
    let o = mtl(&[
        "delta", "--oracle", "builtin:tilde3:0,0,0", "--n", "3", "--subspace", "[[0,0,1]]", "--normals",
        "[[1,0,0],[0,1,0]]",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["coeffs"]["[1,3]"].as_f64().unwrap() + 1.0).abs() < 1e-9);
    assert!((v["coeffs"]["[2,3]"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}
