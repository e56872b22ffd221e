use std::path::Path;
use std::process::{Command, Output};

fn ballqp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ballqp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn linear_example_passes() {
    let o = ballqp(&["example", "linear_ex"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("-2.467"));
}

#[test]
fn gen_solve_export_round() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = ballqp(&["gen", "--family", "martinez", "--n", "3", "--count", "2", "--seed", "5", "--out", d]);
    assert!(o.status.success());
    let inst = dir.path().join("martinez-n3-m2-0001.json");
    assert!(inst.exists());
    let inst = inst.to_str().unwrap();

    let o = ballqp(&["solve", "--relaxation", "kron", inst]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(report["r_star"].as_f64().unwrap().is_finite());

    for fmt in ["cbf", "sdpa"] {
        let out = dir.path().join(format!("p.{fmt}"));
        let o = ballqp(&["export", fmt, inst, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        assert!(std::fs::metadata(&out).unwrap().len() > 0);
    }
}

#[test]
fn bad_input_exits_with_2() {
    let o = ballqp(&["solve", Path::new("no/such/file.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    // beta0 needs the linear family
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(ballqp(&["gen", "--family", "maxnorm", "--n", "2", "--m", "3", "--out", d]).status.success());
    let inst = dir.path().join("maxnorm-n2-m3-0000.json");
    let o = ballqp(&["solve", "--relaxation", "beta0", inst.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
