use std::fs;
use std::process::{Command, Output};

fn spinchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinchain")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn verify_reports_the_common_phase() {
    let o = spinchain(&["verify", "--gate", "cn 1 2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("all 16 configurations: phase = π/4, PASS"), "{}", stdout(&o));
    let o = spinchain(&["--k", "1", "verify", "--gate", "cn 1 2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("printed phases do not verify for k = 1"));
    assert!(stdout(&o).contains("phase = 3π/4, PASS"));
    let o = spinchain(&["--format", "json", "verify", "--gate", "not 0"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
}

#[test]
fn usage_errors_exit_one_with_one_line() {
    for args in [
        &["verify", "--gate", "cn 1 9"][..],
        &["verify", "--gate", "toffoli"],
        &["compile"],
        &["--delta-omega", "-5", "compile", "--gate", "not 1"],
        &["--format", "csv", "compile", "--gate", "not 1"],
        &["sweep", "--grid", "L=4..2"],
        &["frobnicate"],
    ] {
        let o = spinchain(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert_eq!(stderr(&o).trim_end().lines().count(), 1, "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("error: "));
    }
    assert_eq!(spinchain(&["--help"]).status.code(), Some(0));
}

#[test]
fn io_errors_exit_two() {
    let o = spinchain(&["--config", "/nonexistent/chain.conf", "verify", "--gate", "not 1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = spinchain(&["--out", "/nonexistent/dir/p.txt", "compile", "--gate", "not 1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn compile_writes_a_readable_program() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("chain.conf");
    fs::write(&conf, "L = 4\ndelta_omega = 2e4\n").unwrap();
    let text = dir.path().join("cn.txt");
    let o = spinchain(&[
        "--config",
        conf.to_str().unwrap(),
        "--out",
        text.to_str().unwrap(),
        "compile",
        "--gate",
        "cn 0 last",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let prog = spinchain::compiler::PulseProgram::read(&text).unwrap();
    assert_eq!(prog.config.len, 4);
    assert_eq!(prog.q_pulse_count, 139);
    let o = spinchain(&["--config", conf.to_str().unwrap(), "--format", "json", "compile", "--gate", "cn 0 3"]);
    let again = spinchain::compiler::PulseProgram::from_json(&stdout(&o)).unwrap();
    assert_eq!(again, prog);
}

#[test]
fn simulate_formats() {
    let base = ["--delta-omega", "2e4", "--config"];
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("chain.conf");
    fs::write(&conf, "L = 3\ndelta_omega = 1e4\n").unwrap();
    let run = |fmt: &str| {
        let o = spinchain(
            &[&base[..], &[conf.to_str().unwrap(), "--format", fmt, "simulate", "--gate", "cn 1 2", "--seed", "4"]]
                .concat(),
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        stdout(&o)
    };
    let json: serde_json::Value = serde_json::from_str(&run("json")).unwrap();
    assert_eq!(json["point"]["delta_omega"], 2e4);
    assert_eq!(json["point"]["seed"], 4);
    assert_eq!(json["report"]["Ok"]["q_pulse_count"], 9);
    let csv = run("csv");
    assert_eq!(csv.lines().count(), 1 + 8);
    assert!(run("text").contains("q_pulse_count = 9"));
}

#[test]
fn sweep_writes_three_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let grid = "L=3..4;delta_omega=1e4;seed=1,2;gate=cn 0 last";
    let o = spinchain(&["--out", out.to_str().unwrap(), "sweep", "--grid", grid]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("4 grid points, 0 failed"));
    let states = fs::read_to_string(out.join("states.csv")).unwrap();
    assert_eq!(states.lines().count(), 1 + 2 * 8 + 2 * 16);
    assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap().lines().count(), 5);
    assert!(out.join("series.csv").exists());
    let seq = dir.path().join("seq");
    spinchain(&["--out", seq.to_str().unwrap(), "sweep", "--grid", grid, "--sequential"]);
    assert_eq!(fs::read_to_string(seq.join("states.csv")).unwrap(), states);
}

#[test]
fn inspect_params_prints_the_composite_angles() {
    let o = spinchain(&["inspect-params"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let theta: f64 = out.lines().find_map(|l| l.strip_prefix("theta = ")).unwrap().parse().unwrap();
    assert!((theta - 6.083668).abs() < 1e-6);
    assert_eq!(spinchain(&["inspect-params", "--rho", "0.5"]).status.code(), Some(0));
}
