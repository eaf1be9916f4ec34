use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn netlist(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../netlists").join(name)
}

fn memlag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_memlag"))
        .args(args)
        .env_remove("MEMLAG_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_meminductor_lc_is_self_adjoint() {
    let out = memlag(&["check", netlist("meminductor_lc.net").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["verdict"], "self_adjoint");
    assert_eq!(report["samples"], 512);
    assert_eq!(report["conditions"].as_array().unwrap().len(), 4);
}

#[test]
fn check_rlc_reports_violation() {
    let out = memlag(&["check", netlist("rlc.net").to_str().unwrap(), "--samples", "64", "--tol", "1e-8"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["verdict"], "not_self_adjoint");
    assert_eq!(report["samples"], 64);
}

#[test]
fn check_several_inputs_in_parallel() {
    let a = netlist("meminductor_lc.net");
    let b = netlist("rlc.net");
    let args = ["check", a.to_str().unwrap(), b.to_str().unwrap(), "--jobs", "2"];
    let out = memlag(&args);
    assert_eq!(out.status.code(), Some(0));
    let reports: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(reports[0]["report"]["verdict"], "self_adjoint");
    assert_eq!(reports[1]["report"]["verdict"], "not_self_adjoint");
    assert_eq!(stdout(&memlag(&args)), stdout(&out));
}

#[test]
fn seed_changes_samples_reproducibly() {
    let path = netlist("two_loop.net");
    let run = |seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_memlag"));
        cmd.args(["check", path.to_str().unwrap(), "--samples", "32"]);
        match seed {
            Some(s) => cmd.env("MEMLAG_SEED", s),
            None => cmd.env_remove("MEMLAG_SEED"),
        };
        cmd.output().unwrap()
    };
    let plain = run(None);
    let seeded = run(Some("42"));
    assert_eq!(stdout(&seeded), stdout(&run(Some("42"))));
    assert_ne!(stdout(&seeded), stdout(&plain));
    assert_eq!(run(Some("not-a-number")).status.code(), Some(1));
}

#[test]
fn simulate_two_loop_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("two_loop.csv");
    let out = memlag(&[
        "simulate",
        netlist("two_loop.net").to_str().unwrap(),
        "--t1",
        "20",
        "--x0",
        "0.5,0",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!(summary["ikvl_residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(summary["integrator"]["method"], "rk45");

    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# units: t[s]"));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..3], ["t", "sigma1", "sigma2"]);
    assert!(header.contains(&"RM1.V"));
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 20.0);
    assert_eq!(last.len(), header.len());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let csv = dir.path().join(format!("run{k}.csv"));
        let out = memlag(&[
            "simulate",
            netlist("driven_memristor.net").to_str().unwrap(),
            "--method",
            "rk4",
            "--h",
            "0.01",
            "--t1",
            "5",
            "--out",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        outputs.push(fs::read(&csv).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn simulate_batch_into_directory() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("runs");
    let out = memlag(&[
        "simulate",
        netlist("lc.net").to_str().unwrap(),
        netlist("rlc.net").to_str().unwrap(),
        "--x0",
        "1",
        "--jobs",
        "2",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(target.join("lc.csv").is_file());
    assert!(target.join("rlc.csv").is_file());
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn drive_reports_pinch() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("drive.csv");
    let out = memlag(&[
        "drive",
        netlist("two_loop.net").to_str().unwrap(),
        "--element",
        "RM1",
        "--amp",
        "1",
        "--omega",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["pinch"]["pinched"], true);
    assert_eq!(report["pair"], serde_json::json!(["I", "V"]));
    assert!(fs::read_to_string(&csv).unwrap().lines().nth(1).unwrap().starts_with("t,RM1.q,RM1.I"));
}

#[test]
fn drive_capacitor_is_not_pinched() {
    let out = memlag(&["drive", netlist("lc.net").to_str().unwrap(), "--element", "C1"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stderr(&out)).unwrap();
    assert_eq!(report["pinch"]["pinched"], false);
}

#[test]
fn parse_echoes_canonical_netlist() {
    let out = memlag(&["parse", netlist("two_loop.net").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("circuit \"two_loop\" formulation loop coords 2"));
    assert!(stderr(&out).contains("first-order"));
    let dir = tempfile::tempdir().unwrap();
    let copy = dir.path().join("copy.net");
    fs::write(&copy, &text).unwrap();
    assert_eq!(stdout(&memlag(&["parse", copy.to_str().unwrap()])), text);
}

#[test]
fn garbage_input_is_a_located_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("garbage.net");
    fs::write(&bad, "circuit \"x\" formulation loop coords 1\nelement R1 R value=oops coords +1\n").unwrap();
    let out = memlag(&["parse", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn invalid_circuit_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.net");
    fs::write(&bad, "circuit \"x\" formulation loop coords 1\nelement C1 C value=1 coords +1\n").unwrap();
    let out = memlag(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no inertial or dissipative"));
}

#[test]
fn numeric_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("domain.net");
    fs::write(
        &net,
        "circuit \"d\" formulation loop coords 1\n\
         element L1 L value=1 coords +1\n\
         element MC1 MC curve=poly(0,1) domain=[-0.5,0.5] mod=sigma coords +1\n\
         element V1 VSRC shape=dc amp=5 coords +1\n",
    )
    .unwrap();
    let out = memlag(&["simulate", net.to_str().unwrap(), "--t1", "5", "--out", dir.path().join("o.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("MC1"));
    assert!(!dir.path().join("o.csv").exists());
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(memlag(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(memlag(&["simulate"]).status.code(), Some(1));
    assert_eq!(memlag(&["check", "/nonexistent/file.net"]).status.code(), Some(1));
    let meminductor_lc = netlist("meminductor_lc.net");
    assert_eq!(memlag(&["simulate", meminductor_lc.to_str().unwrap(), "--x0", "1,2"]).status.code(), Some(1));
    assert_eq!(memlag(&["check", meminductor_lc.to_str().unwrap(), "--region", "1,2,3"]).status.code(), Some(1));
    assert_eq!(memlag(&["--help"]).status.code(), Some(0));
}
