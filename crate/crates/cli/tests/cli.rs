use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(sub: &str, config: Option<&str>, out: &Path) -> Output {
    let dir = TempDir::new().unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_carleman-adr"));
    cmd.arg(sub).arg("--out").arg(out).env("ADR_THREADS", "1");
    if let Some(text) = config {
        let path = dir.path().join("run.cfg");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(&path);
    }
    cmd.output().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn body(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let lines = body(csv);
    let idx = lines[0].split(',').position(|c| c == name).unwrap();
    lines[1..]
        .iter()
        .map(|l| l.split(',').nth(idx).unwrap().to_string())
        .collect()
}

const SMALL_CONVERGENCE: &str = "\
[adr]
n_sites = 8
[initial]
width = 3
[convergence]
orders = 1, 2, 3
n_steps = 100
";

#[test]
fn convergence_outputs_and_determinism() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let out = run("convergence", Some(SMALL_CONVERGENCE), a.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(run("convergence", Some(SMALL_CONVERGENCE), b.path())
        .status
        .success());
    for name in [
        "convergence.csv",
        "trajectory_euler.csv",
        "trajectory_K3.csv",
        "error_K2.csv",
    ] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    let csv = read(a.path(), "convergence.csv");
    for key in [
        "adr.n_sites = 8",
        "adr.dt = ",
        "adr.b = ",
        "initial.height = ",
        "convergence.n_steps = 100",
        "derived.peclet_cell = ",
        "status = ok",
    ] {
        assert!(csv.contains(&format!("# {key}")), "missing {key}");
    }
    assert_eq!(
        body(&csv)[0],
        "K,max_rel_err,mean_rel_err,t_star,logistic_err_k_minus_1,logistic_err_k,steps_completed"
    );
    let errs: Vec<f64> = column(&csv, "max_rel_err")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(errs.len(), 3);
    assert!(errs[2] < errs[1] && errs[1] < errs[0]);
    assert!(column(&csv, "max_rel_err")[0].contains('e'));
    assert_eq!(body(&read(a.path(), "trajectory_K1.csv")).len(), 102);
}

#[test]
fn overflow_is_flagged_with_partial_output() {
    let dir = TempDir::new().unwrap();
    let cfg = "adr.n_sites = 4\nadr.b = 50\ninitial.kind = uniform\ninitial.height = 1\nconvergence.orders = 2\nconvergence.n_steps = 2000\n";
    let out = run("convergence", Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(1));
    let csv = read(dir.path(), "convergence.csv");
    assert!(csv.contains("# status = flagged"));
    assert_eq!(column(&csv, "steps_completed"), vec!["2000"]);
    assert!(csv.contains("# flag.reference = reference Euler field became non-finite at step 13"));
}

#[test]
fn invalid_configs_exit_two() {
    let dir = TempDir::new().unwrap();
    for cfg in [
        "adr.bogus = 1\n",
        "adr.dt = -1\n",
        "convergence.orders = 3, 2\n",
        "not a key value line\n",
        "initial.kind = triangle\n",
    ] {
        let out = run("convergence", Some(cfg), dir.path());
        assert_eq!(out.status.code(), Some(2), "{cfg}");
    }
    let out = run("pauli", Some("pauli.carleman_sites = 12\n"), dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
    let out = run("beverify", Some("be.b_sites = 16\n"), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_override_is_validated() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_carleman-adr"))
        .args(["p0scan", "--out"])
        .arg(dir.path())
        .env("ADR_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pauli_tables() {
    let dir = TempDir::new().unwrap();
    let cfg = "pauli.carleman_sites = 2, 3\npauli.order = 2\npauli.a_only_qubits = 2, 3\n";
    let out = run("pauli", Some(cfg), dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let dist = read(dir.path(), "pauli_distance.csv");
    assert_eq!(body(&dist)[0], "matrix,N,K,q,m,m_fraction,d");
    let d = column(&dist, "d");
    assert_eq!(d[0].parse::<f64>().unwrap(), 1.0);
    let mstar = read(dir.path(), "pauli_mstar.csv");
    assert!(mstar.contains("# pauli.epsilons = "));
    assert_eq!(body(&mstar).len(), 1 + 4 * 3);
}

#[test]
fn p0_scan_with_simulation() {
    let dir = TempDir::new().unwrap();
    let cfg = "p0.n_sites = 8\np0.gamma_adv = 0:2:5\np0.gamma_diff = 0:0.5:3\np0.sweep_gamma_react = 0:1:5\n";
    let out = run("p0scan", Some(cfg), dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let scan = read(dir.path(), "p0_scan.csv");
    assert!(body(&scan)[0].ends_with("p0_localized_sim,p0_uniform_sim"));
    let applicable = column(&scan, "applicable");
    let loc = column(&scan, "p0_localized");
    // g_a = 2 leaves |g_d + g_a/2| >= 1: flagged, empty cells
    assert!(applicable.iter().any(|a| a == "0"));
    for (a, v) in applicable.iter().zip(&loc) {
        assert_eq!(a == "0", v.is_empty());
    }
    let sweep = read(dir.path(), "p0_gamma_re.csv");
    let g: Vec<f64> = column(&sweep, "gamma_re")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let uni: Vec<f64> = column(&sweep, "p0_uniform")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    for (g, u) in g.iter().zip(&uni) {
        assert!((u - (1.0 - g).powi(2) / 16.0).abs() < 1e-15);
    }
}

#[test]
fn p0_scan_large_lattice_has_no_simulated_column() {
    let dir = TempDir::new().unwrap();
    let out = run(
        "p0scan",
        Some("p0.gamma_adv = 0.1\np0.gamma_diff = 0.1\n"),
        dir.path(),
    );
    assert!(out.status.success());
    let scan = read(dir.path(), "p0_scan.csv");
    assert!(scan.contains("# p0.n_sites = 100"));
    assert!(!body(&scan)[0].contains("sim"));
}

#[test]
fn be_verify_passes_and_is_reproducible() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let cfg = "seed = 42\nbe.draws = 5\nbe.states = 4\n";
    let out = run("beverify", Some(cfg), a.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(run("beverify", Some(cfg), b.path()).status.success());
    let csv = read(a.path(), "be_verify.csv");
    assert_eq!(csv, read(b.path(), "be_verify.csv"));
    let cases = column(&csv, "case");
    assert_eq!(cases.iter().filter(|c| *c == "L").count(), 15);
    assert_eq!(cases.iter().filter(|c| *c == "B").count(), 6);
    let errs: Vec<f64> = column(&csv, "max_component_err")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert!(errs.iter().all(|e| *e <= 1e-11));
    let lines = body(&csv);
    let identity = lines.iter().find(|l| l.starts_with("L_identity")).unwrap();
    let p0: f64 = identity.split(',').nth(7).unwrap().parse().unwrap();
    assert!((p0 - 1.0 / 16.0).abs() < 1e-12);
    let other = run(
        "beverify",
        Some("seed = 43\nbe.draws = 5\nbe.states = 4\n"),
        b.path(),
    );
    assert!(other.status.success());
    assert_ne!(csv, read(b.path(), "be_verify.csv"));
}

#[test]
fn missing_config_file_exits_two() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_carleman-adr"))
        .args(["beverify", "--config", "/nonexistent/run.cfg", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
