use std::fs;
use std::path::Path;
use std::process::Command;

use c2flow_cli::config::Solver;
use c2flow_cli::output::PROBE_HEADER;
use c2flow_cli::{run, verify, CliError, RunConfig};

fn config(text: &str, dir: &Path) -> RunConfig {
    RunConfig::parse(text, dir).unwrap()
}

fn small_flow(dir: &Path, extra: &str) -> RunConfig {
    let steps = if extra.contains("steps") { "" } else { "steps = 40\n" };
    config(
        &format!("scenario = kolmogorov\ngrid_n = 8\n{steps}snapshot_every = 20\noutput_dir = out\n{extra}"),
        dir,
    )
}

fn last_value(csv: &str, solver: &str, g2: &str) -> f64 {
    csv.lines()
        .filter(|l| {
            let c: Vec<&str> = l.split(',').collect();
            c.len() == 6 && c[4] == solver && c[2] == g2
        })
        .last()
        .and_then(|l| l.rsplit(',').next())
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn logistic_run_reproduces_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("scenario = logistic\noutput_dir = out\n", dir.path());
    let summary = run(&cfg).unwrap();
    assert_eq!(summary.dense_elements, 0);
    let csv = fs::read_to_string(dir.path().join("out/probes.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(PROBE_HEADER));
    assert_eq!(csv.lines().count(), 1 + 3 * 2 * 701);

    let x_stable = (10f64.sqrt() / 2.0) * (1.0 - 0.6f64.sqrt());
    let c2_fixed = (1.0 / 10f64.sqrt()) / 0.9;
    assert!((last_value(&csv, "euler", "0.10000000000000001") - x_stable).abs() < 1e-6);
    assert!((last_value(&csv, "c2", "0.10000000000000001") - c2_fixed).abs() < 1e-6);
    assert!(summary.report.contains("[g2 0.20000000000000001]"));
    let svg = fs::read_to_string(dir.path().join("out/probes.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 6);
}

#[test]
fn flow_run_emits_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_flow(dir.path(), "solvers = c2, nshj, ns\n");
    let summary = run(&cfg).unwrap();
    let out = dir.path().join("out");
    for f in ["probes.csv", "probes.svg", "report.txt"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    for solver in ["c2", "nshj", "ns"] {
        for step in [0, 20, 40] {
            assert!(out.join(format!("snapshots/{solver}_{step:06}.csv")).is_file());
        }
    }
    let snap = fs::read_to_string(out.join("snapshots/nshj_000040.csv")).unwrap();
    let lines: Vec<&str> = snap.lines().collect();
    assert_eq!(lines[0], "# n = 8");
    assert_eq!(lines[2], "# step = 40");
    assert_eq!(lines[5], "ix,iy,rho,chi,ax,ay");
    assert_eq!(lines.len(), 6 + 64);

    let csv = fs::read_to_string(out.join("probes.csv")).unwrap();
    // three solvers, three default probes, vx only, 41 samples each
    assert_eq!(csv.lines().count(), 1 + 3 * 3 * 41);
    assert!(csv.lines().nth(1).unwrap().starts_with("0,vx,0,0,c2,"));

    for section in ["[solver c2]", "[compare c2 vs nshj]", "[compare ns vs nshj]", "[compare c2 vs ns]"] {
        assert!(summary.report.contains(section), "{section}");
    }
    let dim = 4 * 64;
    assert_eq!(summary.dense_elements, 2 * dim * dim + 3 * dim);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&small_flow(a.path(), "solvers = c2, nshj, ns\n")).unwrap();
    run(&small_flow(b.path(), "solvers = c2, nshj, ns\n")).unwrap();
    for f in ["probes.csv", "probes.svg", "report.txt", "snapshots/c2_000040.csv"] {
        let x = fs::read(a.path().join("out").join(f)).unwrap();
        let y = fs::read(b.path().join("out").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}

#[test]
fn solver_gating_avoids_lifted_storage() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run(&small_flow(dir.path(), "solvers = nshj\n")).unwrap();
    assert_eq!(summary.dense_elements, 0);
    assert!(!dir.path().join("out/snapshots/c2_000040.csv").exists());
}

#[test]
fn large_c2_runs_are_refused_without_acknowledgment() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("scenario = kolmogorov\nsteps = 1\noutput_dir = out\n", dir.path());
    cfg.solvers = vec![Solver::C2];
    let err = run(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(matches!(err, CliError::Config(_)));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn divergence_keeps_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_flow(dir.path(), "solvers = nshj, ns\ndt = 20\nsteps = 5000\n");
    let err = run(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
    let csv = fs::read_to_string(dir.path().join("out/probes.csv")).unwrap();
    assert!(csv.lines().count() > 3);
    let report = fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    assert!(report.contains("status = failed"));
}

#[test]
fn verify_accepts_replay_and_rejects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_flow(dir.path(), "solvers = c2, nshj\n");
    run(&cfg).unwrap();
    let report = verify(&cfg).unwrap();
    assert_eq!(report.files_compared, 1 + 2 * 3, "{report:?}");
    assert_eq!(report.max_abs_diff, 0.0);

    let probes = dir.path().join("out/probes.csv");
    let text = fs::read_to_string(&probes).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let cells: Vec<&str> = lines[5].split(',').collect();
    let bumped = cells[5].parse::<f64>().unwrap() + 1e-6;
    lines[5] = format!("{},{bumped}", cells[..5].join(","));
    fs::write(&probes, lines.join("\n") + "\n").unwrap();
    let err = verify(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_c2flow");
    let good = dir.path().join("good.cfg");
    fs::write(&good, "# smoke\nscenario = two_mode\ngrid_n = 8\nsteps = 10\n").unwrap();
    let out = dir.path().join("result");
    let status = Command::new(bin)
        .args(["run", good.to_str().unwrap(), "--out", out.to_str().unwrap(), "--solvers", "c2,nshj", "--quiet"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("report.txt").is_file());

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "scenario = kolmogorov\ngrid_n = banana\n").unwrap();
    let status = Command::new(bin).args(["run", bad.to_str().unwrap(), "--quiet"]).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let status = Command::new(bin)
        .args(["run", good.to_str().unwrap(), "--solvers", "c2", "--quiet"])
        .arg("--out")
        .arg(dir.path().join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let big = dir.path().join("big.cfg");
    fs::write(&big, "scenario = kolmogorov\nsteps = 1\n").unwrap();
    let status = Command::new(bin)
        .args(["run", big.to_str().unwrap(), "--solvers", "c2", "--quiet"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 5);
}
