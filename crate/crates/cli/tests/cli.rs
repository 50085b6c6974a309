use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn shear_decay(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shear-decay"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Data lines of a CSV, without the comment header.
fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect()
}

const QUICK_RUN: &[&str] = &["run", "--nu", "1e-2", "--samples", "200"];

#[test]
fn minimal_run_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = shear_decay(QUICK_RUN, dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let count = fs::read_dir(dir.path()).unwrap().count();
    assert!(count >= 3);
    let lines = data_lines(&dir.path().join("trajectory.csv"));
    assert_eq!(lines[0], "time,l2,h1y,mode_1,mode_2,mode_3,mode_4");
    assert_eq!(lines.len(), 201 + 1);
    let summary = json(&dir.path().join("summary.json"));
    assert_eq!(summary["schema_version"], 1);
    assert!(summary["tau_efold"].as_f64().unwrap() > 0.0);
    assert!(summary["tail_rate"].as_f64().unwrap() > 0.0);
    let header = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(header.starts_with("# shear-decay run schema_version=1"));
    assert!(header.contains("#   nu = 0.01"));
}

#[test]
fn rerun_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args: Vec<&str> = QUICK_RUN.iter().copied().chain(["--record-snapshots"]).collect();
    assert_eq!(code(&shear_decay(&args, a.path())), 0);
    let single: Vec<&str> = args.iter().copied().chain(["--threads", "1"]).collect();
    assert_eq!(code(&shear_decay(&single, b.path())), 0);
    for name in ["trajectory.csv", "summary.json", "snapshots.bin", "config.toml"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn seed_changes_data() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&shear_decay(QUICK_RUN, a.path())), 0);
    let seeded: Vec<&str> = QUICK_RUN.iter().copied().chain(["--seed", "3"]).collect();
    assert_eq!(code(&shear_decay(&seeded, b.path())), 0);
    assert_ne!(
        data_lines(&a.path().join("trajectory.csv")),
        data_lines(&b.path().join("trajectory.csv"))
    );
}

#[test]
fn bad_profile_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o = shear_decay(&["run", "--profile", "wiggly"], &out);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown profile"));
    assert!(!out.exists());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[run]\nviscosity = 1e-3\n").unwrap();
    let o = shear_decay(&["run", "--config", cfg.to_str().unwrap()], &dir.path().join("a"));
    assert_eq!(code(&o), 2);
    let o = shear_decay(&["run", "--nu", "-1"], &dir.path().join("b"));
    assert_eq!(code(&o), 2);
    let o = shear_decay(&["run", "--bc", "periodic"], &dir.path().join("c"));
    assert_eq!(code(&o), 2);
    let o = shear_decay(&["sweep", "--nu-list", "1e-3,1e-4"], &dir.path().join("d"));
    assert_eq!(code(&o), 2);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[run]\nnu = 0.05\nsamples = 10\n[resolution]\nm_max = 2\n").unwrap();
    let out = dir.path().join("out");
    let o = shear_decay(&["run", "--config", cfg.to_str().unwrap(), "--nu", "0.01"], &out);
    assert_eq!(code(&o), 0);
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["nu"], 0.01);
    assert_eq!(summary["config"]["run"]["samples"], 10);
    assert_eq!(data_lines(&out.join("trajectory.csv"))[0], "time,l2,h1y,mode_1,mode_2");
}

#[test]
fn oracle_default_passes_and_coarse_step_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = shear_decay(&["oracle"], &dir.path().join("default"));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report = json(&dir.path().join("default/oracle.json"));
    assert!(report["couette"]["relative_error"].as_f64().unwrap() <= 1e-3);
    assert_eq!(report["crank_nicolson"]["pass"], true);

    let o = shear_decay(&["oracle", "--dt", "0.5"], &dir.path().join("coarse"));
    assert_eq!(code(&o), 1);
    let report = json(&dir.path().join("coarse/oracle.json"));
    assert_eq!(report["couette"]["pass"], false);

    let o = shear_decay(&["oracle", "--t", "0"], &dir.path().join("zero"));
    assert_eq!(code(&o), 0);
    let report = json(&dir.path().join("zero/oracle.json"));
    assert!(report["couette"]["relative_error"].as_f64().unwrap() < 1e-12);
}

#[test]
fn inequality_paths() {
    let dir = tempfile::tempdir().unwrap();
    let o = shear_decay(&["inequalities"], &dir.path().join("default"));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report = json(&dir.path().join("default/inequalities.json"));
    assert_eq!(report["stats"].as_array().unwrap().len(), 6);
    assert_eq!(
        data_lines(&dir.path().join("default/ratios.csv"))[0],
        "family,inequality,member,ratio"
    );

    let o = shear_decay(&["inequalities", "--c-cal", "0"], &dir.path().join("zero"));
    assert_eq!(code(&o), 1);

    let o = shear_decay(&["inequalities", "--family", "x-independent"], &dir.path().join("flat"));
    assert_eq!(code(&o), 0);
}

#[test]
fn gevrey_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["gevrey", "--nu", "1e-3"];
    let run = |extra: &[&str], name: &str| {
        let args: Vec<&str> = base.iter().chain(extra).copied().collect();
        let o = shear_decay(&args, &dir.path().join(name));
        (code(&o), json(&dir.path().join(name).join("gevrey.json")))
    };
    let (c, zero) = run(&["--d0", "0"], "zero");
    assert_eq!(c, 0);
    assert!(zero["sup"].as_f64().unwrap() <= 1.0 + 1e-12);
    let (c, bisected) = run(&[], "bisected");
    assert_eq!(c, 0);
    let d0 = bisected["d0"].as_f64().unwrap();
    assert!(d0 > 0.0);
    let big = format!("{}", 20.0 * d0);
    let (c, oversized) = run(&["--d0", &big], "oversized");
    assert_eq!(c, 1);
    assert_eq!(oversized["pass"], false);
    assert!(data_lines(&dir.path().join("zero/gevrey.csv"))[0] == "time,amplification");
}

#[test]
fn sweeps_write_schema() {
    let nus = "2e-2,1e-2,5e-3,2.5e-3";
    for (profile, bc) in [("couette", "dirichlet"), ("poiseuille", "dirichlet"), ("flat:2", "dirichlet")] {
        let dir = tempfile::tempdir().unwrap();
        let o = shear_decay(
            &["sweep", "--profile", profile, "--bc", bc, "--nu-list", nus, "--tail-window", "1,4"],
            dir.path(),
        );
        assert_eq!(code(&o), 0, "{profile}: {}", String::from_utf8_lossy(&o.stderr));
        let lines = data_lines(&dir.path().join("sweep.csv"));
        assert_eq!(lines[0], "profile,bc,nu,n_y,m_max,dt,tau_efold,tail_rate,fit_t_lo,fit_t_hi,status");
        assert_eq!(lines.len(), 5);
        assert!(lines[1..].iter().all(|l| l.starts_with(&format!("{profile},{bc},")) && l.ends_with(",ok")));
        let fit = json(&dir.path().join("fit.json"));
        for key in ["profile", "bc", "N", "alpha_hat", "alpha_predicted", "ci_halfwidth", "residual", "n_points"] {
            assert!(!fit[key].is_null(), "{profile}: {key} missing");
        }
        assert_eq!(fit["n_points"], 4);
    }
}

#[test]
fn thread_cap_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_shear-decay"))
        .args(QUICK_RUN)
        .arg("--out")
        .arg(dir.path())
        .env("SHEAR_DECAY_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_shear-decay"))
        .args(QUICK_RUN)
        .arg("--out")
        .arg(dir.path())
        .env("SHEAR_DECAY_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}
