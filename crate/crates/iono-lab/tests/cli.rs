//! Black-box tests of the `iono-lab` binary: exit codes, artifact schemas,
//! and rerun determinism. Everything runs tiny configs so the whole file
//! stays in CI-friendly time.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iono-lab"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code (signal?)")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Minimal config that keeps training and planning in the millisecond range.
const TINY: &str = r#"{
  "training": {"epochs": 2, "batch_size": 10, "hidden": 8},
  "mpc": {"num_samples": 20},
  "experiment": {
    "num_seeds": 1, "num_trials": 2, "steps_per_trial": 40,
    "lie_epsilons_s": [0.01, 0.02], "sweep_cap_s": 1.0,
    "mimic_logged_steps": 10
  }
}"#;

fn write_tiny(dir: &Path) -> String {
    let p = dir.join("tiny.json");
    fs::write(&p, TINY).unwrap();
    p.to_str().unwrap().to_owned()
}

/// Every regular file under `root`, keyed by relative path.
fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_str().unwrap().into();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn assert_identical_runs(args: &[&str]) {
    let (d1, d2) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&d1, &d2] {
        let out = run(&[args, &["--out", d.path().to_str().unwrap()]].concat());
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    }
    let (s1, s2) = (snapshot(d1.path()), snapshot(d2.path()));
    assert_eq!(
        s1.keys().collect::<Vec<_>>(),
        s2.keys().collect::<Vec<_>>()
    );
    for (name, bytes) in &s1 {
        assert_eq!(Some(bytes), s2.get(name).as_deref(), "{name} differs");
    }
}

#[test]
fn lie_sweep_reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_tiny(dir.path());
    assert_identical_runs(&["lie-sweep", "--config", &cfg]);
}

#[test]
fn lie_sweep_header_is_documented() {
    let dir = TempDir::new().unwrap();
    let cfg = write_tiny(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "lie-sweep",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let csv = fs::read_to_string(out_dir.join("lie_sweep.csv")).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("epsilon_s,yaw_rate_deg_per_s,stop_time_s")
    );
    assert_eq!(csv.lines().count(), 3); // header + two epsilons
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let out_arg = dir.path().join("out");
    let out_arg = out_arg.to_str().unwrap();

    let cases: &[(&str, &str)] = &[
        ("not json at all", "parse"),
        (r#"{"master_sed": 1}"#, "unknown field"),
        (r#"{"sim": {"dt_ms": 1.0}}"#, "unknown field"),
        (r#"{"format_version": 99}"#, "format_version"),
        (
            r#"{"randomization": {"inertia_variation_frac": 0.6}}"#,
            "inertia_variation_frac",
        ),
        (
            r#"{"experiment": {"lie_epsilons_s": [0.015]}}"#,
            "multiple",
        ),
    ];
    for (body, needle) in cases {
        let p = dir.path().join("bad.json");
        fs::write(&p, body).unwrap();
        let out = run(&[
            "lie-sweep",
            "--config",
            p.to_str().unwrap(),
            "--out",
            out_arg,
        ]);
        assert_eq!(code(&out), 2, "config {body:?} should exit 2");
        assert!(
            stderr(&out).contains(needle),
            "stderr for {body:?} should mention {needle:?}, got: {}",
            stderr(&out)
        );
    }
}

#[test]
fn io_errors_exit_3() {
    let dir = TempDir::new().unwrap();

    let out = run(&[
        "lie-sweep",
        "--config",
        dir.path().join("absent.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "missing config file");

    // An output path nested under a regular file cannot be created.
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "x").unwrap();
    let cfg = write_tiny(dir.path());
    let out = run(&[
        "lie-sweep",
        "--config",
        &cfg,
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "unwritable out dir");
}

#[test]
fn analyze_reports_hover_rank_defect_and_si_assemblies() {
    let dir = TempDir::new().unwrap();
    let out = run(&["analyze", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("analysis.json")).unwrap())
            .unwrap();
    assert_eq!(doc["format_version"], 1);

    let hover = &doc["hover"]["controllability"];
    assert_eq!(hover["rank"], 10);
    assert_eq!(hover["n"], 12);
    let labels: Vec<&str> = hover["state_labels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    let wz = labels.iter().position(|&l| l == "wz").unwrap();
    let proj = hover["axis_uncontrollability"][wz].as_f64().unwrap();
    assert!(proj > 1.0 - 1e-6, "wz projection {proj}");

    assert_eq!(doc["attitude_subsystem"]["controllability"]["rank"], 4);

    let imu = &doc["assemblies"][1];
    assert_eq!(imu["name"], "imu_center");
    assert_eq!(imu["mass_kg"].as_f64().unwrap(), 46.0e-6);
    assert_eq!(imu["ixx_kg_m2"].as_f64().unwrap(), 1.984e-9);
}

#[test]
fn mbrl_train_writes_artifacts_and_respects_force() {
    let dir = TempDir::new().unwrap();
    let cfg = write_tiny(dir.path());
    let out_dir = dir.path().join("out");
    let out_str = out_dir.to_str().unwrap();

    let out = run(&["mbrl-train", "--config", &cfg, "--out", out_str]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let csv = fs::read_to_string(out_dir.join("learning_curve.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("seed,trial,variation,episode_reward,yaw_rate_deg_per_s,crashed,steps")
    );
    assert_eq!(lines.count(), 4); // 1 seed x 2 trials x 2 arms
    assert!(out_dir.join("learning_curve_summary.csv").is_file());
    assert!(out_dir.join("models/model_control_00.json").is_file());
    assert!(out_dir.join("models/model_variation_00.json").is_file());
    assert!(out_dir.join("resolved_config.json").is_file());

    // A second run must refuse to clobber results unless forced.
    let out = run(&["mbrl-train", "--config", &cfg, "--out", out_str]);
    assert_eq!(code(&out), 2, "overwrite without --force");
    let out = run(&["mbrl-train", "--config", &cfg, "--out", out_str, "--force"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
}

#[test]
fn mbrl_eval_missing_model_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write_tiny(dir.path());
    let out = run(&[
        "mbrl-eval",
        "--config",
        &cfg,
        "--out",
        dir.path().join("out").to_str().unwrap(),
        "--model",
        dir.path().join("absent.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn mbrl_eval_writes_trajectory_and_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = write_tiny(dir.path());
    let train_dir = dir.path().join("train");
    let out = run(&[
        "mbrl-train",
        "--config",
        &cfg,
        "--out",
        train_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let model = train_dir.join("models/model_control_00.json");

    assert_identical_runs(&[
        "mbrl-eval",
        "--config",
        &cfg,
        "--model",
        model.to_str().unwrap(),
    ]);

    let eval_dir = dir.path().join("eval");
    let out = run(&[
        "mbrl-eval",
        "--config",
        &cfg,
        "--out",
        eval_dir.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let csv = fs::read_to_string(eval_dir.join("trajectory.csv")).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("step,t_s,x,y,z,psi,theta,phi,vx,vy,vz,wx,wy,wz,f1,f2,f3,f4,reward")
    );
    assert_eq!(csv.lines().count(), 41); // header + 40 steps

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(eval_dir.join("eval_summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["format_version"], 1);
    assert_eq!(summary["steps"], 40);
    assert_eq!(summary["crashed"], false);
    assert!(summary["yaw_rate_deg_per_s"].is_f64());
}

#[test]
fn mimic_labels_come_from_the_action_set() {
    let dir = TempDir::new().unwrap();
    let cfg = write_tiny(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "mimic",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let labels = [
        "plus_pitch",
        "minus_pitch",
        "plus_roll",
        "minus_roll",
        "equilibrium",
    ];
    let csv = fs::read_to_string(out_dir.join("mimic_actions.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,chosen_label,lie_reference_label,match");
    assert_eq!(lines.len(), 12); // header + 10 steps + agreement row
    for line in &lines[1..11] {
        let cols: Vec<&str> = line.split(',').collect();
        assert!(labels.contains(&cols[1]), "chosen {line:?}");
        assert!(labels.contains(&cols[2]), "reference {line:?}");
        assert!(cols[3] == "0" || cols[3] == "1");
    }
    let agreement: f64 = lines[11]
        .strip_prefix("agreement,,,")
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.0..=1.0).contains(&agreement));
    assert!(out_dir.join("model_mimic.json").is_file());
}

#[test]
fn seed_override_changes_artifacts() {
    let dir = TempDir::new().unwrap();
    let cfg = write_tiny(dir.path());
    let mut curves = Vec::new();
    for seed in ["1", "2"] {
        let out_dir = dir.path().join(format!("out{seed}"));
        let out = run(&[
            "mbrl-train",
            "--config",
            &cfg,
            "--seed",
            seed,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
        let resolved: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(out_dir.join("resolved_config.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(resolved["master_seed"].to_string(), seed);
        curves.push(fs::read(out_dir.join("learning_curve.csv")).unwrap());
    }
    assert_ne!(curves[0], curves[1]);
}

#[test]
fn resolved_config_reloads_to_the_same_resolution() {
    let dir = TempDir::new().unwrap();
    let cfg = write_tiny(dir.path());
    let first = dir.path().join("first");
    let out = run(&["lie-sweep", "--config", &cfg, "--out", first.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let resolved = first.join("resolved_config.json");
    let second = dir.path().join("second");
    let out = run(&[
        "lie-sweep",
        "--config",
        resolved.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(
        fs::read(&resolved).unwrap(),
        fs::read(second.join("resolved_config.json")).unwrap()
    );
}
