//! The five experiment commands and their artifacts. Every command writes
//! `resolved_config.json` (the post-override config) into its output
//! directory, so a run can be reproduced from the artifacts alone.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::distr::{Distribution, Uniform};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use iono_core::analysis::{
    analyze, analyze_yaw, linearize, ControllabilityReport, LinearSystem, LinearizeOptions,
};
use iono_core::lie::{lie_sweep, LieActionSet, LieSequenceConfig};
use iono_core::mbrl::{
    evaluate, mbrl_loop, ActionMode, DynamicsModel, Env, LoopConfig, MpcConfig, RewardConfig,
    RewardMode, RobotRun,
};
use iono_core::seeds::{self, child_seed};
use iono_core::{InertialConfig, State12, ThrusterCommand, STATE_LABELS};

use crate::config::{LabConfig, RandomizationBlock, CONFIG_FORMAT_VERSION};
use crate::csvio::write_csv;
use crate::error::LabError;

// Fan-out: master -> experiment -> robot -> stream, so adding seeds or arms
// never perturbs existing streams. Experiment indices 0 and 1 are reserved
// for lie-sweep and analyze, which consume no randomness.
const EXP_MBRL_TRAIN: u64 = 2;
const EXP_MBRL_EVAL: u64 = 3;
const EXP_MIMIC: u64 = 4;

// Robot-level substreams. mbrl_loop owns child indices below 3000 for its
// per-trial noise/control/train streams; offsets here stay above them.
const ARM_VARIATION: u64 = 0;
const ARM_CONTROL: u64 = 10_000;
const ROBOT_RANDOMIZE: u64 = 3_000;
const ROBOT_EVAL_NOISE: u64 = 4_000;
const ROBOT_EVAL_CTRL: u64 = 5_000;

/// Stream root for one trained robot.
pub fn train_robot_seed(master_seed: u64, variation: bool, robot: usize) -> u64 {
    let exp = child_seed(master_seed, EXP_MBRL_TRAIN);
    let arm = if variation { ARM_VARIATION } else { ARM_CONTROL };
    child_seed(exp, arm + robot as u64)
}

/// Process-noise stream for post-training evaluation episode `episode`.
pub fn eval_noise_seed(robot_seed: u64, episode: usize) -> u64 {
    child_seed(robot_seed, ROBOT_EVAL_NOISE + episode as u64)
}

/// Policy stream for post-training evaluation episode `episode`.
pub fn eval_ctrl_seed(robot_seed: u64, episode: usize) -> u64 {
    child_seed(robot_seed, ROBOT_EVAL_CTRL + episode as u64)
}

/// Draw one randomized vehicle: mass and the three inertia moments each scale
/// by an independent U(1 - v, 1 + v) factor, then roll and pitch start from
/// U(-r, r). The draw order is part of the reproducibility contract.
pub fn randomize_env(
    base: &InertialConfig,
    cfg: &RandomizationBlock,
    rng: &mut ChaCha12Rng,
) -> (InertialConfig, State12) {
    let v = cfg.inertia_variation_frac;
    let factor = Uniform::new_inclusive(1.0 - v, 1.0 + v).expect("validated range");
    let inertial = InertialConfig {
        mass: base.mass * factor.sample(rng),
        ixx: base.ixx * factor.sample(rng),
        iyy: base.iyy * factor.sample(rng),
        izz: base.izz * factor.sample(rng),
        ..*base
    };
    let r = cfg.init_angle_range_deg.to_radians();
    let angle = Uniform::new_inclusive(-r, r).expect("validated range");
    let phi = angle.sample(rng);
    let theta = angle.sample(rng);
    (
        inertial,
        State12 {
            theta,
            phi,
            ..State12::zero()
        },
    )
}

/// Create the output directory and drop the resolved config into it.
fn prepare_out(cfg: &LabConfig, out: &Path) -> Result<(), LabError> {
    fs::create_dir_all(out)?;
    let body = serde_json::to_string_pretty(cfg).expect("config serializes");
    fs::write(out.join("resolved_config.json"), body + "\n")?;
    Ok(())
}

/// Linear-interpolation percentile over ascending `sorted`, p in [0, 1].
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

/// Strict sign changes; a sample exactly at zero joins neither side.
fn zero_crossings(xs: &[f64]) -> usize {
    xs.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}

pub const LIE_SWEEP_HEADER: &str = "epsilon_s,yaw_rate_deg_per_s,stop_time_s";

pub fn cmd_lie_sweep(cfg: &LabConfig, out: &Path) -> Result<(), LabError> {
    prepare_out(cfg, out)?;
    let rows = lie_sweep(
        &cfg.experiment.lie_epsilons_s,
        &cfg.sim(),
        &cfg.inertial(),
        &LieActionSet::default(),
        cfg.experiment.sweep_cap_s,
    )?;
    let lines: Vec<String> = rows
        .iter()
        .map(|r| format!("{},{},{}", r.epsilon_s, r.yaw_rate_deg_per_s, r.stop_time_s))
        .collect();
    let path = out.join("lie_sweep.csv");
    write_csv(&path, LIE_SWEEP_HEADER, &lines)?;
    println!("wrote {} ({} rows)", path.display(), lines.len());
    Ok(())
}

/// Relative singular-value cutoff for every rank decision in analysis.json.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// State indices of the attitude subsystem (angles and body rates).
const ATTITUDE_IDX: [usize; 6] = [3, 4, 5, 9, 10, 11];

/// Measured assembly variants: (name, mass mg, ixx/iyy/izz g mm^2).
const ASSEMBLIES: [(&str, f64, f64, f64, f64); 3] = [
    ("no_imu", 26.0, 1.967, 1.967, 3.775),
    ("imu_center", 46.0, 1.984, 1.983, 3.804),
    ("imu_5mm_x_error", 46.0, 2.262, 1.983, 4.083),
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisDoc {
    pub format_version: u32,
    pub hover: SystemDoc,
    pub attitude_subsystem: SystemDoc,
    pub assemblies: Vec<AssemblyDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemDoc {
    pub x_star: Vec<f64>,
    pub u_star: Vec<f64>,
    /// Row-major A and B.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub residual_norm: f64,
    pub at_equilibrium: bool,
    pub controllability: ControllabilityReport,
}

/// One measured assembly in SI units (no simulation calibration applied).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssemblyDoc {
    pub name: String,
    pub mass_kg: f64,
    pub ixx_kg_m2: f64,
    pub iyy_kg_m2: f64,
    pub izz_kg_m2: f64,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter()
        .map(|row| row.iter().copied().collect())
        .collect()
}

pub fn cmd_analyze(cfg: &LabConfig, out: &Path) -> Result<AnalysisDoc, LabError> {
    prepare_out(cfg, out)?;
    let inertial = cfg.inertial();
    let x_star = State12::zero();
    let u_star = ThrusterCommand::uniform(inertial.hover_force());
    let system = linearize(&x_star, &u_star, &inertial, &LinearizeOptions::default())?;
    let hover_report = analyze_yaw(&system, RANK_TOLERANCE)?;

    // Attitude subsystem, angles and rates only. The four thruster columns
    // span the same torque plane as a two-torque input, so the rank decision
    // is unchanged by keeping them.
    let sub_a = DMatrix::from_fn(6, 6, |i, j| system.a[(ATTITUDE_IDX[i], ATTITUDE_IDX[j])]);
    let sub_b = DMatrix::from_fn(6, 4, |i, j| system.b[(ATTITUDE_IDX[i], j)]);
    let sub_labels: Vec<&str> = ATTITUDE_IDX.iter().map(|&i| STATE_LABELS[i]).collect();
    let sub_system = LinearSystem {
        a: sub_a,
        b: sub_b,
        x_star,
        u_star,
        at_equilibrium: system.at_equilibrium,
        residual_norm: system.residual_norm,
    };
    let sub_report = analyze(&sub_system, &sub_labels, RANK_TOLERANCE)?;

    let doc = AnalysisDoc {
        format_version: CONFIG_FORMAT_VERSION,
        hover: SystemDoc {
            x_star: x_star.to_array().to_vec(),
            u_star: u_star.to_array().to_vec(),
            a: matrix_rows(&system.a),
            b: matrix_rows(&system.b),
            residual_norm: system.residual_norm,
            at_equilibrium: system.at_equilibrium,
            controllability: hover_report,
        },
        attitude_subsystem: SystemDoc {
            x_star: ATTITUDE_IDX.iter().map(|&i| x_star.to_array()[i]).collect(),
            u_star: u_star.to_array().to_vec(),
            a: matrix_rows(&sub_system.a),
            b: matrix_rows(&sub_system.b),
            residual_norm: sub_system.residual_norm,
            at_equilibrium: sub_system.at_equilibrium,
            controllability: sub_report,
        },
        assemblies: ASSEMBLIES
            .iter()
            .map(|(name, mass_mg, ixx, iyy, izz)| AssemblyDoc {
                name: name.to_string(),
                mass_kg: mass_mg * 1e-6,
                ixx_kg_m2: ixx * 1e-9,
                iyy_kg_m2: iyy * 1e-9,
                izz_kg_m2: izz * 1e-9,
            })
            .collect(),
    };
    let path = out.join("analysis.json");
    fs::write(
        &path,
        serde_json::to_string_pretty(&doc).expect("doc serializes") + "\n",
    )?;
    println!(
        "wrote {} (hover rank {}/{}, attitude rank {}/6)",
        path.display(),
        doc.hover.controllability.rank,
        doc.hover.controllability.n,
        doc.attitude_subsystem.controllability.rank
    );
    Ok(doc)
}

pub const LEARNING_CURVE_HEADER: &str =
    "seed,trial,variation,episode_reward,yaw_rate_deg_per_s,crashed,steps";
pub const LEARNING_CURVE_SUMMARY_HEADER: &str = "trial,variation,episode_reward_median,\
episode_reward_p65,episode_reward_p95,yaw_rate_deg_per_s_median,crash_fraction";

#[derive(Debug, Clone)]
pub struct RobotArtifact {
    pub seed_index: usize,
    pub variation: bool,
    pub robot_seed: u64,
    pub inertial: InertialConfig,
    pub x0: State12,
    pub run: RobotRun,
    pub model_path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct TrainArtifacts {
    pub robots: Vec<RobotArtifact>,
}

fn arm_name(variation: bool) -> &'static str {
    if variation {
        "variation"
    } else {
        "control"
    }
}

/// Train `num_seeds` robots per arm: a control arm (nominal vehicle, level
/// start) and a variation arm (randomized inertia and initial tilt). Emits
/// the per-trial learning curve, per-arm aggregates, and every final model.
pub fn cmd_mbrl_train(
    cfg: &LabConfig,
    out: &Path,
    force: bool,
) -> Result<TrainArtifacts, LabError> {
    let curve_path = out.join("learning_curve.csv");
    if curve_path.exists() && !force {
        return Err(LabError::Config(format!(
            "{} already exists; pass --force to overwrite",
            curve_path.display()
        )));
    }
    prepare_out(cfg, out)?;
    let models_dir = out.join("models");
    fs::create_dir_all(&models_dir)?;

    let base = cfg.inertial();
    let sim = cfg.sim();
    let loop_cfg = cfg.loop_cfg();
    let mut robots = Vec::with_capacity(2 * cfg.experiment.num_seeds);
    for variation in [false, true] {
        for r in 0..cfg.experiment.num_seeds {
            let robot_seed = train_robot_seed(cfg.master_seed, variation, r);
            let (inertial, x0) = if variation {
                let mut rng = seeds::rng(child_seed(robot_seed, ROBOT_RANDOMIZE));
                randomize_env(&base, &cfg.randomization, &mut rng)
            } else {
                (base, State12::zero())
            };
            let env = Env::new(sim, inertial, x0)?;
            let t0 = Instant::now();
            let run = mbrl_loop(&env, &loop_cfg, robot_seed)?;
            let model_path = models_dir.join(format!("model_{}_{r:02}.json", arm_name(variation)));
            run.model.save_json(&model_path)?;
            let last = run.summaries.last().expect("num_trials >= 1");
            println!(
                "{} {r:02}: final reward {:.3}, yaw {:.2} deg/s, {} transitions, {:.1} s",
                arm_name(variation),
                last.episode_reward,
                last.yaw_rate_deg_s,
                run.dataset.len(),
                t0.elapsed().as_secs_f64()
            );
            robots.push(RobotArtifact {
                seed_index: r,
                variation,
                robot_seed,
                inertial,
                x0,
                run,
                model_path,
            });
        }
    }

    let mut keyed: Vec<((usize, usize, bool), String)> = Vec::new();
    for robot in &robots {
        for s in &robot.run.summaries {
            keyed.push((
                (robot.seed_index, s.trial, robot.variation),
                format!(
                    "{},{},{},{},{},{},{}",
                    robot.seed_index,
                    s.trial,
                    robot.variation,
                    s.episode_reward,
                    s.yaw_rate_deg_s,
                    s.crashed,
                    s.steps
                ),
            ));
        }
    }
    keyed.sort_by_key(|(k, _)| *k);
    let rows: Vec<String> = keyed.into_iter().map(|(_, row)| row).collect();
    write_csv(&curve_path, LEARNING_CURVE_HEADER, &rows)?;

    let mut summary_rows = Vec::new();
    for trial in 0..cfg.experiment.num_trials {
        for variation in [false, true] {
            let mut rewards = Vec::new();
            let mut yaws = Vec::new();
            let mut crashes = 0usize;
            for robot in robots.iter().filter(|r| r.variation == variation) {
                let s = &robot.run.summaries[trial];
                rewards.push(s.episode_reward);
                yaws.push(s.yaw_rate_deg_s);
                crashes += usize::from(s.crashed);
            }
            rewards.sort_by(|a, b| a.total_cmp(b));
            yaws.sort_by(|a, b| a.total_cmp(b));
            summary_rows.push(format!(
                "{},{},{},{},{},{},{}",
                trial,
                variation,
                percentile(&rewards, 0.5),
                percentile(&rewards, 0.65),
                percentile(&rewards, 0.95),
                percentile(&yaws, 0.5),
                crashes as f64 / rewards.len() as f64
            ));
        }
    }
    write_csv(
        &out.join("learning_curve_summary.csv"),
        LEARNING_CURVE_SUMMARY_HEADER,
        &summary_rows,
    )?;
    println!("wrote {} ({} rows)", curve_path.display(), rows.len());
    Ok(TrainArtifacts { robots })
}

pub const TRAJECTORY_HEADER: &str =
    "step,t_s,x,y,z,psi,theta,phi,vx,vy,vz,wx,wy,wz,f1,f2,f3,f4,reward";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalSummary {
    pub format_version: u32,
    pub steps: usize,
    pub crashed: bool,
    pub episode_reward: f64,
    pub yaw_rate_deg_per_s: f64,
    /// Strict sign changes over the logged pitch sequence; an out-of-phase
    /// roll/pitch oscillation shows up as several crossings on both axes.
    pub theta_zero_crossings: usize,
    pub phi_zero_crossings: usize,
    pub elapsed_s: f64,
}

/// Roll out a saved model closed-loop from level hover, logging the full
/// trajectory for external plotting.
pub fn cmd_mbrl_eval(
    cfg: &LabConfig,
    out: &Path,
    model_path: &Path,
) -> Result<EvalSummary, LabError> {
    let body = fs::read_to_string(model_path)?;
    let model: DynamicsModel = serde_json::from_str(&body)
        .map_err(|e| LabError::Config(format!("parse {}: {e}", model_path.display())))?;
    model.validate().map_err(|e| LabError::Config(e.to_string()))?;
    prepare_out(cfg, out)?;

    let env = Env::hover(cfg.sim(), cfg.inertial())?;
    let exp_seed = child_seed(cfg.master_seed, EXP_MBRL_EVAL);
    let outp = evaluate(
        &env,
        &model,
        &cfg.mpc(),
        &cfg.reward(),
        cfg.experiment.steps_per_trial,
        eval_noise_seed(exp_seed, 0),
        eval_ctrl_seed(exp_seed, 0),
    )?;
    let record = &outp.record;

    let rows: Vec<String> = record
        .log
        .iter()
        .enumerate()
        .map(|(i, step)| {
            let mut row = format!("{i},{}", step.t);
            for v in step.state.to_array().iter().chain(step.action.to_array().iter()) {
                row.push(',');
                row.push_str(&format!("{v}"));
            }
            row.push(',');
            row.push_str(&format!("{}", step.reward));
            row
        })
        .collect();
    write_csv(&out.join("trajectory.csv"), TRAJECTORY_HEADER, &rows)?;

    let thetas: Vec<f64> = record
        .log
        .iter()
        .map(|s| s.state.theta)
        .chain([record.final_state.theta])
        .collect();
    let phis: Vec<f64> = record
        .log
        .iter()
        .map(|s| s.state.phi)
        .chain([record.final_state.phi])
        .collect();
    let summary = EvalSummary {
        format_version: CONFIG_FORMAT_VERSION,
        steps: record.steps(),
        crashed: record.crashed,
        episode_reward: record.episode_reward,
        yaw_rate_deg_per_s: record.yaw_rate_deg_s(),
        theta_zero_crossings: zero_crossings(&thetas),
        phi_zero_crossings: zero_crossings(&phis),
        elapsed_s: record.elapsed,
    };
    fs::write(
        out.join("eval_summary.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
    )?;
    println!(
        "eval: {} steps, crashed {}, yaw {:.2} deg/s, zero crossings theta {} phi {}",
        summary.steps,
        summary.crashed,
        summary.yaw_rate_deg_per_s,
        summary.theta_zero_crossings,
        summary.phi_zero_crossings
    );
    Ok(summary)
}

pub const MIMIC_HEADER: &str = "step,chosen_label,lie_reference_label,match";

#[derive(Debug, Clone)]
pub struct MimicOutcome {
    pub chosen: Vec<String>,
    pub reference: Vec<String>,
    pub matches: usize,
    pub agreement: f64,
}

/// Train in the discrete action set from a tilted start on a symmetric
/// vehicle, then log the planner's first choices against the phased
/// open-loop reference at `mimic_epsilon_s`.
pub fn cmd_mimic(cfg: &LabConfig, out: &Path) -> Result<MimicOutcome, LabError> {
    prepare_out(cfg, out)?;
    let base = cfg.inertial();
    // Symmetric roll/pitch inertia so neither tilt axis is privileged in the
    // action comparison.
    let sym = 0.5 * (base.ixx + base.iyy);
    let inertial = InertialConfig {
        ixx: sym,
        iyy: sym,
        ..base
    };
    let e = &cfg.experiment;
    let x0 = State12 {
        theta: e.mimic_init_pitch_deg.to_radians(),
        phi: e.mimic_init_roll_deg.to_radians(),
        ..State12::zero()
    };
    let env = Env::new(cfg.sim(), inertial, x0)?;

    let actions = LieActionSet::default();
    // The experiment is defined on the discrete action set with the
    // attitude-window reward, whatever the planner block says.
    let mpc = MpcConfig {
        mode: ActionMode::DiscreteLie { actions },
        ..cfg.mpc()
    };
    let reward = RewardConfig {
        mode: RewardMode::Sliding,
        ..cfg.reward()
    };
    let loop_cfg = LoopConfig {
        mpc: mpc.clone(),
        reward,
        ..cfg.loop_cfg()
    };

    let robot_seed = child_seed(child_seed(cfg.master_seed, EXP_MIMIC), 0);
    let run = mbrl_loop(&env, &loop_cfg, robot_seed)?;
    run.model.save_json(&out.join("model_mimic.json"))?;

    let outp = evaluate(
        &env,
        &run.model,
        &mpc,
        &reward,
        e.mimic_logged_steps,
        eval_noise_seed(robot_seed, 0),
        eval_ctrl_seed(robot_seed, 0),
    )?;
    let reference_cfg = LieSequenceConfig {
        epsilon: e.mimic_epsilon_s,
        actions,
    };
    let control_period = cfg.sim().control_period;

    let mut rows = Vec::new();
    let mut chosen = Vec::new();
    let mut reference = Vec::new();
    let mut matches = 0usize;
    for (k, step) in outp.record.log.iter().enumerate() {
        let c = actions.identify(&step.action).map_or("unknown", |a| a.label());
        let r = reference_cfg.action_at(k as f64 * control_period).label();
        if c == r {
            matches += 1;
        }
        rows.push(format!("{k},{c},{r},{}", u8::from(c == r)));
        chosen.push(c.to_string());
        reference.push(r.to_string());
    }
    let agreement = matches as f64 / rows.len().max(1) as f64;
    rows.push(format!("agreement,,,{agreement}"));
    write_csv(&out.join("mimic_actions.csv"), MIMIC_HEADER, &rows)?;
    println!(
        "mimic: {matches}/{} actions match the phased reference",
        chosen.len()
    );
    Ok(MimicOutcome {
        chosen,
        reference,
        matches,
        agreement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn randomize_env_is_seeded_and_bounded() {
        let base = InertialConfig::default();
        let cfg = RandomizationBlock::default();
        let draw = |seed: u64| {
            let mut rng = seeds::rng(seed);
            randomize_env(&base, &cfg, &mut rng)
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9).1, draw(10).1);

        for seed in 0..50 {
            let (inertial, x0) = draw(seed);
            for (v, b) in [
                (inertial.mass, base.mass),
                (inertial.ixx, base.ixx),
                (inertial.iyy, base.iyy),
                (inertial.izz, base.izz),
            ] {
                assert!(v >= 0.85 * b && v <= 1.15 * b);
            }
            let r = 22.5_f64.to_radians();
            assert!(x0.theta.abs() <= r && x0.phi.abs() <= r);
            assert_eq!(x0.psi, 0.0);
            assert_eq!((x0.vx, x0.vy, x0.vz), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn zero_variation_returns_the_base_but_still_draws_angles() {
        let base = InertialConfig::default();
        let cfg = RandomizationBlock {
            inertia_variation_frac: 0.0,
            ..RandomizationBlock::default()
        };
        let mut rng = seeds::rng(3);
        let (inertial, x0) = randomize_env(&base, &cfg, &mut rng);
        assert_eq!(inertial, base);
        assert!(x0.theta != 0.0 && x0.phi != 0.0);
    }

    #[test]
    fn percentile_interpolates_linearly() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(percentile(&xs, 0.5), 2.5);
        assert_relative_eq!(percentile(&xs, 0.65), 2.95);
        assert_relative_eq!(percentile(&xs, 0.95), 3.85);
        assert_relative_eq!(percentile(&xs, 0.0), 1.0);
        assert_relative_eq!(percentile(&xs, 1.0), 4.0);
        assert_relative_eq!(percentile(&[7.0], 0.65), 7.0);
    }

    #[test]
    fn zero_crossings_are_strict() {
        assert_eq!(zero_crossings(&[1.0, -1.0, 2.0, 0.0, 3.0]), 2);
        assert_eq!(zero_crossings(&[1.0, 2.0, 3.0]), 0);
        assert_eq!(zero_crossings(&[]), 0);
        assert_eq!(zero_crossings(&[-1.0, 1.0, -1.0, 1.0]), 3);
    }

    #[test]
    fn lie_sweep_writes_the_exact_header() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = LabConfig::default();
        cfg.experiment.lie_epsilons_s = vec![0.01, 0.02];
        cfg.experiment.sweep_cap_s = 0.5;
        cmd_lie_sweep(&cfg, dir.path()).unwrap();
        let body = fs::read_to_string(dir.path().join("lie_sweep.csv")).unwrap();
        let mut lines = body.lines();
        assert_eq!(lines.next(), Some(LIE_SWEEP_HEADER));
        assert_eq!(lines.count(), 2);
        assert!(dir.path().join("resolved_config.json").exists());
    }

    #[test]
    fn analyze_reports_the_underactuated_pair_and_si_assemblies() {
        let dir = tempfile::tempdir().unwrap();
        let doc = cmd_analyze(&LabConfig::default(), dir.path()).unwrap();
        assert_eq!(doc.format_version, CONFIG_FORMAT_VERSION);

        let hover = &doc.hover.controllability;
        assert!(doc.hover.at_equilibrium);
        assert_eq!(hover.rank, 10);
        assert!(hover.axis_uncontrollability[3] > 1.0 - 1e-6); // psi
        assert!(hover.axis_uncontrollability[11] > 1.0 - 1e-6); // wz

        let sub = &doc.attitude_subsystem.controllability;
        assert_eq!(sub.n, 6);
        assert_eq!(sub.rank, 4);
        assert_eq!(sub.state_labels[0], "psi");

        assert_eq!(doc.assemblies.len(), 3);
        let center = &doc.assemblies[1];
        assert_eq!(center.name, "imu_center");
        assert_relative_eq!(center.ixx_kg_m2, 1.984e-9);
        assert_relative_eq!(center.mass_kg, 46.0e-6);

        // The document parses back with the same shape.
        let body = fs::read_to_string(dir.path().join("analysis.json")).unwrap();
        let back: AnalysisDoc = serde_json::from_str(&body).unwrap();
        assert_eq!(back.hover.controllability.rank, 10);
    }

    #[test]
    fn train_seed_fanout_is_arm_and_robot_disjoint() {
        let mut seen = std::collections::HashSet::new();
        for variation in [false, true] {
            for r in 0..100 {
                assert!(seen.insert(train_robot_seed(0, variation, r)));
            }
        }
        assert_ne!(train_robot_seed(0, true, 0), train_robot_seed(1, true, 0));
    }
}
