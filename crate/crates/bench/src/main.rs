/*
Copyright 2026 The tcbirrt Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
//! `tcbirrt` command-line interface.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tcbirrt_bench::export::{self, path_file_name, PathFile, TrialWriter};
use tcbirrt_bench::metrics::MetricsReport;
use tcbirrt_bench::run::{run_benchmark, BenchConfig, ClockKind};
use tcbirrt_bench::scene::{file_sha256, load_scene, SceneConfig};
use tcbirrt_bench::tasks::generate_tasks;
use tcbirrt_bench::validate::validate_path;
use tcbirrt_core::kinematics::ik_dual;
use tcbirrt_core::planner::{tcbirrt_plan, Planner, Query, WallClock, WorkClock};
use tcbirrt_core::se3::Pose6;

#[derive(Parser)]
#[command(name = "tcbirrt", version, about = "Closed-chain dual-arm motion planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClockArg {
    Wall,
    Work,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one query between two object poses.
    Plan {
        #[arg(long)]
        scene: PathBuf,
        /// Object start pose `x,y,z,roll,pitch,yaw`.
        #[arg(long, allow_hyphen_values = true)]
        start_pose: String,
        /// Object goal pose `x,y,z,roll,pitch,yaw`.
        #[arg(long, allow_hyphen_values = true)]
        goal_pose: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seconds; defaults to the scene's planner timeout.
        #[arg(long)]
        timeout: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run randomized tasks and write trials.csv, curve.csv, report.json and path files.
    Bench {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        tasks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seconds; defaults to the scene's planner timeout.
        #[arg(long)]
        timeout: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// `work` measures deterministic counted-work seconds.
        #[arg(long, value_enum, default_value = "wall")]
        clock: ClockArg,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Replay a path file against a scene.
    Validate {
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        scene: PathBuf,
    },
}

/// Command failures, mapped to exit codes 1 and 2.
enum Failure {
    Config(String),
    Planning(String),
}

impl Failure {
    fn config(e: impl std::fmt::Display) -> Self {
        Self::Config(e.to_string())
    }
}

fn parse_pose(text: &str) -> Result<Pose6, Failure> {
    let values: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Config(format!("pose {text:?}: {e}")))?;
    let arr: [f64; 6] = values
        .try_into()
        .map_err(|v: Vec<f64>| Failure::Config(format!("pose {text:?}: {} values, expected 6", v.len())))?;
    if arr.iter().any(|v| !v.is_finite()) {
        return Err(Failure::Config(format!("pose {text:?}: non-finite value")));
    }
    Ok(Pose6::from_array(arr))
}

fn load(path: &Path) -> Result<(SceneConfig, String), Failure> {
    let scene = load_scene(path).map_err(Failure::config)?;
    let hash = file_sha256(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok((scene, hash))
}

fn timeout_or_scene(timeout: Option<f64>, scene: &SceneConfig) -> Result<f64, Failure> {
    let t = timeout.unwrap_or(scene.planner.timeout);
    if !(t.is_finite() && t >= 0.0) {
        return Err(Failure::Config(format!("timeout must be non-negative, got {t}")));
    }
    Ok(t)
}

fn plan(
    scene_path: &Path,
    start: &str,
    goal: &str,
    seed: u64,
    timeout: Option<f64>,
    out: &Path,
) -> Result<(), Failure> {
    let (scene, hash) = load(scene_path)?;
    let (xi_init, xi_goal) = (parse_pose(start)?, parse_pose(goal)?);
    let world = scene.world();
    let mut params = scene.planner_params(seed);
    params.timeout = timeout_or_scene(timeout, &scene)?;
    fs::create_dir_all(out).map_err(|e| Failure::Config(format!("{}: {e}", out.display())))?;

    let solve = |seed_q, xi: &Pose6, which| {
        ik_dual(world.system(), seed_q, &xi.to_transform(), &params.ik)
            .map(|s| s.q)
            .map_err(|e| Failure::Planning(format!("no IK solution for the {which} pose: {e}")))
    };
    let query = Query {
        q_init: solve(&scene.nominal_start().1, &xi_init, "start")?,
        xi_init,
        q_goal: solve(&scene.nominal_goal().1, &xi_goal, "goal")?,
        xi_goal,
    };
    Planner::new(&world, &params, WorkClock::default())
        .validate_query(&query)
        .map_err(|e| Failure::Planning(e.to_string()))?;

    let result = tcbirrt_plan(&query, &world, &params, WallClock::start()).map_err(|e| Failure::Planning(e.to_string()))?;
    let file = PathFile::from_plan(&result, &hash, seed, None);
    let path = out.join("path.json");
    export::write_path_file(&path, &file).map_err(Failure::config)?;
    let s = &result.stats;
    println!(
        "planned in {:.3} s, {} iterations, trees {}+{}, {} segments, regrasp {}, path length {:.3} rad",
        s.planning_time,
        s.iterations,
        s.tree_sizes[0],
        s.tree_sizes[1],
        result.segments.len(),
        result.has_regrasp(),
        result.path_length()
    );
    println!("wrote {}", path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bench(
    scene_path: &Path,
    count: usize,
    seed: u64,
    timeout: Option<f64>,
    out: &Path,
    clock: ClockArg,
    workers: usize,
) -> Result<(), Failure> {
    if count == 0 {
        return Err(Failure::Config("--tasks must be at least 1".into()));
    }
    let (scene, hash) = load(scene_path)?;
    let timeout = timeout_or_scene(timeout, &scene)?;
    let world = scene.world();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let set = generate_tasks(&scene, &world, count, &mut rng).map_err(Failure::config)?;
    eprintln!("generated {count} tasks ({} resampled draws)", set.resamples);

    fs::create_dir_all(out).map_err(|e| Failure::Config(format!("{}: {e}", out.display())))?;
    let mut writer = TrialWriter::create(&out.join("trials.csv")).map_err(Failure::config)?;
    let config = BenchConfig {
        seed,
        timeout,
        clock: match clock {
            ClockArg::Wall => ClockKind::Wall,
            ClockArg::Work => ClockKind::Work,
        },
        workers,
    };
    let records = run_benchmark(&scene, &world, &set.tasks, &config, |o| {
        writer.write(&o.record)?;
        if let Some(plan) = &o.plan {
            let file = PathFile::from_plan(plan, &hash, seed ^ o.record.task_id as u64, Some(o.record.task_id));
            export::write_path_file(&out.join(path_file_name(o.record.task_id)), &file)?;
        }
        let r = &o.record;
        eprintln!(
            "task {:>4}: {} {:.3} s{}",
            r.task_id,
            if r.success { "ok  " } else { "fail" },
            r.time_s,
            if r.regrasp { " (regrasp)" } else { "" }
        );
        Ok::<_, export::ExportError>(())
    })
    .map_err(Failure::config)?;

    let report = MetricsReport::new(&scene.name, &records, timeout, scene.n_t_min());
    export::write_curve_csv(&out.join("curve.csv"), &report.curve).map_err(Failure::config)?;
    export::write_report(&out.join("report.json"), &report).map_err(Failure::config)?;
    println!(
        "{}: {}/{} succeeded ({:.1}%), {} with regrasp, median time {}",
        scene.name,
        report.successes,
        report.trials,
        100.0 * report.success_rate,
        report.regrasps,
        report.median_time.map_or("n/a".into(), |t| format!("{t:.3} s"))
    );
    match report.time_stats {
        Ok(s) => println!("fastest {}: mean {:.3} s, std {:.3} s", report.n_t_min, s.mean, s.std),
        Err(e) => println!("time statistics unavailable: {e}"),
    }
    Ok(())
}

fn validate(path: &Path, scene_path: &Path) -> Result<(), Failure> {
    let (scene, hash) = load(scene_path)?;
    let file = export::read_path_file(path).map_err(Failure::config)?;
    let world = scene.world();
    let params = scene.planner_params(file.metadata.seed);
    match validate_path(&world, &params, &file, Some(&hash)) {
        Ok(s) => {
            println!(
                "valid: {} segments, {} states, {} regrasp segments",
                s.segments, s.states, s.regrasp_segments
            );
            Ok(())
        }
        Err(violations) => {
            for v in &violations {
                eprintln!("{}: {v}", path.display());
            }
            Err(Failure::Planning(format!("{} violations", violations.len())))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Plan {
            scene,
            start_pose,
            goal_pose,
            seed,
            timeout,
            out,
        } => plan(&scene, &start_pose, &goal_pose, seed, timeout, &out),
        Command::Bench {
            scene,
            tasks,
            seed,
            timeout,
            out,
            clock,
            workers,
        } => bench(&scene, tasks, seed, timeout, &out, clock, workers),
        Command::Validate { path, scene } => validate(&path, &scene),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Planning(msg)) => {
            eprintln!("failed: {msg}");
            ExitCode::from(2)
        }
    }
}
