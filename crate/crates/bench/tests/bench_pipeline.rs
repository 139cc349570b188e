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
//! Metrics against brute-force oracles, CSV round trips, benchmark runs and
//! the command-line interface.

use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tcbirrt_bench::export::{read_trials_csv, write_trials_csv, TRIALS_HEADER};
use tcbirrt_bench::metrics::*;
use tcbirrt_bench::run::{run_benchmark, BenchConfig, ClockKind, TrialOutcome};
use tcbirrt_bench::scene::load_scene;
use tcbirrt_bench::tasks::generate_tasks;

fn scene_path(tier: u8) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("scenes/tier{tier}.json"))
}

fn record() -> impl Strategy<Value = TrialRecord> {
    (0..1000usize, any::<bool>(), 0.0..100.0f64, 0..5000usize, 0.0..50.0f64, any::<bool>()).prop_map(
        |(task_id, success, time_s, iterations, path_len_rad, regrasp)| TrialRecord {
            task_id,
            success,
            time_s,
            iterations,
            path_len_rad,
            regrasp,
        },
    )
}

proptest! {
    #[test]
    fn curve_is_monotone_and_ends_at_success_fraction(records in proptest::collection::vec(record(), 1..60)) {
        let curve = success_rate_curve(&records, &default_grid(100.0));
        prop_assert!(curve.windows(2).all(|w| w[0].1 <= w[1].1));
        prop_assert!(curve.iter().all(|(_, p)| (0.0..=1.0).contains(p)));
        let fraction = records.iter().filter(|r| r.success).count() as f64 / records.len() as f64;
        prop_assert_eq!(curve.last().unwrap().1, fraction);
    }

    #[test]
    fn trimmed_stats_match_sort_and_slice(records in proptest::collection::vec(record(), 1..60), k in 1..20usize) {
        let mut times: Vec<f64> = records.iter().filter(|r| r.success).map(|r| r.time_s).collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        match trimmed_time_stats(&records, k) {
            Err(e) => prop_assert_eq!((e.required, e.actual), (k, times.len())),
            Ok(s) => {
                let kept = &times[..k];
                let mean = kept.iter().sum::<f64>() / k as f64;
                prop_assert_eq!(s.mean, mean);
                let var = if k > 1 { kept.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (k - 1) as f64 } else { 0.0 };
                prop_assert_eq!(s.std, var.sqrt());
            }
        }
    }

    #[test]
    fn trials_csv_round_trips(records in proptest::collection::vec(record(), 0..20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trials.csv");
        write_trials_csv(&path, &records).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        prop_assert_eq!(text.lines().count(), records.len() + 1);
        prop_assert_eq!(text.lines().next(), Some(TRIALS_HEADER));
        prop_assert_eq!(read_trials_csv(&path).unwrap(), records);
    }
}

#[test]
fn tier_defaults_for_trimmed_statistics() {
    let n: Vec<usize> = (1..=3).map(|t| load_scene(&scene_path(t)).unwrap().n_t_min()).collect();
    assert_eq!(n, [40, 30, 15]);
}

fn bench(tier: u8, count: usize, seed: u64, config: &BenchConfig) -> Vec<TrialOutcome> {
    let scene = load_scene(&scene_path(tier)).unwrap();
    let world = scene.world();
    let set = generate_tasks(&scene, &world, count, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    let mut out = Vec::new();
    let records = run_benchmark(&scene, &world, &set.tasks, config, |o| {
        out.push(o.clone());
        Ok::<_, ()>(())
    })
    .unwrap();
    assert_eq!(records, out.iter().map(|o| o.record.clone()).collect::<Vec<_>>());
    out
}

#[test]
fn open_scene_solves_nearly_every_task() {
    let out = bench(1, 10, 1, &BenchConfig::new(1, 60.0));
    assert!(out.iter().filter(|o| o.record.success).count() >= 9);
}

#[test]
fn zero_timeout_records_failures_at_zero() {
    let out = bench(1, 4, 2, &BenchConfig::new(2, 0.0));
    for o in out {
        assert!(!o.record.success);
        assert_eq!(o.record.time_s, 0.0);
        assert!(o.plan.is_none());
    }
}

#[test]
fn reruns_and_parallel_runs_match() {
    let work = |workers| BenchConfig {
        clock: ClockKind::Work,
        workers,
        ..BenchConfig::new(5, 60.0)
    };
    let a = bench(3, 6, 5, &work(1));
    let b = bench(3, 6, 5, &work(3));
    let recs = |v: &[TrialOutcome]| v.iter().map(|o| o.record.clone()).collect::<Vec<_>>();
    assert_eq!(recs(&a), recs(&b));
    let wall = bench(3, 6, 5, &BenchConfig::new(5, 60.0));
    let flags = |v: &[TrialOutcome]| v.iter().map(|o| o.record.success).collect::<Vec<_>>();
    assert_eq!(flags(&a), flags(&wall));
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_tcbirrt")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn cli_plan_validate_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let scene = scene_path(2);
    let scene = scene.to_str().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, stderr) = cli(&[
        "plan", "--scene", scene, "--start-pose", "1,0,1.4,0,0,0", "--goal-pose", "-1,0,1.4,0,0,0.5", "--seed", "2",
        "--out", out,
    ]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let path = dir.path().join("path.json");
    let (code, stdout, _) = cli(&["validate", "--path", path.to_str().unwrap(), "--scene", scene]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("valid"));

    // A different scene file has a different hash.
    let other = scene_path(3);
    let (code, _, stderr) = cli(&["validate", "--path", path.to_str().unwrap(), "--scene", other.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("scene hash"));

    let (code, _, _) = cli(&["plan", "--scene", scene, "--start-pose", "1,0,1.4", "--goal-pose", "0,0,0,0,0,0", "--out", out]);
    assert_eq!(code, 1);
    let (code, _, _) = cli(&["bench", "--scene", "/nonexistent.json", "--tasks", "1", "--out", out]);
    assert_eq!(code, 1);
    let (code, _, _) = cli(&["frobnicate"]);
    assert_eq!(code, 1);
    let (code, _, stderr) = cli(&[
        "plan", "--scene", scene, "--start-pose", "1,0,1.4,0,0,0", "--goal-pose", "30,0,1.4,0,0,0", "--out", out,
    ]);
    assert_eq!(code, 2, "{stderr}");
}

#[test]
fn cli_bench_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let scene = scene_path(1);
    let (code, stdout, stderr) = cli(&[
        "bench", "--scene", scene.to_str().unwrap(), "--tasks", "3", "--seed", "4", "--clock", "work", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let records = read_trials_csv(&dir.path().join("trials.csv")).unwrap();
    assert_eq!(records.len(), 3);
    for r in records.iter().filter(|r| r.success) {
        assert!(dir.path().join(format!("path_{:04}.json", r.task_id)).exists());
    }
    let curve = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 101);
    assert!(dir.path().join("report.json").exists());
}
