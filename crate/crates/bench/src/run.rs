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
//! Batch execution of planning tasks.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::Instant;

use tcbirrt_core::collision::WorldModel;
use tcbirrt_core::planner::{tcbirrt_plan, Clock, PlanError, PlanResult, PlannerParams, WallClock, WorkClock};

use crate::metrics::TrialRecord;
use crate::scene::SceneConfig;
use crate::tasks::TaskInstance;

/// Time source for trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ClockKind {
    /// Measured wall-clock seconds.
    #[default]
    Wall,
    /// Deterministic seconds derived from counted IK iterations and
    /// collision checks.
    Work,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub seed: u64,
    pub timeout: f64,
    pub clock: ClockKind,
    /// Parallel planner instances; results are still delivered in task order.
    pub workers: usize,
}

impl BenchConfig {
    pub fn new(seed: u64, timeout: f64) -> Self {
        Self {
            seed,
            timeout,
            clock: ClockKind::Wall,
            workers: 1,
        }
    }
}

/// One trial's record and, on success, its plan.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    pub plan: Option<PlanResult>,
}

/// Runs one task with its own rng seed `seed ^ task.id`.
pub fn run_trial(world: &WorldModel, params: &PlannerParams, task: &TaskInstance, clock: ClockKind) -> TrialOutcome {
    let query = task.query();
    let (result, elapsed) = match clock {
        ClockKind::Wall => {
            let t0 = Instant::now();
            let r = tcbirrt_plan(&query, world, params, WallClock::start());
            (r, t0.elapsed().as_secs_f64())
        }
        ClockKind::Work => {
            let c = WorkClock::default();
            let r = tcbirrt_plan(&query, world, params, &c);
            (r, c.elapsed())
        }
    };
    match result {
        Ok(plan) => TrialOutcome {
            record: TrialRecord {
                task_id: task.id,
                success: true,
                time_s: elapsed,
                iterations: plan.stats.iterations,
                path_len_rad: plan.path_length(),
                regrasp: plan.has_regrasp(),
            },
            plan: Some(plan),
        },
        Err(e) => TrialOutcome {
            record: TrialRecord {
                task_id: task.id,
                success: false,
                time_s: params.timeout,
                iterations: match e {
                    PlanError::Timeout(_, stats) => stats.iterations,
                    PlanError::InvalidQuery(_) => 0,
                },
                path_len_rad: 0.0,
                regrasp: false,
            },
            plan: None,
        },
    }
}

/// Plans every task and hands each outcome to `sink` in task order as soon
/// as it and all earlier tasks are done.
pub fn run_benchmark<E>(
    scene: &SceneConfig,
    world: &WorldModel,
    tasks: &[TaskInstance],
    config: &BenchConfig,
    mut sink: impl FnMut(&TrialOutcome) -> Result<(), E>,
) -> Result<Vec<TrialRecord>, E> {
    assert!(!tasks.is_empty(), "no tasks");
    let params_for = |task: &TaskInstance| {
        let mut p = scene.planner_params(config.seed ^ task.id as u64);
        p.timeout = config.timeout;
        p
    };
    let mut records = Vec::with_capacity(tasks.len());
    let workers = config.workers.clamp(1, tasks.len());
    if workers == 1 {
        for task in tasks {
            let outcome = run_trial(world, &params_for(task), task, config.clock);
            sink(&outcome)?;
            records.push(outcome.record);
        }
        return Ok(records);
    }

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, TrialOutcome)>();
    thread::scope(|s| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let params_for = &params_for;
            s.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(task) = tasks.get(i) else { break };
                let outcome = run_trial(world, &params_for(task), task, config.clock);
                if tx.send((i, outcome)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        for (i, outcome) in rx {
            pending.insert(i, outcome);
            while let Some(outcome) = pending.remove(&records.len()) {
                sink(&outcome)?;
                records.push(outcome.record);
            }
        }
        Ok(records)
    })
}
