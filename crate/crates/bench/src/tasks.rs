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
//! Randomized planning tasks around a scene's nominal poses.

use rand::Rng;
use tcbirrt_core::collision::WorldModel;
use tcbirrt_core::kinematics::{ik_dual, JointVector};
use tcbirrt_core::planner::{Planner, PlannerParams, Query, QueryError, WorkClock};
use tcbirrt_core::se3::{Pose6, RotationMatrix, Transform, Vec3};
use thiserror::Error;

use crate::scene::{Perturbation, SceneConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct TaskInstance {
    pub id: usize,
    pub start_pose: Pose6,
    pub goal_pose: Pose6,
    pub q_start: JointVector,
    pub q_goal: JointVector,
    /// `[p_e, e_u]` applied to the nominal start and goal.
    pub perturbations: [[f64; 6]; 2],
}

impl TaskInstance {
    pub fn query(&self) -> Query {
        Query {
            q_init: self.q_start.clone(),
            xi_init: self.start_pose,
            q_goal: self.q_goal.clone(),
            xi_goal: self.goal_pose,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("only {generated} of {requested} tasks valid after {draws} draws; the nominal poses look infeasible")]
pub struct GenerationExhausted {
    pub requested: usize,
    pub generated: usize,
    pub draws: usize,
}

/// Generated tasks plus the number of rejected draws.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskSet {
    pub tasks: Vec<TaskInstance>,
    pub resamples: usize,
}

/// Draws `[p_e, e_u]`, each component uniform in its half-width.
pub fn draw_perturbation<R: Rng + ?Sized>(range: &Perturbation, rng: &mut R) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (i, v) in out.iter_mut().enumerate() {
        let w = if i < 3 { range.position } else { range.orientation };
        *v = if w > 0.0 { rng.gen_range(-w..=w) } else { 0.0 };
    }
    out
}

/// `nominal * T_e` with `T_e` built from a drawn perturbation.
pub fn perturb_pose(nominal: &Pose6, e: &[f64; 6]) -> Pose6 {
    if e.iter().all(|v| *v == 0.0) {
        return *nominal;
    }
    let te = Transform::new(RotationMatrix::from_euler(e[3], e[4], e[5]), Vec3::new(e[0], e[1], e[2]));
    Pose6::from_transform(&(nominal.to_transform() * te))
}

fn solve(world: &WorldModel, params: &PlannerParams, seed: &JointVector, pose: &Pose6) -> Option<JointVector> {
    ik_dual(world.system(), seed, &pose.to_transform(), &params.ik).ok().map(|s| s.q)
}

/// Tasks whose start and goal pass every planner precondition; invalid
/// draws are resampled up to `100 * count` times in total.
pub fn generate_tasks<R: Rng + ?Sized>(
    scene: &SceneConfig,
    world: &WorldModel,
    count: usize,
    rng: &mut R,
) -> Result<TaskSet, GenerationExhausted> {
    assert!(count >= 1, "at least one task");
    let params = scene.planner_params(0);
    let checker = Planner::new(world, &params, WorkClock::default());
    let (start, q_start_seed) = scene.nominal_start();
    let (goal, q_goal_seed) = scene.nominal_goal();
    let max_draws = 100 * count;

    let mut tasks = Vec::with_capacity(count);
    let mut draws = 0;
    while tasks.len() < count {
        if draws == max_draws {
            return Err(GenerationExhausted {
                requested: count,
                generated: tasks.len(),
                draws,
            });
        }
        draws += 1;
        let e1 = draw_perturbation(&scene.perturbation, rng);
        let e2 = draw_perturbation(&scene.perturbation, rng);
        let start_pose = perturb_pose(&start, &e1);
        let goal_pose = perturb_pose(&goal, &e2);
        let (Some(q_start), Some(q_goal)) = (
            solve(world, &params, &q_start_seed, &start_pose),
            solve(world, &params, &q_goal_seed, &goal_pose),
        ) else {
            continue;
        };
        let task = TaskInstance {
            id: tasks.len(),
            start_pose,
            goal_pose,
            q_start,
            q_goal,
            perturbations: [e1, e2],
        };
        let valid: Result<(), QueryError> = checker.validate_query(&task.query());
        if valid.is_ok() {
            tasks.push(task);
        }
    }
    Ok(TaskSet {
        resamples: draws - count,
        tasks,
    })
}
