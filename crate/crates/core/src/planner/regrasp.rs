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
//! Joint-space RRT-Connect used to reconfigure the arms while the object
//! stays fixed.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use super::clock::Clock;
use crate::collision::{ObjectPlacement, WorldModel};
use crate::kinematics::JointVector;
use crate::se3::Transform;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegraspMode {
    /// One search over both arms' joints.
    Joint,
    /// Arm 1 reconfigures first, then arm 2.
    Sequential,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegraspParams {
    /// Wall-clock (or work-clock) budget per attempt, seconds.
    pub budget: f64,
    /// Iteration cap per attempt; keeps attempts reproducible.
    pub max_iterations: usize,
    /// Largest max-norm joint step of one tree extension.
    pub edge_step: f64,
    /// Max-norm spacing of collision checks along an edge.
    pub collision_step: f64,
    /// An arm whose endpoints differ by at most this much does not move.
    pub freeze_tol: f64,
    pub mode: RegraspMode,
}

impl Default for RegraspParams {
    fn default() -> Self {
        Self {
            budget: 5.0,
            max_iterations: 2000,
            edge_step: 0.3,
            collision_step: 0.2,
            freeze_tol: 1e-6,
            mode: RegraspMode::Joint,
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum RegraspError {
    #[error("no connection within the budget of {budget} s")]
    Timeout { budget: f64 },
    #[error("regrasp endpoint in collision")]
    EndpointInCollision,
}

/// Search state for one RRT-Connect attempt.
pub(crate) struct Connector<'a, R: ?Sized, C: ?Sized> {
    pub world: &'a WorldModel,
    pub params: &'a RegraspParams,
    pub object: Transform,
    pub rng: &'a mut R,
    pub clock: &'a C,
    /// Absolute deadline of the enclosing plan.
    pub deadline: f64,
    pub collision_checks: usize,
}

enum Status {
    Reached(usize),
    Advanced(usize),
    Trapped,
}

struct JointTree {
    nodes: Vec<(JointVector, Option<usize>)>,
}

impl JointTree {
    fn new(root: JointVector) -> Self {
        Self {
            nodes: vec![(root, None)],
        }
    }

    fn nearest(&self, q: &JointVector) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, (n, _)) in self.nodes.iter().enumerate() {
            let d = n.distance(q);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }

    fn path_to_root(&self, mut i: usize) -> Vec<JointVector> {
        let mut out = vec![self.nodes[i].0.clone()];
        while let Some(p) = self.nodes[i].1 {
            out.push(self.nodes[p].0.clone());
            i = p;
        }
        out
    }
}

impl<R: Rng + ?Sized, C: Clock + ?Sized> Connector<'_, R, C> {
    fn segment_free(&mut self, from: &JointVector, to: &JointVector) -> bool {
        let (free, checks) =
            self.world
                .joint_segment_checks(from, to, self.params.collision_step, &self.object);
        self.collision_checks += checks;
        self.clock.charge(0, checks);
        free
    }

    fn extend(&mut self, tree: &mut JointTree, target: &JointVector) -> Status {
        let near = tree.nearest(target);
        let q_near = tree.nodes[near].0.clone();
        let span = q_near.max_abs_diff(target);
        let (q_new, reached) = if span <= self.params.edge_step {
            (target.clone(), true)
        } else {
            (q_near.lerp(target, self.params.edge_step / span), false)
        };
        if !self.segment_free(&q_near, &q_new) {
            return Status::Trapped;
        }
        tree.nodes.push((q_new, Some(near)));
        let id = tree.nodes.len() - 1;
        if reached {
            Status::Reached(id)
        } else {
            Status::Advanced(id)
        }
    }

    fn sample(&mut self, template: &JointVector, active: &[bool]) -> JointVector {
        let limits = self
            .world
            .system()
            .arms()
            .iter()
            .flat_map(|a| a.limits().iter().copied());
        let mut q = template.clone();
        for (i, (lo, hi)) in limits.enumerate() {
            if active[i] {
                q[i] = lo + (hi - lo) * self.rng.gen::<f64>();
            }
        }
        q
    }

    fn out_of_time(&self, start: f64) -> bool {
        let now = self.clock.elapsed();
        now - start > self.params.budget || now >= self.deadline
    }

    /// RRT-Connect from `q_a` to `q_b` moving only the `active` joints.
    pub fn connect(
        &mut self,
        q_a: &JointVector,
        q_b: &JointVector,
        active: &[bool],
    ) -> Result<Vec<JointVector>, RegraspError> {
        if q_a == q_b {
            return Ok(vec![q_a.clone()]);
        }
        let placement = ObjectPlacement::At(self.object);
        self.collision_checks += 2;
        self.clock.charge(0, 2);
        if self.world.configuration_in_collision(q_a, &placement)
            || self.world.configuration_in_collision(q_b, &placement)
        {
            return Err(RegraspError::EndpointInCollision);
        }
        if self.segment_free(q_a, q_b) {
            return Ok(vec![q_a.clone(), q_b.clone()]);
        }

        let start = self.clock.elapsed();
        let mut trees = [JointTree::new(q_a.clone()), JointTree::new(q_b.clone())];
        // trees[0] grows from q_a until swapped.
        let mut a_first = true;
        for _ in 0..self.params.max_iterations {
            if self.out_of_time(start) {
                break;
            }
            let q_rand = self.sample(q_a, active);
            let [ta, tb] = &mut trees;
            let new_a = match self.extend(ta, &q_rand) {
                Status::Trapped => None,
                Status::Advanced(i) | Status::Reached(i) => Some(i),
            };
            if let Some(new_a) = new_a {
                let target = ta.nodes[new_a].0.clone();
                loop {
                    match self.extend(tb, &target) {
                        Status::Advanced(_) => continue,
                        Status::Trapped => break,
                        Status::Reached(new_b) => {
                            let mut path = ta.path_to_root(new_a);
                            path.reverse();
                            path.extend(tb.path_to_root(new_b).into_iter().skip(1));
                            if !a_first {
                                path.reverse();
                            }
                            return Ok(path);
                        }
                    }
                }
            }
            trees.swap(0, 1);
            a_first = !a_first;
        }
        Err(RegraspError::Timeout {
            budget: self.params.budget,
        })
    }

    /// Per-arm freeze, then a joint or sequential search.
    pub fn regrasp(&mut self, q_a: &JointVector, q_b: &JointVector) -> Result<Vec<JointVector>, RegraspError> {
        let system = self.world.system();
        let n0 = system.arm(0).dof();
        let dof = system.dof();
        let moves = |arm: usize| {
            let r = if arm == 0 { 0..n0 } else { n0..dof };
            r.into_iter().any(|i| (q_a[i] - q_b[i]).abs() > self.params.freeze_tol)
        };
        let moving = [moves(0), moves(1)];
        let mask = |arms: [bool; 2]| -> Vec<bool> { (0..dof).map(|i| arms[usize::from(i >= n0)]).collect() };

        match (self.params.mode, moving) {
            (_, [false, false]) => Ok(if q_a == q_b {
                vec![q_a.clone()]
            } else {
                vec![q_a.clone(), q_b.clone()]
            }),
            (RegraspMode::Sequential, [true, true]) => {
                let mut mid = q_a.clone();
                mid.0[..n0].copy_from_slice(&q_b.0[..n0]);
                let mut first = self.connect(q_a, &mid, &mask([true, false]))?;
                let second = self.connect(&mid, q_b, &mask([false, true]))?;
                first.extend(second.into_iter().skip(1));
                Ok(first)
            }
            (_, arms) => self.connect(q_a, q_b, &mask(arms)),
        }
    }
}
