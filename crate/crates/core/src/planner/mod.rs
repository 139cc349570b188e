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
//! Bidirectional task-space RRT over the closed-chain manifold.
//!
//! Both trees grow in the 6-D space of object poses. Every edge is realized
//! by path inverse kinematics, so each node carries a joint configuration
//! that keeps both grasps. When the trees meet at a pose where their
//! configurations differ, a joint-space RRT-Connect reconfigures the arms
//! with the object held still.

mod clock;
mod extend;
mod path;
mod regrasp;
mod tree;

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use clock::{Clock, WorkClock};
#[cfg(feature = "std")]
pub use clock::WallClock;
pub use extend::{
    interpolate_pose, path_inverse_kinematics, random_sample_t, step_toward, InterpolationError, PathIk,
};
pub use path::{extract_path, ObjectPoses, PlanResult, PlanStats, Segment, SegmentKind};
pub use regrasp::{RegraspError, RegraspMode, RegraspParams};
pub use tree::{nearest_neighbor_t, Junction, NodeId, PlanNode, Tree};

use crate::collision::{ObjectPlacement, WorldModel};
use crate::kinematics::{deviation_norms, pose_error, IkParams, JointVector};
use crate::se3::{Pose6, Transform, Vec6};
use regrasp::Connector;

/// Joint spacing at which bridge segments are checked against the constraint.
const BRIDGE_RESOLUTION: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct PlannerParams {
    /// Task-space step size.
    pub step: f64,
    /// Lower corner of the sampling box.
    pub lower: Vec6,
    /// Upper corner of the sampling box.
    pub upper: Vec6,
    /// Interpolation intervals per extension.
    pub interp_points: usize,
    /// Seconds.
    pub timeout: f64,
    pub seed: u64,
    /// Two poses closer than this in the weighted metric are equal.
    pub eq_tol: f64,
    pub nn_weights: Vec6,
    /// Largest max-norm joint jump allowed between consecutive waypoints.
    pub continuity_max: f64,
    /// Largest max-norm joint gap joined without a regrasp when two trees
    /// meet on the same IK branch.
    pub bridge_max: f64,
    /// Closed-chain tolerance on the position part of the deviation.
    pub constraint_tol_p: f64,
    /// Closed-chain tolerance on the orientation part of the deviation.
    pub constraint_tol_o: f64,
    pub ik: IkParams,
    pub regrasp: RegraspParams,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            step: 0.6,
            lower: Vec6::new(-2.0, -3.0, 0.0, -3.14, -3.14, -3.14),
            upper: Vec6::new(2.0, 3.0, 4.0, 3.14, 3.14, 3.14),
            interp_points: 5,
            timeout: 1000.0,
            seed: 0,
            eq_tol: 1e-9,
            nn_weights: Vec6::repeat(1.0),
            continuity_max: 0.5,
            bridge_max: 0.05,
            constraint_tol_p: 2e-3,
            constraint_tol_o: 2e-3,
            ik: IkParams::default(),
            regrasp: RegraspParams::default(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("sampling bound {index} is inverted ({lo} > {hi})")]
    InvertedBound { index: usize, lo: f64, hi: f64 },
    #[error("step size must be positive, got {0}")]
    Step(f64),
    #[error("at least one interpolation interval is required")]
    Interpolation,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("{0} must be non-negative")]
    Negative(&'static str),
}

impl PlannerParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        for i in 0..6 {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            if lo > hi || !lo.is_finite() || !hi.is_finite() {
                return Err(ParamsError::InvertedBound { index: i, lo, hi });
            }
        }
        if self.step.partial_cmp(&0.0) != Some(core::cmp::Ordering::Greater) {
            return Err(ParamsError::Step(self.step));
        }
        if self.interp_points == 0 {
            return Err(ParamsError::Interpolation);
        }
        if !(self.timeout >= 0.0) {
            return Err(ParamsError::Negative("timeout"));
        }
        let positive = [
            ("continuity_max", self.continuity_max),
            ("regrasp.edge_step", self.regrasp.edge_step),
            ("regrasp.collision_step", self.regrasp.collision_step),
            ("ik.step", self.ik.step),
        ];
        for (name, v) in positive {
            if v.partial_cmp(&0.0) != Some(core::cmp::Ordering::Greater) {
                return Err(ParamsError::NonPositive(name));
            }
        }
        Ok(())
    }
}

/// Extension target: a pose, plus a configuration when it is a node of the
/// other tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Target {
    pub xi: Pose6,
    pub q: Option<JointVector>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtendResult {
    Reached,
    Advanced,
    Trapped,
}

/// Start or goal end of a query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryEnd {
    Start,
    Goal,
}

impl core::fmt::Display for QueryEnd {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            QueryEnd::Start => "start",
            QueryEnd::Goal => "goal",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("{0}: configuration has {1} joints, expected {2}")]
    Dimension(QueryEnd, usize, usize),
    #[error("{0}: configuration outside the joint limits")]
    JointLimits(QueryEnd),
    #[error("{end}: arm {arm} misses its grasp by {pos:.3e} m / {ori:.3e} rad")]
    PoseMismatch {
        end: QueryEnd,
        arm: usize,
        pos: f64,
        ori: f64,
    },
    #[error("{end}: closed-chain deviation {pos:.3e} m / {ori:.3e} rad exceeds tolerance")]
    Constraint { end: QueryEnd, pos: f64, ori: f64 },
    #[error("{0}: configuration in collision")]
    Collision(QueryEnd),
    #[error("invalid parameters: {0}")]
    Params(ParamsError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("no plan within {0} s")]
    Timeout(f64, PlanStats),
    #[error("invalid query: {0}")]
    InvalidQuery(QueryError),
}

/// A planning query: configurations and object poses at both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub q_init: JointVector,
    pub xi_init: Pose6,
    pub q_goal: JointVector,
    pub xi_goal: Pose6,
}

/// Planner state for one query: rng, clock and counters.
pub struct Planner<'w, C: Clock> {
    world: &'w WorldModel,
    params: &'w PlannerParams,
    clock: C,
    rng: ChaCha8Rng,
    stats: PlanStats,
    deadline: f64,
}

impl<'w, C: Clock> Planner<'w, C> {
    pub fn new(world: &'w WorldModel, params: &'w PlannerParams, clock: C) -> Self {
        let deadline = clock.elapsed() + params.timeout;
        Self {
            world,
            params,
            clock,
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            stats: PlanStats::default(),
            deadline,
        }
    }

    pub fn stats(&self) -> &PlanStats {
        &self.stats
    }

    pub fn clock(&self) -> &C {
        &self.clock
    }

    fn timed_out(&self) -> bool {
        self.clock.elapsed() >= self.deadline
    }

    fn pose_distance(&self, a: &Pose6, b: &Pose6) -> f64 {
        (a.to_vector() - b.to_vector())
            .component_mul(&self.params.nn_weights)
            .norm()
    }

    fn in_collision(&self, q: &JointVector, object: &Transform) -> bool {
        self.clock.charge(0, 1);
        self.world
            .configuration_in_collision(q, &ObjectPlacement::At(*object))
    }

    /// Joint-space RRT-Connect between two configurations holding `object`.
    pub fn rrt_connect(
        &mut self,
        q_a: &JointVector,
        q_b: &JointVector,
        object: &Transform,
    ) -> Result<Vec<JointVector>, RegraspError> {
        self.stats.regrasp_attempts += 1;
        let mut conn = Connector {
            world: self.world,
            params: &self.params.regrasp,
            object: *object,
            rng: &mut self.rng,
            clock: &self.clock,
            deadline: self.deadline,
            collision_checks: 0,
        };
        let result = conn.regrasp(q_a, q_b);
        self.stats.collision_checks += conn.collision_checks;
        result
    }

    /// True if the straight segment from `q_a` to `q_b` stays on the
    /// closed-chain manifold at `object` and is collision-free.
    fn bridgeable(&mut self, q_a: &JointVector, q_b: &JointVector, object: &Transform) -> bool {
        let span = q_a.max_abs_diff(q_b);
        if span > self.params.bridge_max {
            return false;
        }
        let system = self.world.system();
        let targets = system.object_to_ee_targets(object);
        let steps = libm::ceil(span / BRIDGE_RESOLUTION).max(1.0) as usize;
        for k in 1..steps {
            let q = q_a.lerp(q_b, k as f64 / steps as f64);
            let (pos, ori) = deviation_norms(&system.closed_chain_deviation(&q));
            if pos > self.params.constraint_tol_p || ori > self.params.constraint_tol_o {
                return false;
            }
            let ee = system.arm(0).end_effector(system.arm_joints(&q, 0));
            let (e_p, e_o) = pose_error(&ee, &targets[0]);
            if e_p.norm() > self.params.constraint_tol_p || e_o.norm() > self.params.constraint_tol_o {
                return false;
            }
        }
        let (free, checks) =
            self.world
                .joint_segment_checks(q_a, q_b, self.params.regrasp.collision_step, object);
        self.stats.collision_checks += checks;
        self.clock.charge(0, checks);
        free
    }

    /// Connects the configurations two trees reached at the same pose.
    fn join(
        &mut self,
        q_s: &JointVector,
        q_rand: &JointVector,
        object: &Transform,
    ) -> Result<Option<Junction>, RegraspError> {
        if q_s == q_rand {
            return Ok(None);
        }
        if self.bridgeable(q_s, q_rand, object) {
            return Ok(Some(Junction::Bridge));
        }
        self.rrt_connect(q_s, q_rand, object).map(|p| Some(Junction::Regrasp(p)))
    }

    /// Grows `tree` from `near` towards `target` by one step.
    pub fn constrained_extend_t(&mut self, tree: &mut Tree, near: NodeId, target: &Target) -> (NodeId, ExtendResult) {
        let (q_near, xi_near) = {
            let n = tree.node(near);
            (n.q.clone(), n.xi)
        };
        let arrives = |p: &Self, xi: &Pose6| p.pose_distance(xi, &target.xi) <= p.params.eq_tol;

        if arrives(self, &xi_near) {
            let Some(q_rand) = &target.q else {
                return (near, ExtendResult::Reached);
            };
            return match self.join(&q_near, q_rand, &xi_near.to_transform()) {
                Ok(None) => (near, ExtendResult::Reached),
                Ok(junction) => {
                    let id = tree.add(PlanNode {
                        q: q_near.clone(),
                        xi: xi_near,
                        parent: Some(near),
                        edge_joints: vec![q_near],
                        edge_poses: vec![xi_near],
                        junction,
                    });
                    (id, ExtendResult::Reached)
                }
                Err(_) => (near, ExtendResult::Trapped),
            };
        }

        let xi_s = step_toward(&xi_near, &target.xi, self.params.step);
        let Ok(waypoints) = interpolate_pose(&xi_near, &xi_s, self.params.interp_points) else {
            return (near, ExtendResult::Trapped);
        };
        let solved = path_inverse_kinematics(self.world.system(), &waypoints, &q_near, &self.params.ik);
        self.stats.ik_iterations += solved.ik_iterations;
        self.clock.charge(solved.ik_iterations, 0);
        let Some(q_s) = solved.end else {
            return (near, ExtendResult::Trapped);
        };
        let joints = solved.joints;

        let mut prev = &q_near;
        for q in &joints {
            if prev.max_abs_diff(q) > self.params.continuity_max {
                return (near, ExtendResult::Trapped);
            }
            prev = q;
        }
        for (q, object) in joints.iter().zip(&waypoints) {
            self.stats.collision_checks += 1;
            if self.in_collision(q, object) {
                return (near, ExtendResult::Trapped);
            }
        }

        let reached = arrives(self, &xi_s);
        let mut junction = None;
        if reached {
            if let Some(q_rand) = &target.q {
                match self.join(&q_s, q_rand, &waypoints[waypoints.len() - 1]) {
                    Ok(j) => junction = j,
                    Err(_) => return (near, ExtendResult::Trapped),
                }
            }
        }

        let last = waypoints.len() - 1;
        let edge_poses = waypoints
            .iter()
            .enumerate()
            .map(|(j, t)| match j {
                0 => xi_near,
                j if j == last => xi_s,
                _ => Pose6::from_transform(t),
            })
            .collect();
        let id = tree.add(PlanNode {
            q: q_s,
            xi: xi_s,
            parent: Some(near),
            edge_joints: joints,
            edge_poses,
            junction,
        });
        let res = if reached {
            ExtendResult::Reached
        } else {
            ExtendResult::Advanced
        };
        (id, res)
    }

    fn check_end(&self, end: QueryEnd, q: &JointVector, xi: &Pose6) -> Result<(), QueryError> {
        let system = self.world.system();
        if q.len() != system.dof() {
            return Err(QueryError::Dimension(end, q.len(), system.dof()));
        }
        if !system.within_limits(q) {
            return Err(QueryError::JointLimits(end));
        }
        let object = xi.to_transform();
        let targets = system.object_to_ee_targets(&object);
        for (arm, target) in targets.iter().enumerate() {
            let ee = system.arm(arm).end_effector(system.arm_joints(q, arm));
            let (e_p, e_o) = pose_error(&ee, target);
            let (pos, ori) = (e_p.norm(), e_o.norm());
            if pos > self.params.constraint_tol_p || ori > self.params.constraint_tol_o {
                return Err(QueryError::PoseMismatch { end, arm, pos, ori });
            }
        }
        let (pos, ori) = deviation_norms(&system.closed_chain_deviation(q));
        if pos > self.params.constraint_tol_p || ori > self.params.constraint_tol_o {
            return Err(QueryError::Constraint { end, pos, ori });
        }
        if self.world.configuration_in_collision(q, &ObjectPlacement::At(object)) {
            return Err(QueryError::Collision(end));
        }
        Ok(())
    }

    /// Checks every precondition of [`Self::plan`].
    pub fn validate_query(&self, query: &Query) -> Result<(), QueryError> {
        self.params.validate().map_err(QueryError::Params)?;
        self.check_end(QueryEnd::Start, &query.q_init, &query.xi_init)?;
        self.check_end(QueryEnd::Goal, &query.q_goal, &query.xi_goal)
    }

    fn finish(&mut self, trees: &[Tree; 2], a_is_start: bool) {
        let (start, goal) = if a_is_start { (0, 1) } else { (1, 0) };
        self.stats.tree_sizes = [trees[start].len(), trees[goal].len()];
        self.stats.planning_time = self.clock.elapsed();
    }

    pub fn plan(mut self, query: &Query) -> Result<PlanResult, PlanError> {
        self.validate_query(query).map_err(PlanError::InvalidQuery)?;
        if self.timed_out() {
            self.stats.planning_time = self.clock.elapsed();
            return Err(PlanError::Timeout(self.params.timeout, self.stats));
        }

        if self.pose_distance(&query.xi_init, &query.xi_goal) <= self.params.eq_tol && query.q_init == query.q_goal {
            self.stats.tree_sizes = [1, 1];
            self.stats.planning_time = self.clock.elapsed();
            return Ok(PlanResult {
                segments: vec![Segment {
                    kind: SegmentKind::Transport,
                    joints: vec![query.q_init.clone()],
                    object_poses: ObjectPoses::PerState(vec![query.xi_init]),
                }],
                stats: self.stats,
            });
        }

        let mut trees = [
            Tree::new(PlanNode::root(query.q_init.clone(), query.xi_init)),
            Tree::new(PlanNode::root(query.q_goal.clone(), query.xi_goal)),
        ];
        let mut a_is_start = true;

        while !self.timed_out() {
            self.stats.iterations += 1;
            let xi_rand = random_sample_t(self.params, &mut self.rng);
            let [tree_a, tree_b] = &mut trees;
            let near_a = tree_a.nearest(&xi_rand, &self.params.nn_weights);
            let sample = Target { xi: xi_rand, q: None };
            let (reach_a, res) = self.constrained_extend_t(tree_a, near_a, &sample);

            if res != ExtendResult::Trapped {
                let node = tree_a.node(reach_a);
                let toward = Target {
                    xi: node.xi,
                    q: Some(node.q.clone()),
                };
                let mut res_b = ExtendResult::Advanced;
                let mut reach_b = tree_b.root();
                while res_b == ExtendResult::Advanced && !self.timed_out() {
                    let near_b = tree_b.nearest(&toward.xi, &self.params.nn_weights);
                    (reach_b, res_b) = self.constrained_extend_t(tree_b, near_b, &toward);
                }
                if res_b == ExtendResult::Reached {
                    self.stats.regrasp = matches!(tree_b.node(reach_b).junction, Some(Junction::Regrasp(_)));
                    let segments = extract_path(tree_a, reach_a, tree_b, reach_b, a_is_start);
                    self.finish(&trees, a_is_start);
                    return Ok(PlanResult {
                        segments,
                        stats: self.stats,
                    });
                }
            }
            trees.swap(0, 1);
            a_is_start = !a_is_start;
        }
        self.finish(&trees, a_is_start);
        Err(PlanError::Timeout(self.params.timeout, self.stats))
    }
}

/// Plans a closed-chain motion from `(q_init, xi_init)` to `(q_goal, xi_goal)`.
pub fn tcbirrt_plan<C: Clock>(
    query: &Query,
    world: &WorldModel,
    params: &PlannerParams,
    clock: C,
) -> Result<PlanResult, PlanError> {
    Planner::new(world, params, clock).plan(query)
}
