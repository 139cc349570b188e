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
//! Replay validation of path files against a scene.

use std::fmt;

use tcbirrt_core::collision::{ObjectPlacement, WorldModel};
use tcbirrt_core::kinematics::{deviation_norms, pose_error, JointVector};
use tcbirrt_core::planner::{PlannerParams, SegmentKind};

use crate::export::PathFile;

/// Joint-space spacing for checking regrasp motions between waypoints.
pub const REGRASP_CHECK_STEP: f64 = 0.2;

/// Largest joint difference tolerated between states shared by adjacent
/// segments.
const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum ViolationKind {
    SceneHash { expected: String, found: String },
    Empty,
    Dimension { len: usize, expected: usize },
    PoseCount { poses: usize, states: usize },
    JointLimits,
    Collision,
    /// Closed-chain deviation above tolerance.
    Constraint { pos: f64, ori: f64 },
    /// Arm `arm` misses its grasp on the recorded object pose.
    GraspMismatch { arm: usize, pos: f64, ori: f64 },
    Continuity { jump: f64, limit: f64 },
    HeldPoseChanged,
    /// Collision on the straight motion to the next state.
    MotionCollision,
    Boundary { gap: f64 },
}

/// A failed check, located by segment and state index.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub segment: Option<usize>,
    pub state: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(s) = self.segment {
            write!(f, "segment {s}")?;
            if let Some(i) = self.state {
                write!(f, " state {i}")?;
            }
            f.write_str(": ")?;
        }
        match &self.kind {
            ViolationKind::SceneHash { expected, found } => {
                write!(f, "scene hash mismatch (path {found}, scene {expected})")
            }
            ViolationKind::Empty => f.write_str("path has no states"),
            ViolationKind::Dimension { len, expected } => write!(f, "{len} joints, expected {expected}"),
            ViolationKind::PoseCount { poses, states } => write!(f, "{poses} object poses for {states} states"),
            ViolationKind::JointLimits => f.write_str("joint limits violated"),
            ViolationKind::Collision => f.write_str("collision"),
            ViolationKind::Constraint { pos, ori } => {
                write!(f, "constraint violated: {pos:.3e} m / {ori:.3e} rad")
            }
            ViolationKind::GraspMismatch { arm, pos, ori } => {
                write!(f, "arm {arm} off its grasp by {pos:.3e} m / {ori:.3e} rad")
            }
            ViolationKind::Continuity { jump, limit } => write!(f, "joint jump {jump:.3} rad exceeds {limit}"),
            ViolationKind::HeldPoseChanged => f.write_str("object pose changes during a regrasp"),
            ViolationKind::MotionCollision => f.write_str("collision on the motion to the next state"),
            ViolationKind::Boundary { gap } => write!(f, "does not start where the previous segment ends (gap {gap:.3e})"),
        }
    }
}

/// Counts of what a successful validation covered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReplaySummary {
    pub segments: usize,
    pub states: usize,
    pub regrasp_segments: usize,
}

/// Replays every check the planner guarantees: joint limits and collisions
/// at every state, closed-chain and grasp consistency plus continuity along
/// transport segments, a fixed object and collision-free interpolated
/// motion along regrasp segments, and shared segment boundaries.
///
/// `scene_sha256`, when given, must equal the hash recorded in the file.
pub fn validate_path(
    world: &WorldModel,
    params: &PlannerParams,
    file: &PathFile,
    scene_sha256: Option<&str>,
) -> Result<ReplaySummary, Vec<Violation>> {
    let mut out = Vec::new();
    let mut bad = |segment: Option<usize>, state: Option<usize>, kind| out.push(Violation { segment, state, kind });

    if let Some(expected) = scene_sha256 {
        if expected != file.metadata.scene_sha256 {
            bad(
                None,
                None,
                ViolationKind::SceneHash {
                    expected: expected.to_owned(),
                    found: file.metadata.scene_sha256.clone(),
                },
            );
        }
    }

    let system = world.system();
    let dof = system.dof();
    let segments = file.segments();
    let mut summary = ReplaySummary {
        segments: segments.len(),
        ..ReplaySummary::default()
    };
    if segments.iter().all(|s| s.joints.is_empty()) {
        bad(None, None, ViolationKind::Empty);
    }

    let mut previous_end: Option<JointVector> = None;
    for (si, seg) in segments.iter().enumerate() {
        let n = seg.joints.len();
        summary.states += n;
        if let Some(q) = seg.joints.iter().find(|q| q.len() != dof) {
            bad(Some(si), None, ViolationKind::Dimension { len: q.len(), expected: dof });
            continue;
        }
        if let tcbirrt_core::planner::ObjectPoses::PerState(p) = &seg.object_poses {
            if p.len() != n {
                bad(Some(si), None, ViolationKind::PoseCount { poses: p.len(), states: n });
                continue;
            }
        }
        if n == 0 {
            continue;
        }
        if let Some(prev) = &previous_end {
            let gap = prev.max_abs_diff(&seg.joints[0]);
            if gap > BOUNDARY_TOL {
                bad(Some(si), Some(0), ViolationKind::Boundary { gap });
            }
        }
        previous_end = seg.joints.last().cloned();

        for (i, q) in seg.joints.iter().enumerate() {
            let xi = seg.object_pose(i).to_transform();
            if !system.within_limits(q) {
                bad(Some(si), Some(i), ViolationKind::JointLimits);
            }
            if world.configuration_in_collision(q, &ObjectPlacement::At(xi)) {
                bad(Some(si), Some(i), ViolationKind::Collision);
            }
            match seg.kind {
                SegmentKind::Transport => {
                    let (pos, ori) = deviation_norms(&system.closed_chain_deviation(q));
                    if pos > params.constraint_tol_p || ori > params.constraint_tol_o {
                        bad(Some(si), Some(i), ViolationKind::Constraint { pos, ori });
                    }
                    let targets = system.object_to_ee_targets(&xi);
                    for (arm, target) in targets.iter().enumerate() {
                        let ee = system.arm(arm).end_effector(system.arm_joints(q, arm));
                        let (ep, eo) = pose_error(&ee, target);
                        let (pos, ori) = (ep.norm(), eo.norm());
                        if pos > params.constraint_tol_p || ori > params.constraint_tol_o {
                            bad(Some(si), Some(i), ViolationKind::GraspMismatch { arm, pos, ori });
                        }
                    }
                    if i > 0 {
                        let jump = seg.joints[i - 1].max_abs_diff(q);
                        if jump > params.continuity_max {
                            bad(
                                Some(si),
                                Some(i),
                                ViolationKind::Continuity {
                                    jump,
                                    limit: params.continuity_max,
                                },
                            );
                        }
                    }
                }
                SegmentKind::Regrasp => {
                    if i > 0 && seg.object_pose(i) != seg.object_pose(0) {
                        bad(Some(si), Some(i), ViolationKind::HeldPoseChanged);
                    }
                    if i + 1 < n && !world.joint_segment_collision_free(q, &seg.joints[i + 1], REGRASP_CHECK_STEP, &xi) {
                        bad(Some(si), Some(i), ViolationKind::MotionCollision);
                    }
                }
            }
        }
        if seg.kind == SegmentKind::Regrasp {
            summary.regrasp_segments += 1;
        }
    }

    if out.is_empty() {
        Ok(summary)
    } else {
        Err(out)
    }
}
