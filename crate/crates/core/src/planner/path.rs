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
use alloc::vec;
use alloc::vec::Vec;

use super::tree::{Junction, NodeId, Tree};
use crate::kinematics::JointVector;
use crate::se3::Pose6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentKind {
    /// Closed-chain motion carrying the object.
    Transport,
    /// Joint-space reconfiguration with the object held still.
    Regrasp,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObjectPoses {
    /// One pose per joint state.
    PerState(Vec<Pose6>),
    /// A single pose for the whole segment.
    Held(Pose6),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub joints: Vec<JointVector>,
    pub object_poses: ObjectPoses,
}

impl Segment {
    pub fn object_pose(&self, i: usize) -> &Pose6 {
        match &self.object_poses {
            ObjectPoses::PerState(p) => &p[i],
            ObjectPoses::Held(p) => p,
        }
    }

    fn reversed(mut self) -> Self {
        self.joints.reverse();
        if let ObjectPoses::PerState(p) = &mut self.object_poses {
            p.reverse();
        }
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlanStats {
    pub planning_time: f64,
    /// Node counts of the start tree and the goal tree.
    pub tree_sizes: [usize; 2],
    pub iterations: usize,
    pub regrasp: bool,
    pub ik_iterations: usize,
    pub collision_checks: usize,
    pub regrasp_attempts: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanResult {
    pub segments: Vec<Segment>,
    pub stats: PlanStats,
}

impl PlanResult {
    pub fn first_state(&self) -> &JointVector {
        &self.segments[0].joints[0]
    }

    pub fn last_state(&self) -> &JointVector {
        let s = self.segments.last().expect("plan has segments");
        s.joints.last().expect("segment has states")
    }

    pub fn has_regrasp(&self) -> bool {
        self.segments.iter().any(|s| s.kind == SegmentKind::Regrasp)
    }

    /// Sum of joint-space Euclidean distances between consecutive states.
    pub fn path_length(&self) -> f64 {
        self.segments
            .iter()
            .flat_map(|s| s.joints.windows(2))
            .map(|w| w[0].distance(&w[1]))
            .sum()
    }
}

/// Transport motion from the root of `tree` to `id`.
fn transport_from_root(tree: &Tree, id: NodeId) -> Segment {
    let ids = tree.path_from_root(id);
    let root = tree.node(ids[0]);
    let mut joints = vec![root.q.clone()];
    let mut poses = vec![root.xi];
    for nid in &ids[1..] {
        let n = tree.node(*nid);
        joints.extend(n.edge_joints.iter().skip(1).cloned());
        poses.extend(n.edge_poses.iter().skip(1).copied());
    }
    Segment {
        kind: SegmentKind::Transport,
        joints,
        object_poses: ObjectPoses::PerState(poses),
    }
}

/// Joins root-to-`reach_a` of `tree_a`, the junction stored on `reach_b`
/// and `reach_b`-to-root of `tree_b`. The result runs start to goal:
/// `a_is_start` says which tree is rooted at the start.
pub fn extract_path(
    tree_a: &Tree,
    reach_a: NodeId,
    tree_b: &Tree,
    reach_b: NodeId,
    a_is_start: bool,
) -> Vec<Segment> {
    let node_b = tree_b.node(reach_b);
    let mut side_a = transport_from_root(tree_a, reach_a);
    let side_b = transport_from_root(tree_b, reach_b).reversed();

    let mut segments = match &node_b.junction {
        Some(Junction::Regrasp(path)) => {
            let mut joints = path.clone();
            // Stored from tree b's configuration towards tree a's.
            joints.reverse();
            let regrasp = Segment {
                kind: SegmentKind::Regrasp,
                joints,
                object_poses: ObjectPoses::Held(node_b.xi),
            };
            vec![side_a, regrasp, side_b]
        }
        _ => {
            let skip = usize::from(side_a.joints.last() == side_b.joints.first());
            let (ObjectPoses::PerState(pa), ObjectPoses::PerState(pb)) = (&mut side_a.object_poses, side_b.object_poses)
            else {
                unreachable!("transport segments carry per-state poses")
            };
            pa.extend(pb.into_iter().skip(skip));
            side_a.joints.extend(side_b.joints.into_iter().skip(skip));
            vec![side_a]
        }
    };
    if !a_is_start {
        segments = segments.into_iter().rev().map(Segment::reversed).collect();
    }
    let first = segments[0].clone();
    segments.retain(|s| s.joints.len() >= 2);
    if segments.is_empty() {
        segments.push(first);
    }
    segments
}
