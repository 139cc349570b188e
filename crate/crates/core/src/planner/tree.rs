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

use crate::kinematics::JointVector;
use crate::se3::{Pose6, Vec6};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

/// Tree node pairing a configuration with the object pose it realizes.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanNode {
    pub q: JointVector,
    pub xi: Pose6,
    pub parent: Option<NodeId>,
    /// Joint path from the parent's `q` to this node's `q`.
    pub edge_joints: Vec<JointVector>,
    /// Object pose at each entry of `edge_joints`.
    pub edge_poses: Vec<Pose6>,
    /// How `q` joins the other tree's configuration, when this node
    /// connected the two trees.
    pub junction: Option<Junction>,
}

/// Link between the configurations the two trees reached at a shared pose.
#[derive(Clone, Debug, PartialEq)]
pub enum Junction {
    /// Both lie on the same IK branch; the straight joint segment between
    /// them keeps the grasp and is traversed as transport.
    Bridge,
    /// Joint path from this node's `q` to the other tree's configuration,
    /// with the object held still.
    Regrasp(Vec<JointVector>),
}

impl PlanNode {
    pub fn root(q: JointVector, xi: Pose6) -> Self {
        Self {
            edge_joints: vec![q.clone()],
            edge_poses: vec![xi],
            q,
            xi,
            parent: None,
            junction: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Tree {
    nodes: Vec<PlanNode>,
    keys: Vec<Vec6>,
}

impl Tree {
    pub fn new(root: PlanNode) -> Self {
        Self {
            keys: vec![root.xi.to_vector()],
            nodes: vec![root],
        }
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &PlanNode {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> &[PlanNode] {
        &self.nodes
    }

    /// Adds `node` under its parent; the parent must already be present.
    pub fn add(&mut self, node: PlanNode) -> NodeId {
        debug_assert!(node.parent.is_some_and(|p| p.0 < self.nodes.len()));
        self.keys.push(node.xi.to_vector());
        self.nodes.push(node);
        NodeId(self.nodes.len() - 1)
    }

    /// Node ids from the root to `id`, inclusive.
    pub fn path_from_root(&self, id: NodeId) -> Vec<NodeId> {
        let mut ids = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur.0].parent {
            ids.push(p);
            cur = p;
        }
        ids.reverse();
        ids
    }

    /// Weighted Euclidean nearest node; ties resolve to the lowest id.
    pub fn nearest(&self, xi: &Pose6, weights: &Vec6) -> NodeId {
        let target = xi.to_vector();
        let mut best = (0, f64::INFINITY);
        for (i, key) in self.keys.iter().enumerate() {
            let d = (key - target).component_mul(weights).norm_squared();
            if d < best.1 {
                best = (i, d);
            }
        }
        NodeId(best.0)
    }
}

/// Free function form of [`Tree::nearest`].
pub fn nearest_neighbor_t(tree: &Tree, xi: &Pose6, weights: &Vec6) -> NodeId {
    tree.nearest(xi, weights)
}
