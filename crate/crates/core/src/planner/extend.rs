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
//! Task-space node expansion: sampling, stepping, pose interpolation and
//! path inverse kinematics.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use thiserror::Error;

use super::PlannerParams;
use crate::kinematics::{ik_dual, DualArmSystem, IkParams, JointVector};
use crate::se3::{
    expcoords_to_rotation, pose_to_transform, rotation_to_expcoords, ExpCoords, Pose6, Transform,
    PI_ANGLE_TOL,
};

/// Uniform sample in the task-space box `[lower, upper]`.
pub fn random_sample_t<R: Rng + ?Sized>(params: &PlannerParams, rng: &mut R) -> Pose6 {
    let mut v = params.lower;
    for i in 0..6 {
        let (lo, hi) = (params.lower[i], params.upper[i]);
        v[i] = lo + (hi - lo) * rng.gen::<f64>();
    }
    Pose6::from_vector(&v)
}

/// Moves from `near` towards `target` by at most `step` (plain Euclidean norm).
pub fn step_toward(near: &Pose6, target: &Pose6, step: f64) -> Pose6 {
    let d = target.to_vector() - near.to_vector();
    let dist = d.norm();
    if dist <= step {
        return *target;
    }
    Pose6::from_vector(&(near.to_vector() + d * (step / dist)))
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum InterpolationError {
    #[error("rotation within the half-turn band; exponential coordinates are ambiguous")]
    ExpCoordBranch,
}

/// `n + 1` object poses from `from` to `to`: positions linear, orientations
/// linear in exponential coordinates. The endpoints are reproduced exactly.
pub fn interpolate_pose(from: &Pose6, to: &Pose6, n: usize) -> Result<Vec<Transform>, InterpolationError> {
    assert!(n >= 1, "at least one interpolation interval");
    let t0 = pose_to_transform(from);
    let t1 = pose_to_transform(to);
    let relative = t0.rotation.transpose() * t1.rotation;
    for r in [&t0.rotation, &t1.rotation, &relative] {
        if PI - r.angle() < PI_ANGLE_TOL {
            return Err(InterpolationError::ExpCoordBranch);
        }
    }
    let phi0 = *rotation_to_expcoords(&t0.rotation).vector();
    let phi1 = *rotation_to_expcoords(&t1.rotation).vector();
    let mut out = Vec::with_capacity(n + 1);
    out.push(t0);
    for j in 1..n {
        let s = j as f64 / n as f64;
        let p = t0.translation + (t1.translation - t0.translation) * s;
        let r = if phi0 == phi1 {
            t0.rotation
        } else {
            expcoords_to_rotation(&ExpCoords(phi0 + (phi1 - phi0) * s))
        };
        out.push(Transform::new(r, p));
    }
    out.push(t1);
    Ok(out)
}

/// Output of [`path_inverse_kinematics`].
#[derive(Clone, Debug, PartialEq)]
pub struct PathIk {
    /// Solutions for the waypoints solved before the first failure.
    pub joints: Vec<JointVector>,
    /// Solution at the last waypoint, `None` if any waypoint failed.
    pub end: Option<JointVector>,
    pub ik_iterations: usize,
}

/// Solves each object waypoint in order, seeding with the previous solution.
pub fn path_inverse_kinematics(
    system: &DualArmSystem,
    waypoints: &[Transform],
    q_init: &JointVector,
    params: &IkParams,
) -> PathIk {
    let mut joints: Vec<JointVector> = Vec::with_capacity(waypoints.len());
    let mut ik_iterations = 0;
    for object in waypoints {
        let seed = joints.last().unwrap_or(q_init);
        match ik_dual(system, seed, object, params) {
            Ok(sol) => {
                ik_iterations += sol.iterations;
                joints.push(sol.q);
            }
            Err(err) => {
                ik_iterations += err.iterations();
                return PathIk {
                    joints,
                    end: None,
                    ik_iterations,
                };
            }
        }
    }
    PathIk {
        end: joints.last().cloned(),
        joints,
        ik_iterations,
    }
}
