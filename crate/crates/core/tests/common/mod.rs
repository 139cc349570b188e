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
//! Shared dual-arm desk world for integration tests.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use tcbirrt_core::collision::*;
use tcbirrt_core::kinematics::*;
use tcbirrt_core::planner::PlannerParams;
use tcbirrt_core::se3::*;

pub const START_POSE: [f64; 6] = [1.0, 0.0, 1.4, 0.0, 0.0, 0.0];

pub const Q_START: [f64; 14] = [
    -1.652666421277982,
    1.35922214431293,
    0.31366836097135675,
    -1.6731452421586468,
    0.9881762189106219,
    -0.2268599942769339,
    1.2082525854790753,
    1.7795038749168248,
    1.4500217455624365,
    -1.35516723448151,
    1.0248005832122984,
    1.3840981784709925,
    -0.24072920558058866,
    -0.52957353899954,
];

/// Two reference arms on mounts at `y = +-1.2` holding a 2 m bar from its ends.
pub fn desk_world(obstacles: Vec<Shape>) -> WorldModel {
    let base = |y: f64| Transform::from_translation(Vec3::new(0.0, y, 0.0));
    let arms = [
        ManipulatorModel::with_default_limits(reference_dh(), base(1.2)).unwrap(),
        ManipulatorModel::with_default_limits(reference_dh(), base(-1.2)).unwrap(),
    ];
    let grasps = [
        Transform::new(RotationMatrix::rot_x(-FRAC_PI_2), Vec3::new(0.0, 1.25, 0.0)),
        Transform::new(RotationMatrix::rot_x(FRAC_PI_2), Vec3::new(0.0, -1.25, 0.0)),
    ];
    let system = DualArmSystem::new(arms, grasps);
    let mut robot = RobotGeometry::uniform([7, 7], 0.08);
    for (i, y) in [1.2, -1.2].into_iter().enumerate() {
        robot.base_shapes[i] = Some(Shape::cuboid(
            Vec3::repeat(0.15),
            Transform::from_translation(Vec3::new(0.0, y, -0.25)),
        ));
    }
    let pairs = WorldModel::default_self_pairs(&system, &robot);
    WorldModel::new(system, robot, obstacles, pairs).unwrap()
}

pub fn desk_params(seed: u64) -> PlannerParams {
    let mut p = PlannerParams {
        seed,
        timeout: 60.0,
        ..PlannerParams::default()
    };
    p.ik.eps_p = 5e-4;
    p.ik.eps_o = 5e-4;
    p
}

pub fn start() -> (Pose6, JointVector) {
    (Pose6::from_array(START_POSE), JointVector(Q_START.to_vec()))
}

/// Configuration holding the object at `pose`, solved from the start seed.
pub fn solve(world: &WorldModel, pose: [f64; 6]) -> Option<JointVector> {
    let params = desk_params(0);
    ik_dual(world.system(), &JointVector(Q_START.to_vec()), &Pose6::from_array(pose).to_transform(), &params.ik)
        .ok()
        .map(|s| s.q)
}
