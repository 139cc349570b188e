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
//! Closed-chain motion planning for two arms rigidly holding one object.
//!
//! The crate is `no_std` with `alloc`; enable the `std` feature for a wall
//! clock.

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod collision;
pub mod kinematics;
pub mod planner;
pub mod se3;

pub use collision::{Body, ObjectPlacement, RobotGeometry, Shape, WorldModel};
pub use kinematics::{DhRow, DualArmSystem, IkParams, JointVector, ManipulatorModel};
pub use planner::{tcbirrt_plan, PlanError, PlanResult, PlannerParams, Query};
pub use se3::{Pose6, RotationMatrix, Transform};
