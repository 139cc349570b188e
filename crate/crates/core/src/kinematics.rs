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
//! DH manipulator models, forward kinematics, the geometric Jacobian,
//! pseudoinverse IK and the closed-chain deviation of a dual-arm system.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Index, IndexMut};

use libm::{cos, sin, sqrt};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::se3::{
    rotation_to_expcoords, transform_to_deviation, RotationMatrix, Transform, Vec3, Vec6,
};

/// One row of a classic (distal) DH table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DhRow {
    pub theta_offset: f64,
    pub alpha: f64,
    pub d: f64,
    pub a: f64,
}

impl DhRow {
    pub const fn new(theta_offset: f64, alpha: f64, d: f64, a: f64) -> Self {
        Self {
            theta_offset,
            alpha,
            d,
            a,
        }
    }

    /// `Rz(theta) * Tz(d) * Tx(a) * Rx(alpha)` with `theta = theta_offset + q`.
    pub fn transform(&self, q: f64) -> Transform {
        let theta = self.theta_offset + q;
        let (st, ct) = (sin(theta), cos(theta));
        let (sa, ca) = (sin(self.alpha), cos(self.alpha));
        let r = nalgebra::Matrix3::new(
            ct,
            -st * ca,
            st * sa,
            st,
            ct * ca,
            -ct * sa,
            0.0,
            sa,
            ca,
        );
        Transform::new(
            RotationMatrix::from_matrix_unchecked(r),
            Vec3::new(self.a * ct, self.a * st, self.d),
        )
    }

    /// Distance between the origins of consecutive frames.
    pub fn length(&self) -> f64 {
        sqrt(self.a * self.a + self.d * self.d)
    }
}

/// The seven-joint arm used throughout the benchmarks (angles in radians).
pub fn reference_dh() -> Vec<DhRow> {
    let deg90 = PI / 2.0;
    vec![
        DhRow::new(0.0, deg90, 0.0, 0.0),
        DhRow::new(0.0, deg90, 0.24, 0.0),
        DhRow::new(0.0, 0.0, -0.17, 0.0),
        DhRow::new(0.0, 0.0, -0.18, 1.08),
        DhRow::new(0.0, deg90, -0.17, 1.08),
        DhRow::new(0.0, deg90, -0.24, 0.0),
        DhRow::new(0.0, 0.0, -0.1, 0.0),
    ]
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("model has no joints")]
    Empty,
    #[error("{limits} joint limits given for {dof} joints")]
    LimitCount { dof: usize, limits: usize },
    #[error("joint {joint}: lower limit {lo} is not below upper limit {hi}")]
    InvertedLimit { joint: usize, lo: f64, hi: f64 },
    #[error("joint {joint}: non-finite DH parameter")]
    NonFinite { joint: usize },
}

/// Serial manipulator with revolute joints.
#[derive(Clone, Debug, PartialEq)]
pub struct ManipulatorModel {
    dh: Vec<DhRow>,
    limits: Vec<(f64, f64)>,
    base: Transform,
    reach: f64,
}

/// Link frames of one arm in the base frame of the system.
#[derive(Clone, Debug)]
pub struct ForwardKinematics {
    /// Pose of the arm mount (frame 0).
    pub base: Transform,
    /// Frames 1..=n; the last one is the end effector.
    pub links: Vec<Transform>,
}

impl ForwardKinematics {
    pub fn end_effector(&self) -> &Transform {
        self.links.last().unwrap_or(&self.base)
    }

    /// Origin of frame `j` for `j` in `0..=n`.
    pub fn origin(&self, j: usize) -> Vec3 {
        if j == 0 {
            self.base.translation
        } else {
            self.links[j - 1].translation
        }
    }
}

impl ManipulatorModel {
    pub fn new(dh: Vec<DhRow>, limits: Vec<(f64, f64)>, base: Transform) -> Result<Self, ModelError> {
        if dh.is_empty() {
            return Err(ModelError::Empty);
        }
        if limits.len() != dh.len() {
            return Err(ModelError::LimitCount {
                dof: dh.len(),
                limits: limits.len(),
            });
        }
        for (joint, row) in dh.iter().enumerate() {
            if ![row.theta_offset, row.alpha, row.d, row.a].iter().all(|v| v.is_finite()) {
                return Err(ModelError::NonFinite { joint });
            }
        }
        for (joint, &(lo, hi)) in limits.iter().enumerate() {
            if !(lo < hi) {
                return Err(ModelError::InvertedLimit { joint, lo, hi });
            }
        }
        let reach = dh.iter().map(DhRow::length).sum();
        Ok(Self {
            dh,
            limits,
            base,
            reach,
        })
    }

    /// Model with `[-pi, pi]` limits on every joint.
    pub fn with_default_limits(dh: Vec<DhRow>, base: Transform) -> Result<Self, ModelError> {
        let limits = vec![(-PI, PI); dh.len()];
        Self::new(dh, limits, base)
    }

    pub fn dof(&self) -> usize {
        self.dh.len()
    }

    pub fn dh(&self) -> &[DhRow] {
        &self.dh
    }

    pub fn limits(&self) -> &[(f64, f64)] {
        &self.limits
    }

    pub fn base(&self) -> &Transform {
        &self.base
    }

    /// Upper bound on the distance from the mount to the end effector.
    pub fn reach(&self) -> f64 {
        self.reach
    }

    pub fn within_limits(&self, q: &[f64]) -> bool {
        q.iter()
            .zip(&self.limits)
            .all(|(v, &(lo, hi))| *v >= lo && *v <= hi)
    }

    pub fn clamp(&self, q: &mut [f64]) {
        for (v, &(lo, hi)) in q.iter_mut().zip(&self.limits) {
            *v = v.clamp(lo, hi);
        }
    }

    pub fn forward_kinematics(&self, q: &[f64]) -> ForwardKinematics {
        assert_eq!(q.len(), self.dof(), "joint vector length");
        let mut links = Vec::with_capacity(self.dof());
        let mut t = self.base;
        for (row, &qi) in self.dh.iter().zip(q) {
            t = t.compose(&row.transform(qi));
            links.push(t);
        }
        ForwardKinematics {
            base: self.base,
            links,
        }
    }

    pub fn end_effector(&self, q: &[f64]) -> Transform {
        assert_eq!(q.len(), self.dof(), "joint vector length");
        self.dh
            .iter()
            .zip(q)
            .fold(self.base, |t, (row, &qi)| t.compose(&row.transform(qi)))
    }

    /// Geometric Jacobian (6 x n, linear rows first) in the system base frame.
    pub fn jacobian(&self, q: &[f64]) -> DMatrix<f64> {
        let fk = self.forward_kinematics(q);
        jacobian_from_fk(&fk)
    }
}

fn jacobian_from_fk(fk: &ForwardKinematics) -> DMatrix<f64> {
    let n = fk.links.len();
    let p_ee = fk.end_effector().translation;
    let mut j = DMatrix::zeros(6, n);
    for col in 0..n {
        // Joint `col` rotates about z of frame `col`.
        let frame = if col == 0 { &fk.base } else { &fk.links[col - 1] };
        let z = frame.rotation.matrix().column(2).into_owned();
        let lin = z.cross(&(p_ee - frame.translation));
        j.fixed_view_mut::<3, 1>(0, col).copy_from(&lin);
        j.fixed_view_mut::<3, 1>(3, col).copy_from(&z);
    }
    j
}

/// Concatenated joint angles of both arms, `q = [q1; q2]`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct JointVector(pub Vec<f64>);

impl JointVector {
    pub fn from_arms(q1: &[f64], q2: &[f64]) -> Self {
        let mut v = Vec::with_capacity(q1.len() + q2.len());
        v.extend_from_slice(q1);
        v.extend_from_slice(q2);
        Self(v)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    /// Largest absolute per-joint difference.
    pub fn max_abs_diff(&self, other: &JointVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
    }

    pub fn distance(&self, other: &JointVector) -> f64 {
        sqrt(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (a - b) * (a - b))
                .sum(),
        )
    }

    /// `self + t (other - self)`
    pub fn lerp(&self, other: &JointVector, t: f64) -> JointVector {
        JointVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + t * (b - a))
                .collect(),
        )
    }
}

impl Index<usize> for JointVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for JointVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Two arms rigidly grasping one object.
#[derive(Clone, Debug, PartialEq)]
pub struct DualArmSystem {
    arms: [ManipulatorModel; 2],
    grasps: [Transform; 2],
    relative_grasp: Transform,
}

impl DualArmSystem {
    /// `grasps[i]` is the end-effector frame of arm `i` in the object frame.
    pub fn new(arms: [ManipulatorModel; 2], grasps: [Transform; 2]) -> Self {
        let relative_grasp = grasps[0].inverse().compose(&grasps[1]);
        Self {
            arms,
            grasps,
            relative_grasp,
        }
    }

    pub fn arm(&self, i: usize) -> &ManipulatorModel {
        &self.arms[i]
    }

    pub fn arms(&self) -> &[ManipulatorModel; 2] {
        &self.arms
    }

    pub fn grasp(&self, i: usize) -> &Transform {
        &self.grasps[i]
    }

    /// Frame of arm 2's end effector seen from arm 1's end effector.
    pub fn relative_grasp(&self) -> &Transform {
        &self.relative_grasp
    }

    pub fn dof(&self) -> usize {
        self.arms[0].dof() + self.arms[1].dof()
    }

    /// Joint slice of arm `i`.
    pub fn arm_joints<'a>(&self, q: &'a JointVector, i: usize) -> &'a [f64] {
        let n0 = self.arms[0].dof();
        if i == 0 {
            &q.0[..n0]
        } else {
            &q.0[n0..]
        }
    }

    pub fn within_limits(&self, q: &JointVector) -> bool {
        (0..2).all(|i| self.arms[i].within_limits(self.arm_joints(q, i)))
    }

    /// End-effector targets `T_o * T_i^o` for both arms.
    pub fn object_to_ee_targets(&self, object: &Transform) -> [Transform; 2] {
        [object.compose(&self.grasps[0]), object.compose(&self.grasps[1])]
    }

    /// Object pose implied by arm 1's end effector.
    pub fn object_from_arm1(&self, q: &JointVector) -> Transform {
        let t1 = self.arms[0].end_effector(self.arm_joints(q, 0));
        t1.compose(&self.grasps[0].inverse())
    }

    /// Closed-chain deviation `h(q) = Phi(T2^-1 T1 T_2^1)`; zero iff the
    /// two end effectors keep their grasp offset exactly.
    pub fn closed_chain_deviation(&self, q: &JointVector) -> Vec6 {
        let t1 = self.arms[0].end_effector(self.arm_joints(q, 0));
        let t2 = self.arms[1].end_effector(self.arm_joints(q, 1));
        let te = t2.inverse().compose(&t1).compose(&self.relative_grasp);
        transform_to_deviation(&te)
    }
}

/// Free function form of [`DualArmSystem::closed_chain_deviation`].
pub fn closed_chain_deviation(system: &DualArmSystem, q: &JointVector) -> Vec6 {
    system.closed_chain_deviation(q)
}

/// Free function form of [`DualArmSystem::object_to_ee_targets`].
pub fn object_to_ee_targets(object: &Transform, system: &DualArmSystem) -> [Transform; 2] {
    system.object_to_ee_targets(object)
}

/// Norms of the position and orientation parts of a deviation vector.
pub fn deviation_norms(h: &Vec6) -> (f64, f64) {
    (
        h.fixed_rows::<3>(0).norm(),
        h.fixed_rows::<3>(3).norm(),
    )
}

/// Parameters of the iterative pseudoinverse IK.
#[derive(Clone, Debug, PartialEq)]
pub struct IkParams {
    /// Diagonal of the gain matrix K.
    pub gain: Vec6,
    /// Update step size lambda.
    pub step: f64,
    pub max_iters: usize,
    pub eps_p: f64,
    pub eps_o: f64,
    /// Damping mu in `sigma / (sigma^2 + mu^2)`.
    pub damping: f64,
    /// Singular values below this are dropped.
    pub sv_cutoff: f64,
}

impl Default for IkParams {
    fn default() -> Self {
        Self {
            gain: Vec6::repeat(1.0),
            step: 0.5,
            max_iters: 200,
            eps_p: 1e-3,
            eps_o: 1e-3,
            damping: 1e-4,
            sv_cutoff: 1e-8,
        }
    }
}

/// Why a single-arm IK solve gave up.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum Unreachable {
    #[error("target lies beyond the arm's reach")]
    OutOfReach,
    #[error("no convergence within the iteration budget")]
    NoConvergence,
    #[error("iterate stalled against the joint limits")]
    Stalled,
}

/// Failed single-arm solve.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("{reason} after {iterations} iterations")]
pub struct IkFailure {
    pub reason: Unreachable,
    pub iterations: usize,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum IkError {
    #[error("arm {arm} unreachable: {reason}")]
    Unreachable {
        arm: usize,
        reason: Unreachable,
        /// Iterations spent by both arms before giving up.
        iterations: usize,
    },
}

impl IkError {
    pub fn iterations(&self) -> usize {
        match self {
            IkError::Unreachable { iterations, .. } => *iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IkSolution<Q> {
    pub q: Q,
    /// Iterations spent, counting the final converged evaluation.
    pub iterations: usize,
}

/// Position error and base-frame orientation error of `current` w.r.t. `target`.
pub fn pose_error(current: &Transform, target: &Transform) -> (Vec3, Vec3) {
    let e_p = target.translation - current.translation;
    let rel = current.rotation.transpose() * target.rotation;
    let e_o = target.rotation.rotate(rotation_to_expcoords(&rel).vector());
    (e_p, e_o)
}

/// Damped SVD pseudoinverse applied to a 6-vector.
fn damped_pinv_apply(j: DMatrix<f64>, rhs: &Vec6, damping: f64, cutoff: f64) -> DVector<f64> {
    let n = j.ncols();
    let svd = j.svd(true, true);
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return DVector::zeros(n);
    };
    let mut tmp = u.transpose() * DVector::from_column_slice(rhs.as_slice());
    for (k, s) in svd.singular_values.iter().enumerate() {
        tmp[k] *= if *s < cutoff {
            0.0
        } else {
            s / (s * s + damping * damping)
        };
    }
    v_t.transpose() * tmp
}

/// Iterative IK for one arm; returns the first iterate whose errors are
/// below `(eps_p, eps_o)`.
pub fn ik_single(
    model: &ManipulatorModel,
    q_seed: &[f64],
    target: &Transform,
    params: &IkParams,
) -> Result<IkSolution<Vec<f64>>, IkFailure> {
    assert_eq!(q_seed.len(), model.dof(), "seed length");
    if (target.translation - model.base().translation).norm() > model.reach() + params.eps_p {
        return Err(IkFailure {
            reason: Unreachable::OutOfReach,
            iterations: 0,
        });
    }
    let mut q: Vec<f64> = q_seed.to_vec();
    model.clamp(&mut q);
    for k in 0..params.max_iters {
        let fk = model.forward_kinematics(&q);
        let (e_p, e_o) = pose_error(fk.end_effector(), target);
        if e_p.norm() < params.eps_p && e_o.norm() < params.eps_o {
            return Ok(IkSolution {
                q,
                iterations: k + 1,
            });
        }
        let mut err = Vec6::zeros();
        err.fixed_rows_mut::<3>(0).copy_from(&e_p);
        err.fixed_rows_mut::<3>(3).copy_from(&e_o);
        let err = err.component_mul(&params.gain);
        let dq = damped_pinv_apply(jacobian_from_fk(&fk), &err, params.damping, params.sv_cutoff);
        let mut moved = 0.0f64;
        for (i, (qi, &(lo, hi))) in q.iter_mut().zip(model.limits()).enumerate() {
            let next = (*qi + params.step * dq[i]).clamp(lo, hi);
            moved = moved.max((next - *qi).abs());
            *qi = next;
        }
        if moved < 1e-12 {
            return Err(IkFailure {
                reason: Unreachable::Stalled,
                iterations: k + 1,
            });
        }
    }
    Err(IkFailure {
        reason: Unreachable::NoConvergence,
        iterations: params.max_iters,
    })
}

/// Solves both arms against the object pose `object`, arm 1 first.
pub fn ik_dual(
    system: &DualArmSystem,
    q_seed: &JointVector,
    object: &Transform,
    params: &IkParams,
) -> Result<IkSolution<JointVector>, IkError> {
    let targets = system.object_to_ee_targets(object);
    let mut q = Vec::with_capacity(system.dof());
    let mut iterations = 0;
    for (arm, target) in targets.iter().enumerate() {
        let sol = ik_single(system.arm(arm), system.arm_joints(q_seed, arm), target, params)
            .map_err(|f| IkError::Unreachable {
                arm,
                reason: f.reason,
                iterations: iterations + f.iterations,
            })?;
        iterations += sol.iterations;
        q.extend_from_slice(&sol.q);
    }
    Ok(IkSolution {
        q: JointVector(q),
        iterations,
    })
}
