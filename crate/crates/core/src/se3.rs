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
//! Rotation and rigid-transform algebra.
//!
//! Orientations of the manipulated object are carried as fixed-axis
//! roll/pitch/yaw angles `u = (roll, pitch, yaw)` with
//! `R = Rz(yaw) * Ry(pitch) * Rx(roll)`. Interpolation and IK errors use
//! SO(3) exponential coordinates (axis-angle vectors).

use core::f64::consts::PI;
use core::ops::Mul;

use libm::{acos, atan2, cos, sin, sqrt};
use nalgebra::{Matrix3, Matrix4, Vector3, Vector6};

pub type Vec3 = Vector3<f64>;
pub type Vec6 = Vector6<f64>;
pub type Mat3 = Matrix3<f64>;

/// Below this angle a rotation is treated as the identity.
pub const ZERO_ANGLE_TOL: f64 = 1e-9;
/// Within this distance of pi the axis is recovered from the symmetric part.
pub const PI_ANGLE_TOL: f64 = 1e-6;

/// A 3x3 rotation matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationMatrix(Mat3);

impl RotationMatrix {
    pub fn identity() -> Self {
        Self(Mat3::identity())
    }

    /// Wraps a matrix without checking orthonormality.
    pub fn from_matrix_unchecked(m: Mat3) -> Self {
        Self(m)
    }

    pub fn rot_x(angle: f64) -> Self {
        let (s, c) = (sin(angle), cos(angle));
        Self(Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    pub fn rot_y(angle: f64) -> Self {
        let (s, c) = (sin(angle), cos(angle));
        Self(Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
    }

    pub fn rot_z(angle: f64) -> Self {
        let (s, c) = (sin(angle), cos(angle));
        Self(Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    /// `Rz(yaw) * Ry(pitch) * Rx(roll)`.
    pub fn from_euler(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self::rot_z(yaw) * Self::rot_y(pitch) * Self::rot_x(roll)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Element at (row, col), zero-based.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    /// `||R^T R - I||_F`
    pub fn orthonormality_error(&self) -> f64 {
        (self.0.transpose() * self.0 - Mat3::identity()).norm()
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// Roll, pitch, yaw extracted with the atan2 formulas of the deviation map.
    pub fn euler(&self) -> Vec3 {
        let r = &self.0;
        let roll = atan2(r[(2, 1)], r[(2, 2)]);
        let pitch = -atan2(
            r[(2, 0)],
            sqrt(r[(2, 1)] * r[(2, 1)] + r[(2, 2)] * r[(2, 2)]),
        );
        let yaw = atan2(r[(1, 0)], r[(0, 0)]);
        Vec3::new(roll, pitch, yaw)
    }

    /// Rotation angle in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        rotation_angle(&self.0)
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;
    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * rhs.0)
    }
}

impl Mul<Vec3> for RotationMatrix {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

/// Rigid transform: `x -> R x + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transform {
    pub rotation: RotationMatrix,
    pub translation: Vec3,
}

impl Default for Transform {
    fn default() -> Self {
        Self::identity()
    }
}

impl Transform {
    pub fn new(rotation: RotationMatrix, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(RotationMatrix::identity(), Vec3::zeros())
    }

    pub fn from_translation(t: Vec3) -> Self {
        Self::new(RotationMatrix::identity(), t)
    }

    pub fn from_rotation(r: RotationMatrix) -> Self {
        Self::new(r, Vec3::zeros())
    }

    /// `self * other`
    pub fn compose(&self, other: &Transform) -> Transform {
        Transform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation.rotate(&other.translation) + self.translation,
        }
    }

    pub fn inverse(&self) -> Transform {
        let rt = self.rotation.transpose();
        Transform {
            rotation: rt,
            translation: -(rt.rotate(&self.translation)),
        }
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation.rotate(p) + self.translation
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rotation.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Reads the upper 3x4 block of a homogeneous matrix; the last row is ignored.
    pub fn from_homogeneous(m: &Matrix4<f64>) -> Transform {
        Transform {
            rotation: RotationMatrix(m.fixed_view::<3, 3>(0, 0).into_owned()),
            translation: m.fixed_view::<3, 1>(0, 3).into_owned(),
        }
    }
}

impl Mul for Transform {
    type Output = Transform;
    fn mul(self, rhs: Transform) -> Transform {
        self.compose(&rhs)
    }
}

/// Free function form of [`Transform::compose`].
pub fn compose(a: &Transform, b: &Transform) -> Transform {
    a.compose(b)
}

/// Free function form of [`Transform::inverse`].
pub fn inverse(t: &Transform) -> Transform {
    t.inverse()
}

/// Converts a transform into the 6-vector `[x, y, z, roll, pitch, yaw]`.
///
/// This is the closed-chain deviation map: position is read from the
/// last column and orientation from the atan2 extraction.
pub fn transform_to_deviation(t: &Transform) -> Vec6 {
    let u = t.rotation.euler();
    let p = t.translation;
    Vec6::new(p.x, p.y, p.z, u.x, u.y, u.z)
}

/// Object pose in task space: position in meters and roll/pitch/yaw in radians.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Pose6 {
    pub position: Vec3,
    pub euler: Vec3,
}

impl Pose6 {
    pub fn new(position: Vec3, euler: Vec3) -> Self {
        Self { position, euler }
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self::from_vector(&Vec6::from(v))
    }

    pub fn from_vector(v: &Vec6) -> Self {
        Self {
            position: Vec3::new(v[0], v[1], v[2]),
            euler: Vec3::new(v[3], v[4], v[5]),
        }
    }

    pub fn to_vector(&self) -> Vec6 {
        Vec6::new(
            self.position.x,
            self.position.y,
            self.position.z,
            self.euler.x,
            self.euler.y,
            self.euler.z,
        )
    }

    pub fn to_array(&self) -> [f64; 6] {
        self.to_vector().into()
    }

    pub fn to_transform(&self) -> Transform {
        pose_to_transform(self)
    }

    pub fn from_transform(t: &Transform) -> Self {
        Self::from_vector(&transform_to_deviation(t))
    }
}

/// Realizes a task-space pose; inverse of [`transform_to_deviation`] away
/// from pitch = +-pi/2.
pub fn pose_to_transform(xi: &Pose6) -> Transform {
    Transform::new(
        RotationMatrix::from_euler(xi.euler.x, xi.euler.y, xi.euler.z),
        xi.position,
    )
}

/// Exponential coordinates `phi = axis * angle` of a rotation.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ExpCoords(pub Vec3);

impl ExpCoords {
    pub fn zero() -> Self {
        Self(Vec3::zeros())
    }

    pub fn angle(&self) -> f64 {
        self.0.norm()
    }

    pub fn vector(&self) -> &Vec3 {
        &self.0
    }
}

fn skew_part(r: &Mat3) -> Vec3 {
    Vec3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    )
}

fn rotation_angle(r: &Mat3) -> f64 {
    let c = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = acos(c);
    // acos loses precision near 0 and pi; refine with the skew magnitude.
    if theta < 0.1 || theta > PI - 0.1 {
        atan2(0.5 * skew_part(r).norm(), c)
    } else {
        theta
    }
}

/// Matrix logarithm of a rotation, canonical branch `|phi| <= pi`.
pub fn rotation_to_expcoords(r: &RotationMatrix) -> ExpCoords {
    let m = r.matrix();
    let theta = rotation_angle(m);
    if theta < ZERO_ANGLE_TOL {
        return ExpCoords::zero();
    }
    if PI - theta < PI_ANGLE_TOL {
        return ExpCoords(near_pi_axis(m, theta) * theta);
    }
    let axis = skew_part(m) / (2.0 * sin(theta));
    ExpCoords(axis * theta)
}

/// Axis of a rotation whose angle is within [`PI_ANGLE_TOL`] of pi.
///
/// Uses the column formula `(1 + r11, r21, r31) / sqrt(2 (1 + r11))` on the
/// symmetric part of `R` rescaled to an exact half-turn. Falls back to the
/// column of the largest diagonal entry when `1 + r11` vanishes.
fn near_pi_axis(m: &Mat3, theta: f64) -> Vec3 {
    let c = cos(theta);
    // (R + R^T)/2 = c I + (1 - c) w w^T; map to the half-turn form 2 w w^T - I.
    let sym = (m + m.transpose()) * 0.5;
    let ww = (sym - Mat3::identity() * c) / (1.0 - c);
    let b = ww * 2.0 - Mat3::identity();
    let k = if 1.0 + b[(0, 0)] >= 1e-6 {
        0
    } else if b[(1, 1)] >= b[(2, 2)] {
        1
    } else {
        2
    };
    let mut col = b.column(k).into_owned();
    col[k] += 1.0;
    let mut axis = col / sqrt(2.0 * (1.0 + b[(k, k)]));
    // A rotation slightly short of pi has a definite axis sign.
    let v = skew_part(m);
    if v.dot(&axis) < 0.0 {
        axis = -axis;
    }
    axis
}

/// Rodrigues' formula.
pub fn expcoords_to_rotation(phi: &ExpCoords) -> RotationMatrix {
    let theta = phi.0.norm();
    let k = phi.0.cross_matrix();
    let k2 = k * k;
    let (a, b) = if theta < 1e-6 {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
    } else {
        (sin(theta) / theta, (1.0 - cos(theta)) / (theta * theta))
    };
    RotationMatrix(Mat3::identity() + k * a + k2 * b)
}
