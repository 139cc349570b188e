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
//! Primitive-geometry world model: boxes, capsules and spheres.
//!
//! Touching shapes (distance exactly zero) count as intersecting.

use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

use crate::kinematics::{DualArmSystem, ForwardKinematics, JointVector};
use crate::se3::{Transform, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    /// Oriented box: `half_extents` along the local axes of `pose`.
    Box { half_extents: Vec3, pose: Transform },
    /// Swept sphere around the segment `a`-`b`.
    Capsule { radius: f64, a: Vec3, b: Vec3 },
    Sphere { radius: f64, center: Vec3 },
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("shape dimension must be positive and finite, got {0}")]
pub struct InvalidShape(pub f64);

impl Shape {
    pub fn cuboid(half_extents: Vec3, pose: Transform) -> Self {
        Shape::Box { half_extents, pose }
    }

    pub fn validate(&self) -> Result<(), InvalidShape> {
        let dims: &[f64] = match self {
            Shape::Box { half_extents, .. } => half_extents.as_slice(),
            Shape::Capsule { radius, .. } | Shape::Sphere { radius, .. } => core::slice::from_ref(radius),
        };
        match dims.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            Some(v) => Err(InvalidShape(*v)),
            None => Ok(()),
        }
    }

    /// Shape moved by `t` (applied on the left).
    pub fn transformed(&self, t: &Transform) -> Shape {
        match *self {
            Shape::Box { half_extents, pose } => Shape::Box {
                half_extents,
                pose: t.compose(&pose),
            },
            Shape::Capsule { radius, a, b } => Shape::Capsule {
                radius,
                a: t.transform_point(&a),
                b: t.transform_point(&b),
            },
            Shape::Sphere { radius, center } => Shape::Sphere {
                radius,
                center: t.transform_point(&center),
            },
        }
    }

    /// Shape eroded by `delta` (clamped at zero size).
    pub fn shrunk(&self, delta: f64) -> Shape {
        match *self {
            Shape::Box { half_extents, pose } => Shape::Box {
                half_extents: half_extents.map(|h| (h - delta).max(0.0)),
                pose,
            },
            Shape::Capsule { radius, a, b } => Shape::Capsule {
                radius: (radius - delta).max(0.0),
                a,
                b,
            },
            Shape::Sphere { radius, center } => Shape::Sphere {
                radius: (radius - delta).max(0.0),
                center,
            },
        }
    }

    fn bounding_sphere(&self) -> (Vec3, f64) {
        match self {
            Shape::Box { half_extents, pose } => (pose.translation, half_extents.norm()),
            Shape::Capsule { radius, a, b } => ((a + b) * 0.5, (b - a).norm() * 0.5 + radius),
            Shape::Sphere { radius, center } => (*center, *radius),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Shape::Sphere { .. } => 0,
            Shape::Capsule { .. } => 1,
            Shape::Box { .. } => 2,
        }
    }

    fn key(&self) -> [u64; 15] {
        let mut k = [0u64; 15];
        let mut n = 0;
        let mut push = |v: &[f64]| {
            for x in v {
                k[n] = x.to_bits();
                n += 1;
            }
        };
        match self {
            Shape::Box { half_extents, pose } => {
                push(half_extents.as_slice());
                push(pose.translation.as_slice());
                push(pose.rotation.matrix().as_slice());
            }
            Shape::Capsule { radius, a, b } => {
                push(&[*radius]);
                push(a.as_slice());
                push(b.as_slice());
            }
            Shape::Sphere { radius, center } => {
                push(&[*radius]);
                push(center.as_slice());
            }
        }
        k
    }
}

/// Closest distance between a point and a segment.
fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a + ab * t - p).norm()
}

/// Closest distance between segments `p1q1` and `p2q2`.
fn segment_segment_distance(p1: &Vec3, q1: &Vec3, p2: &Vec3, q2: &Vec3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    const EPS: f64 = 1e-18;
    let (s, t) = if a <= EPS && e <= EPS {
        (0.0, 0.0)
    } else if a <= EPS {
        (0.0, (f / e).clamp(0.0, 1.0))
    } else {
        let c = d1.dot(&r);
        if e <= EPS {
            ((-c / a).clamp(0.0, 1.0), 0.0)
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s = if denom > EPS * a * e {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
            (s, t)
        }
    };
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

fn point_box_distance(p_local: &Vec3, half: &Vec3) -> f64 {
    let mut d2 = 0.0;
    for i in 0..3 {
        let excess = p_local[i].abs() - half[i];
        if excess > 0.0 {
            d2 += excess * excess;
        }
    }
    libm::sqrt(d2)
}

/// Slab test for a segment (in box coordinates) against an axis-aligned box.
fn segment_hits_box(a: &Vec3, b: &Vec3, half: &Vec3) -> bool {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for i in 0..3 {
        if d[i].abs() < 1e-300 {
            if a[i].abs() > half[i] {
                return false;
            }
        } else {
            let inv = 1.0 / d[i];
            let (mut lo, mut hi) = ((-half[i] - a[i]) * inv, (half[i] - a[i]) * inv);
            if lo > hi {
                core::mem::swap(&mut lo, &mut hi);
            }
            t0 = t0.max(lo);
            t1 = t1.min(hi);
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Distance from a segment (in box coordinates) to an axis-aligned box.
fn segment_box_distance(a: &Vec3, b: &Vec3, half: &Vec3) -> f64 {
    if segment_hits_box(a, b, half) {
        return 0.0;
    }
    // Distance to a convex set is convex along the segment.
    let f = |t: f64| point_box_distance(&(a + (b - a) * t), half);
    let g = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    f(0.0).min(f(1.0)).min(f1).min(f2)
}

fn box_box_intersect(ha: &Vec3, ta: &Transform, hb: &Vec3, tb: &Transform) -> bool {
    let ra = ta.rotation.matrix();
    let rb = tb.rotation.matrix();
    let d = tb.translation - ta.translation;
    let mut axes: Vec<Vec3> = Vec::with_capacity(15);
    for i in 0..3 {
        axes.push(ra.column(i).into_owned());
        axes.push(rb.column(i).into_owned());
    }
    for i in 0..3 {
        for j in 0..3 {
            let c = ra.column(i).cross(&rb.column(j));
            if c.norm_squared() > 1e-12 {
                axes.push(c.normalize());
            }
        }
    }
    for axis in &axes {
        let pa: f64 = (0..3).map(|i| ha[i] * ra.column(i).dot(axis).abs()).sum();
        let pb: f64 = (0..3).map(|i| hb[i] * rb.column(i).dot(axis).abs()).sum();
        if d.dot(axis).abs() > pa + pb {
            return false;
        }
    }
    true
}

/// True iff the minimum distance between `a` and `b` is zero.
pub fn shapes_intersect(a: &Shape, b: &Shape) -> bool {
    // Evaluate every unordered pair in one canonical order so the result
    // does not depend on argument order, even at floating-point ties.
    let swap = match a.rank().cmp(&b.rank()) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.key() > b.key(),
    };
    let (a, b) = if swap { (b, a) } else { (a, b) };

    let (ca, ra) = a.bounding_sphere();
    let (cb, rb) = b.bounding_sphere();
    if (ca - cb).norm() > ra + rb {
        return false;
    }

    match (a, b) {
        (Shape::Sphere { radius: r1, center: c1 }, Shape::Sphere { radius: r2, center: c2 }) => {
            (c1 - c2).norm() <= r1 + r2
        }
        (Shape::Sphere { radius: rs, center }, Shape::Capsule { radius: rc, a, b }) => {
            point_segment_distance(center, a, b) <= rs + rc
        }
        (Shape::Sphere { radius, center }, Shape::Box { half_extents, pose }) => {
            let local = pose.inverse().transform_point(center);
            point_box_distance(&local, half_extents) <= *radius
        }
        (
            Shape::Capsule { radius: r1, a: a1, b: b1 },
            Shape::Capsule { radius: r2, a: a2, b: b2 },
        ) => segment_segment_distance(a1, b1, a2, b2) <= r1 + r2,
        (Shape::Capsule { radius, a, b }, Shape::Box { half_extents, pose }) => {
            let inv = pose.inverse();
            let (la, lb) = (inv.transform_point(a), inv.transform_point(b));
            segment_box_distance(&la, &lb, half_extents) <= *radius
        }
        (
            Shape::Box { half_extents: h1, pose: t1 },
            Shape::Box { half_extents: h2, pose: t2 },
        ) => box_box_intersect(h1, t1, h2, t2),
        _ => unreachable!("pairs are ordered by rank"),
    }
}

/// A rigid body of the robot addressed by a self-collision pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Body {
    /// Link `link` (0-based, link `j` joins frames `j` and `j + 1`) of arm `arm`.
    Link { arm: usize, link: usize },
    /// Mount geometry of arm `arm`.
    Base { arm: usize },
}

/// Robot and object geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct RobotGeometry {
    /// Capsule radius per link, per arm.
    pub link_radii: [Vec<f64>; 2],
    /// Optional mount geometry per arm, in the system base frame.
    pub base_shapes: [Option<Shape>; 2],
    /// Manipulated object in the object frame.
    pub object: Shape,
    /// Distal links of each arm in contact with the object; never checked against it.
    pub object_contact_links: usize,
}

impl RobotGeometry {
    /// Capsules of every link with the same radius and a `2 x 0.8 x 0.8 m`
    /// box object whose long axis is the object frame's y axis.
    pub fn uniform(dof: [usize; 2], radius: f64) -> Self {
        Self {
            link_radii: [alloc::vec![radius; dof[0]], alloc::vec![radius; dof[1]]],
            base_shapes: [None, None],
            object: Shape::cuboid(Vec3::new(0.4, 1.0, 0.4), Transform::identity()),
            object_contact_links: 2,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("arm {arm}: {radii} link radii for {dof} links")]
    RadiusCount { arm: usize, dof: usize, radii: usize },
    #[error("self-collision pair {0:?}-{1:?} joins adjacent bodies")]
    AdjacentPair(Body, Body),
    #[error("self-collision pair references unknown body {0:?}")]
    UnknownBody(Body),
    #[error("invalid shape: {0}")]
    Shape(#[from] InvalidShape),
}

/// Where the object is while checking a configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ObjectPlacement {
    /// At an explicit pose.
    At(Transform),
    /// Rigidly attached to arm 1's end effector through its grasp.
    Attached,
}

#[derive(Clone, Debug)]
pub struct WorldModel {
    obstacles: Vec<Shape>,
    robot: RobotGeometry,
    system: DualArmSystem,
    self_pairs: Vec<(Body, Body)>,
}

fn adjacent(a: Body, b: Body) -> bool {
    match (a, b) {
        (Body::Link { arm: x, link: i }, Body::Link { arm: y, link: j }) => x == y && i.abs_diff(j) <= 1,
        (Body::Base { arm: x }, Body::Link { arm: y, link }) | (Body::Link { arm: y, link }, Body::Base { arm: x }) => {
            x == y && link == 0
        }
        (Body::Base { .. }, Body::Base { .. }) => false,
    }
}

impl WorldModel {
    pub fn new(
        system: DualArmSystem,
        robot: RobotGeometry,
        obstacles: Vec<Shape>,
        self_pairs: Vec<(Body, Body)>,
    ) -> Result<Self, WorldError> {
        for arm in 0..2 {
            let dof = system.arm(arm).dof();
            if robot.link_radii[arm].len() != dof {
                return Err(WorldError::RadiusCount {
                    arm,
                    dof,
                    radii: robot.link_radii[arm].len(),
                });
            }
        }
        robot.object.validate()?;
        for s in obstacles.iter().chain(robot.base_shapes.iter().flatten()) {
            s.validate()?;
        }
        for &(a, b) in &self_pairs {
            for body in [a, b] {
                let known = match body {
                    Body::Link { arm, link } => arm < 2 && link < system.arm(arm).dof(),
                    Body::Base { arm } => arm < 2 && robot.base_shapes[arm].is_some(),
                };
                if !known {
                    return Err(WorldError::UnknownBody(body));
                }
            }
            if adjacent(a, b) {
                return Err(WorldError::AdjacentPair(a, b));
            }
        }
        Ok(Self {
            obstacles,
            robot,
            system,
            self_pairs,
        })
    }

    /// Arm-versus-arm link pairs plus each arm's links against its own
    /// mount, skipping adjacent bodies.
    pub fn default_self_pairs(system: &DualArmSystem, robot: &RobotGeometry) -> Vec<(Body, Body)> {
        let (n0, n1) = (system.arm(0).dof(), system.arm(1).dof());
        let mut pairs = Vec::new();
        for i in 0..n0 {
            for j in 0..n1 {
                pairs.push((Body::Link { arm: 0, link: i }, Body::Link { arm: 1, link: j }));
            }
        }
        for (arm, n) in [(0, n0), (1, n1)] {
            if robot.base_shapes[arm].is_some() {
                for link in 1..n {
                    pairs.push((Body::Base { arm }, Body::Link { arm, link }));
                }
            }
        }
        pairs
    }

    pub fn system(&self) -> &DualArmSystem {
        &self.system
    }

    pub fn robot(&self) -> &RobotGeometry {
        &self.robot
    }

    pub fn obstacles(&self) -> &[Shape] {
        &self.obstacles
    }

    pub fn self_pairs(&self) -> &[(Body, Body)] {
        &self.self_pairs
    }

    /// Same world with different obstacles.
    pub fn with_obstacles(&self, obstacles: Vec<Shape>) -> Self {
        Self {
            obstacles,
            ..self.clone()
        }
    }

    fn link_capsules(&self, fk: &ForwardKinematics, arm: usize) -> Vec<Shape> {
        self.robot.link_radii[arm]
            .iter()
            .enumerate()
            .map(|(j, &radius)| Shape::Capsule {
                radius,
                a: fk.origin(j),
                b: fk.origin(j + 1),
            })
            .collect()
    }

    /// Collision shapes of every link of both arms at `q`.
    pub fn link_shapes(&self, q: &JointVector) -> [Vec<Shape>; 2] {
        let fk0 = self.system.arm(0).forward_kinematics(self.system.arm_joints(q, 0));
        let fk1 = self.system.arm(1).forward_kinematics(self.system.arm_joints(q, 1));
        [self.link_capsules(&fk0, 0), self.link_capsules(&fk1, 1)]
    }

    pub fn object_pose(&self, q: &JointVector, placement: &ObjectPlacement) -> Transform {
        match placement {
            ObjectPlacement::At(t) => *t,
            ObjectPlacement::Attached => self.system.object_from_arm1(q),
        }
    }

    /// True iff any robot or object shape touches an obstacle, the object
    /// touches a non-contact link or a mount, or a registered self pair touches.
    pub fn configuration_in_collision(&self, q: &JointVector, placement: &ObjectPlacement) -> bool {
        let links = self.link_shapes(q);
        let object = self.robot.object.transformed(&self.object_pose(q, placement));

        let moving = links.iter().flatten().chain(core::iter::once(&object));
        for body in moving {
            if self.obstacles.iter().any(|o| shapes_intersect(body, o)) {
                return true;
            }
        }

        for (arm, shapes) in links.iter().enumerate() {
            let checked = shapes.len().saturating_sub(self.robot.object_contact_links);
            if shapes[..checked].iter().any(|s| shapes_intersect(s, &object)) {
                return true;
            }
            if let Some(base) = &self.robot.base_shapes[arm] {
                if shapes_intersect(base, &object) {
                    return true;
                }
            }
        }

        let body_shape = |b: Body| -> Option<&Shape> {
            match b {
                Body::Link { arm, link } => links[arm].get(link),
                Body::Base { arm } => self.robot.base_shapes[arm].as_ref(),
            }
        };
        self.self_pairs.iter().any(|&(a, b)| match (body_shape(a), body_shape(b)) {
            (Some(sa), Some(sb)) => shapes_intersect(sa, sb),
            _ => false,
        })
    }

    /// Discrete check of every configuration in `path`; `poses` is either
    /// one object pose per configuration or a single pose for all of them.
    pub fn path_collision_free(&self, path: &[JointVector], poses: &[ObjectPlacement]) -> bool {
        debug_assert!(poses.len() == 1 || poses.len() == path.len());
        path.iter().enumerate().all(|(i, q)| {
            let placement = if poses.len() == 1 { &poses[0] } else { &poses[i] };
            !self.configuration_in_collision(q, placement)
        })
    }

    /// Checks the straight joint-space segment at max-norm spacing `<= step`,
    /// endpoints included, with the object fixed at `object`.
    pub fn joint_segment_collision_free(
        &self,
        from: &JointVector,
        to: &JointVector,
        step: f64,
        object: &Transform,
    ) -> bool {
        self.joint_segment_checks(from, to, step, object).0
    }

    /// As [`Self::joint_segment_collision_free`], also returning the number of
    /// configurations checked.
    pub fn joint_segment_checks(
        &self,
        from: &JointVector,
        to: &JointVector,
        step: f64,
        object: &Transform,
    ) -> (bool, usize) {
        assert!(step > 0.0, "collision step must be positive");
        let placement = ObjectPlacement::At(*object);
        let span = from.max_abs_diff(to);
        let intervals = libm::ceil(span / step).max(1.0) as usize;
        for k in 0..=intervals {
            let q = if k == 0 {
                from.clone()
            } else if k == intervals {
                to.clone()
            } else {
                from.lerp(to, k as f64 / intervals as f64)
            };
            if self.configuration_in_collision(&q, &placement) {
                return (false, k + 1);
            }
            if span == 0.0 {
                return (true, 1);
            }
        }
        (true, intervals + 1)
    }
}
