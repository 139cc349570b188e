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
//! Collision-world properties and constructed scenes.

use std::f64::consts::PI;

use proptest::prelude::*;
use tcbirrt_core::collision::*;
use tcbirrt_core::kinematics::*;
use tcbirrt_core::se3::*;

const FAR: f64 = 100.0;

/// Two one-link arms of unit length; arm 2 is parked far away.
fn toy_world(radius: f64, obstacles: Vec<Shape>) -> WorldModel {
    let link = vec![DhRow::new(0.0, 0.0, 0.0, 1.0)];
    let arms = [
        ManipulatorModel::with_default_limits(link.clone(), Transform::identity()).unwrap(),
        ManipulatorModel::with_default_limits(link, Transform::from_translation(Vec3::new(0.0, -FAR, 0.0))).unwrap(),
    ];
    let system = DualArmSystem::new(arms, [Transform::identity(), Transform::identity()]);
    let robot = RobotGeometry {
        link_radii: [vec![radius], vec![radius]],
        base_shapes: [None, None],
        object: Shape::Sphere {
            radius: 0.1,
            center: Vec3::zeros(),
        },
        object_contact_links: 1,
    };
    WorldModel::new(system, robot, obstacles, Vec::new()).unwrap()
}

fn parked_object() -> ObjectPlacement {
    ObjectPlacement::At(Transform::from_translation(Vec3::new(FAR, FAR, FAR)))
}

fn q(theta: f64) -> JointVector {
    JointVector(vec![theta, 0.0])
}

#[test]
fn sweep_toward_wall_flips_once_at_contact_angle() {
    let (radius, wall_y) = (0.1, 0.8);
    let wall = Shape::cuboid(Vec3::new(5.0, 0.5, 5.0), Transform::from_translation(Vec3::new(0.0, wall_y + 0.5, 0.0)));
    let world = toy_world(radius, vec![wall]);
    // The capsule end sphere first touches the face y = wall_y.
    let contact = ((wall_y - radius) / 1.0f64).asin();
    let step = 1e-4;
    let mut flips = Vec::new();
    let mut prev = false;
    let mut theta = 0.0;
    while theta <= PI / 2.0 {
        let hit = world.configuration_in_collision(&q(theta), &parked_object());
        if hit != prev {
            flips.push(theta);
            prev = hit;
        }
        theta += step;
    }
    assert_eq!(flips.len(), 1, "{flips:?}");
    assert!((flips[0] - contact).abs() <= step, "flip at {} vs {contact}", flips[0]);
}

#[test]
fn corridor_midpoint_is_detected_only_with_fine_steps() {
    // Obstacle straddles theta = 0 at x = 0.9; endpoints at +-0.6 rad are clear.
    let block = Shape::Sphere {
        radius: 0.1,
        center: Vec3::new(0.9, 0.0, 0.0),
    };
    let world = toy_world(0.05, vec![block]);
    let object = Transform::from_translation(Vec3::new(FAR, FAR, FAR));
    let (a, b) = (q(-0.6), q(0.6));
    assert!(!world.configuration_in_collision(&a, &parked_object()));
    assert!(!world.configuration_in_collision(&b, &parked_object()));
    assert!(!world.joint_segment_collision_free(&a, &b, 0.2, &object));
    // A step beyond the span checks the endpoints only.
    assert!(world.joint_segment_collision_free(&a, &b, 5.0, &object));
    assert!(world.joint_segment_collision_free(&a, &a, 0.2, &object));
}

#[test]
fn empty_world_and_coincident_obstacle() {
    let world = toy_world(0.05, Vec::new());
    assert!(!world.configuration_in_collision(&q(0.3), &parked_object()));
    assert!(world.path_collision_free(&[q(0.3)], &[parked_object()]));
    let at = Transform::from_translation(Vec3::new(-3.0, 3.0, 0.0));
    let on_object = world.with_obstacles(vec![Shape::cuboid(Vec3::new(0.2, 0.2, 0.2), at)]);
    assert!(on_object.configuration_in_collision(&q(0.3), &ObjectPlacement::At(at)));
}

#[test]
fn sphere_and_box_thresholds() {
    let s = |x: f64| Shape::Sphere {
        radius: 1.0,
        center: Vec3::new(x, 0.0, 0.0),
    };
    assert!(shapes_intersect(&s(0.0), &s(1.5)));
    assert!(!shapes_intersect(&s(0.0), &s(2.5)));
    let b = |x: f64| Shape::cuboid(Vec3::repeat(1.0), Transform::from_translation(Vec3::new(x, 0.0, 0.0)));
    assert!(shapes_intersect(&b(0.0), &b(1.999)));
    assert!(!shapes_intersect(&b(0.0), &b(2.001)));
}

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    proptest::array::uniform3(-r..r).prop_map(Vec3::from)
}

fn shape() -> impl Strategy<Value = Shape> {
    prop_oneof![
        (0.05..1.0f64, vec3(2.0)).prop_map(|(radius, center)| Shape::Sphere { radius, center }),
        (0.05..1.0f64, vec3(2.0), vec3(2.0)).prop_map(|(radius, a, b)| Shape::Capsule { radius, a, b }),
        (proptest::array::uniform3(0.05..1.0f64), proptest::array::uniform6(-2.0..2.0f64)).prop_map(|(h, p)| {
            Shape::cuboid(Vec3::from(h), Pose6::from_array(p).to_transform())
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn intersection_is_symmetric(a in shape(), b in shape()) {
        prop_assert_eq!(shapes_intersect(&a, &b), shapes_intersect(&b, &a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn shrinking_obstacles_never_adds_collisions(obs in proptest::collection::vec(shape(), 1..6),
                                                 theta in -PI..PI, delta in 0.0..0.3f64) {
        let world = toy_world(0.08, obs.clone());
        let shrunk = world.with_obstacles(obs.iter().map(|s| s.shrunk(delta)).collect());
        let c = q(theta);
        if !world.configuration_in_collision(&c, &parked_object()) {
            prop_assert!(!shrunk.configuration_in_collision(&c, &parked_object()));
        }
    }

    #[test]
    fn path_check_is_conjunction(obs in proptest::collection::vec(shape(), 1..4),
                                 thetas in proptest::collection::vec(-PI..PI, 1..8)) {
        let world = toy_world(0.08, obs);
        let path: Vec<JointVector> = thetas.iter().map(|t| q(*t)).collect();
        let all = path.iter().all(|c| !world.configuration_in_collision(c, &parked_object()));
        prop_assert_eq!(world.path_collision_free(&path, &[parked_object()]), all);
    }
}
