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
//! Planner building blocks and end-to-end planning in the desk world.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcbirrt_core::collision::*;
use tcbirrt_core::kinematics::*;
use tcbirrt_core::planner::*;
use tcbirrt_core::se3::*;

fn pose(v: [f64; 6]) -> Pose6 {
    Pose6::from_array(v)
}

fn offset(base: [f64; 6], d: [f64; 6]) -> [f64; 6] {
    std::array::from_fn(|i| base[i] + d[i])
}

#[test]
fn degenerate_sampling_bounds_give_the_point() {
    let mut p = PlannerParams::default();
    p.lower = Vec6::new(0.1, 0.2, 0.3, 0.4, 0.5, 0.6);
    p.upper = p.lower;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        assert_eq!(random_sample_t(&p, &mut rng).to_vector(), p.lower);
    }
}

#[test]
fn sample_means_within_three_sigma() {
    let p = PlannerParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 100_000;
    let mut sum = Vec6::zeros();
    for _ in 0..n {
        sum += random_sample_t(&p, &mut rng).to_vector();
    }
    for i in 0..6 {
        let (lo, hi) = (p.lower[i], p.upper[i]);
        let sigma = (hi - lo) / 12f64.sqrt() / (n as f64).sqrt();
        let mean = sum[i] / n as f64;
        assert!((mean - 0.5 * (lo + hi)).abs() <= 3.0 * sigma, "component {i}: {mean}");
    }
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let p = PlannerParams::default();
    let draw = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..20).map(|_| random_sample_t(&p, &mut rng)).collect::<Vec<_>>()
    };
    assert_eq!(draw(5), draw(5));
    assert_ne!(draw(5), draw(6));
}

fn child(tree: &Tree, xi: Pose6) -> PlanNode {
    PlanNode {
        parent: Some(tree.root()),
        ..PlanNode::root(JointVector::zeros(2), xi)
    }
}

#[test]
fn nearest_in_small_trees() {
    let w = Vec6::repeat(1.0);
    let mut tree = Tree::new(PlanNode::root(JointVector::zeros(2), pose([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])));
    assert_eq!(nearest_neighbor_t(&tree, &pose([9.0; 6]), &w), tree.root());
    for x in [2.0, 3.0] {
        let node = child(&tree, pose([x, 0.0, 0.0, 0.0, 0.0, 0.0]));
        tree.add(node);
    }
    assert_eq!(tree.nearest(&Pose6::default(), &w), NodeId(0));
}

#[test]
fn nearest_matches_exhaustive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = PlannerParams::default();
    let w = Vec6::new(1.0, 2.0, 0.5, 1.0, 1.0, 3.0);
    let mut tree = Tree::new(PlanNode::root(JointVector::zeros(2), random_sample_t(&p, &mut rng)));
    for _ in 0..99 {
        let node = child(&tree, random_sample_t(&p, &mut rng));
        tree.add(node);
    }
    for _ in 0..200 {
        let xi = random_sample_t(&p, &mut rng);
        let d = |n: &PlanNode| (n.xi.to_vector() - xi.to_vector()).component_mul(&w).norm();
        let best = tree
            .nodes()
            .iter()
            .enumerate()
            .min_by(|a, b| d(a.1).total_cmp(&d(b.1)))
            .map(|(i, _)| i)
            .unwrap();
        assert_eq!(tree.nearest(&xi, &w), NodeId(best));
    }
}

#[test]
fn step_toward_cases() {
    let near = Pose6::default();
    let got = step_toward(&near, &pose([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]), 0.6);
    assert_eq!(got.to_array(), [0.6, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let target = pose([0.3, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert_eq!(step_toward(&near, &target, 0.6), target);
}

proptest! {
    #[test]
    fn step_length_is_clamped(a in proptest::array::uniform6(-3.0..3.0f64), b in proptest::array::uniform6(-3.0..3.0f64),
                              step in 0.01..2.0f64) {
        let (a, b) = (pose(a), pose(b));
        let s = step_toward(&a, &b, step);
        let dist = (b.to_vector() - a.to_vector()).norm();
        let moved = (s.to_vector() - a.to_vector()).norm();
        prop_assert!((moved - step.min(dist)).abs() <= 1e-12);
        let remaining = (b.to_vector() - s.to_vector()).norm();
        prop_assert!((moved + remaining - dist).abs() <= 1e-12);
    }
}

#[test]
fn interpolation_of_equal_poses_is_constant() {
    let xi = pose([0.5, -0.2, 1.0, 0.3, 0.2, -0.4]);
    let w = interpolate_pose(&xi, &xi, 5).unwrap();
    assert_eq!(w.len(), 6);
    assert!(w.iter().all(|t| *t == w[0]));
}

#[test]
fn interpolation_of_pure_translation() {
    let w = interpolate_pose(&Pose6::default(), &pose([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]), 5).unwrap();
    for (j, t) in w.iter().enumerate() {
        assert!((t.translation.x - 0.2 * j as f64).abs() < 1e-15);
        assert_eq!(t.rotation, RotationMatrix::identity());
    }
}

#[test]
fn interpolation_of_quarter_turn_about_z() {
    let w = interpolate_pose(&Pose6::default(), &pose([0.0, 0.0, 0.0, 0.0, 0.0, FRAC_PI_2]), 5).unwrap();
    for (j, t) in w.iter().enumerate() {
        let a = j as f64 * PI / 10.0;
        let (s, c) = a.sin_cos();
        let expected = Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
        assert!((t.rotation.matrix() - expected).norm() < 1e-12, "waypoint {j}");
        assert_eq!(t.translation, Vec3::zeros());
    }
}

#[test]
fn interpolation_refuses_half_turns() {
    let r = interpolate_pose(&Pose6::default(), &pose([0.0, 0.0, 0.0, PI, 0.0, 0.0]), 5);
    assert_eq!(r, Err(InterpolationError::ExpCoordBranch));
}

#[test]
fn path_ik_fixed_point() {
    let world = desk_world(Vec::new());
    let (xi, q) = start();
    let params = desk_params(0);
    let waypoints = vec![xi.to_transform(); 6];
    let out = path_inverse_kinematics(world.system(), &waypoints, &q, &params.ik);
    assert_eq!(out.joints, vec![q.clone(); 6]);
    assert_eq!(out.end, Some(q));
}

#[test]
fn path_ik_recovers_a_joint_sweep() {
    let world = desk_world(Vec::new());
    let system = world.system();
    let (_, q0) = start();
    let params = desk_params(0);
    let dq = [0.02, -0.01, 0.015, 0.0, 0.01, -0.02, 0.01];
    let waypoints: Vec<Transform> = (0..=5)
        .map(|s| {
            let mut q = q0.clone();
            for (k, d) in dq.iter().enumerate() {
                q.0[k] += d * s as f64;
            }
            system.object_from_arm1(&q)
        })
        .collect();
    let out = path_inverse_kinematics(system, &waypoints, &q0, &params.ik);
    assert!(out.end.is_some());
    for (q, object) in out.joints.iter().zip(&waypoints) {
        for (arm, target) in system.object_to_ee_targets(object).iter().enumerate() {
            let (ep, eo) = pose_error(&system.arm(arm).end_effector(system.arm_joints(q, arm)), target);
            assert!(ep.norm() < params.ik.eps_p && eo.norm() < params.ik.eps_o);
        }
    }
}

#[test]
fn path_ik_stops_at_unreachable_waypoint() {
    let world = desk_world(Vec::new());
    let (xi, q) = start();
    let params = desk_params(0);
    let far = Transform::from_translation(Vec3::new(20.0, 0.0, 0.0));
    let mut waypoints = vec![xi.to_transform(); 3];
    waypoints.extend([far; 3]);
    let out = path_inverse_kinematics(world.system(), &waypoints, &q, &params.ik);
    assert_eq!(out.joints.len(), 3);
    assert_eq!(out.end, None);
}

#[test]
fn extend_to_own_pose_is_reached_without_motion() {
    let world = desk_world(Vec::new());
    let params = desk_params(1);
    let (xi, q) = start();
    let mut planner = Planner::new(&world, &params, WorkClock::default());
    let mut tree = Tree::new(PlanNode::root(q, xi));
    let (id, res) = planner.constrained_extend_t(&mut tree, NodeId(0), &Target { xi, q: None });
    assert_eq!((id, res, tree.len()), (NodeId(0), ExtendResult::Reached, 1));
}

#[test]
fn extend_one_step_stays_on_the_manifold() {
    let world = desk_world(Vec::new());
    let params = desk_params(1);
    let (xi, q) = start();
    let mut planner = Planner::new(&world, &params, WorkClock::default());
    let mut tree = Tree::new(PlanNode::root(q, xi));
    let target = pose(offset(START_POSE, [-0.3, 0.0, 0.1, 0.0, 0.0, 0.2]));
    let (id, res) = planner.constrained_extend_t(&mut tree, NodeId(0), &Target { xi: target, q: None });
    assert_eq!(res, ExtendResult::Reached);
    let node = tree.node(id);
    assert_eq!(node.xi, target);
    assert_eq!(node.edge_joints.len(), params.interp_points + 1);
    for q in &node.edge_joints {
        let (p, o) = deviation_norms(&world.system().closed_chain_deviation(q));
        assert!(p <= params.constraint_tol_p && o <= params.constraint_tol_o);
    }
    let objects: Vec<ObjectPlacement> = node.edge_poses.iter().map(|x| ObjectPlacement::At(x.to_transform())).collect();
    assert!(world.path_collision_free(&node.edge_joints, &objects));
}

#[test]
fn extend_into_obstacle_is_trapped() {
    let target = offset(START_POSE, [-0.3, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let block = Shape::cuboid(Vec3::repeat(0.1), pose(target).to_transform());
    let world = desk_world(vec![block]);
    let params = desk_params(1);
    let (xi, q) = start();
    let mut planner = Planner::new(&world, &params, WorkClock::default());
    let mut tree = Tree::new(PlanNode::root(q, xi));
    let (id, res) = planner.constrained_extend_t(&mut tree, NodeId(0), &Target { xi: pose(target), q: None });
    assert_eq!((id, res, tree.len()), (NodeId(0), ExtendResult::Trapped, 1));
}

#[test]
fn regrasp_between_equal_configurations_is_a_single_state() {
    let world = desk_world(Vec::new());
    let params = desk_params(1);
    let (xi, q) = start();
    let mut planner = Planner::new(&world, &params, WorkClock::default());
    assert_eq!(planner.rrt_connect(&q, &q, &xi.to_transform()), Ok(vec![q]));
}

#[test]
fn regrasp_in_free_space_is_the_straight_segment() {
    let world = desk_world(Vec::new());
    let params = desk_params(1);
    let (xi, q) = start();
    let mut q_b = q.clone();
    q_b.0[13] += 0.4;
    let mut planner = Planner::new(&world, &params, WorkClock::default());
    assert_eq!(planner.rrt_connect(&q, &q_b, &xi.to_transform()), Ok(vec![q, q_b]));
}

#[test]
fn regrasp_to_walled_off_configuration_times_out() {
    // One-link arms: a wall at theta = pi/2 splits arm 1's joint interval.
    let link = vec![DhRow::new(0.0, 0.0, 0.0, 1.0)];
    let arms = [
        ManipulatorModel::with_default_limits(link.clone(), Transform::identity()).unwrap(),
        ManipulatorModel::with_default_limits(link, Transform::from_translation(Vec3::new(0.0, -50.0, 0.0))).unwrap(),
    ];
    let system = DualArmSystem::new(arms, [Transform::identity(), Transform::identity()]);
    let robot = RobotGeometry {
        link_radii: [vec![0.05], vec![0.05]],
        base_shapes: [None, None],
        object: Shape::Sphere {
            radius: 0.1,
            center: Vec3::zeros(),
        },
        object_contact_links: 1,
    };
    let wall = Shape::cuboid(Vec3::new(0.05, 1.6, 1.0), Transform::from_translation(Vec3::new(0.0, 1.9, 0.0)));
    let world = WorldModel::new(system, robot, vec![wall], Vec::new()).unwrap();
    let mut params = desk_params(1);
    params.regrasp.max_iterations = 500;
    let object = Transform::from_translation(Vec3::new(50.0, 50.0, 50.0));
    let mut planner = Planner::new(&world, &params, WorkClock::default());
    let r = planner.rrt_connect(&JointVector(vec![0.0, 0.0]), &JointVector(vec![2.5, 0.0]), &object);
    assert!(matches!(r, Err(RegraspError::Timeout { .. })), "{r:?}");
}

fn query(q_init: JointVector, xi_init: [f64; 6], q_goal: JointVector, xi_goal: [f64; 6]) -> Query {
    Query {
        q_init,
        xi_init: pose(xi_init),
        q_goal,
        xi_goal: pose(xi_goal),
    }
}

#[test]
fn identical_start_and_goal_is_immediate() {
    let world = desk_world(Vec::new());
    let (_, q) = start();
    let r = tcbirrt_plan(&query(q.clone(), START_POSE, q.clone(), START_POSE), &world, &desk_params(0), WorkClock::default())
        .unwrap();
    assert_eq!(r.segments.len(), 1);
    assert_eq!(r.segments[0].joints, vec![q]);
    assert_eq!(r.stats.iterations, 0);
}

#[test]
fn nearby_goal_is_found_quickly() {
    let world = desk_world(Vec::new());
    let (_, q) = start();
    let goal = offset(START_POSE, [-0.3, 0.1, 0.0, 0.0, 0.0, 0.2]);
    let q_goal = solve(&world, goal).unwrap();
    let r = tcbirrt_plan(&query(q.clone(), START_POSE, q_goal.clone(), goal), &world, &desk_params(3), WorkClock::default())
        .unwrap();
    assert!(r.stats.iterations <= 5, "{} iterations", r.stats.iterations);
    assert_eq!(r.first_state(), &q);
    assert_eq!(r.last_state(), &q_goal);
}

#[test]
fn goal_in_obstacle_is_rejected() {
    let goal = offset(START_POSE, [-0.9, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let world = desk_world(vec![Shape::cuboid(Vec3::repeat(0.05), pose(goal).to_transform())]);
    let empty = desk_world(Vec::new());
    let (_, q) = start();
    let q_goal = solve(&empty, goal).unwrap();
    let r = tcbirrt_plan(&query(q, START_POSE, q_goal, goal), &world, &desk_params(3), WorkClock::default());
    assert!(matches!(r, Err(PlanError::InvalidQuery(QueryError::Collision(QueryEnd::Goal)))), "{r:?}");
}

#[test]
fn zero_timeout_fails_without_planning() {
    let world = desk_world(Vec::new());
    let (_, q) = start();
    let mut params = desk_params(0);
    params.timeout = 0.0;
    let r = tcbirrt_plan(&query(q.clone(), START_POSE, q, START_POSE), &world, &params, WorkClock::default());
    assert!(matches!(r, Err(PlanError::Timeout(t, _)) if t == 0.0));
}

/// Boundary sharing, endpoint match, manifold adherence and collision
/// freedom of a plan.
fn check_plan(world: &WorldModel, params: &PlannerParams, q: &Query, r: &PlanResult) {
    assert_eq!(r.first_state(), &q.q_init);
    assert_eq!(r.last_state(), &q.q_goal);
    for pair in r.segments.windows(2) {
        assert_eq!(pair[0].joints.last(), pair[1].joints.first());
    }
    let system = world.system();
    for seg in &r.segments {
        for (i, qs) in seg.joints.iter().enumerate() {
            let object = seg.object_pose(i).to_transform();
            assert!(!world.configuration_in_collision(qs, &ObjectPlacement::At(object)));
            if seg.kind == SegmentKind::Transport {
                let (p, o) = deviation_norms(&system.closed_chain_deviation(qs));
                assert!(p <= params.constraint_tol_p && o <= params.constraint_tol_o);
                let (ep, eo) = pose_error(&system.object_from_arm1(qs), &object);
                assert!(ep.norm() <= params.constraint_tol_p && eo.norm() <= params.constraint_tol_o);
            }
        }
    }
}

#[test]
fn plans_across_seeds_satisfy_invariants_and_repeat_exactly() {
    let world = desk_world(Vec::new());
    let (_, q) = start();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut planned = 0;
    while planned < 6 {
        let goal = offset([-1.0, 0.0, 1.4, 0.0, 0.0, 0.0], std::array::from_fn(|i| rng.gen_range(-0.2..0.2) * if i < 3 { 1.0 } else { 2.0 }));
        let Some(q_goal) = solve(&world, goal) else { continue };
        let qy = query(q.clone(), START_POSE, q_goal, goal);
        let params = desk_params(planned);
        if Planner::new(&world, &params, WorkClock::default()).validate_query(&qy).is_err() {
            continue;
        }
        let r = tcbirrt_plan(&qy, &world, &params, WorkClock::default()).unwrap();
        check_plan(&world, &params, &qy, &r);
        let again = tcbirrt_plan(&qy, &world, &params, WorkClock::default()).unwrap();
        assert_eq!(r, again);
        planned += 1;
    }
}

fn jv(v: f64) -> JointVector {
    JointVector(vec![v, v])
}

fn chain(q_root: f64, q_leaf: f64, xi_leaf: Pose6) -> (Tree, NodeId) {
    let mut tree = Tree::new(PlanNode::root(jv(q_root), Pose6::default()));
    let id = tree.add(PlanNode {
        q: jv(q_leaf),
        xi: xi_leaf,
        parent: Some(tree.root()),
        edge_joints: vec![jv(q_root), jv(q_leaf)],
        edge_poses: vec![Pose6::default(), xi_leaf],
        junction: None,
    });
    (tree, id)
}

#[test]
fn extracted_regrasp_sits_between_two_transports() {
    let meet = pose([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let (tree_a, a) = chain(0.0, 1.0, meet);
    let (mut tree_b, b) = chain(3.0, 2.0, meet);
    let b = tree_b.add(PlanNode {
        junction: Some(Junction::Regrasp(vec![jv(2.0), jv(1.5), jv(1.0)])),
        parent: Some(b),
        ..tree_b.node(b).clone()
    });
    let segs = extract_path(&tree_a, a, &tree_b, b, true);
    let kinds: Vec<_> = segs.iter().map(|s| s.kind).collect();
    assert_eq!(kinds, [SegmentKind::Transport, SegmentKind::Regrasp, SegmentKind::Transport]);
    assert_eq!(segs[1].joints, vec![jv(1.0), jv(1.5), jv(2.0)]);
    assert_eq!(segs[1].object_poses, ObjectPoses::Held(meet));
    assert_eq!(segs[2].joints.last(), Some(&jv(3.0)));

    let reversed = extract_path(&tree_a, a, &tree_b, b, false);
    assert_eq!(reversed[0].joints.first(), Some(&jv(3.0)));
    assert_eq!(reversed[2].joints.last(), Some(&jv(0.0)));
}

#[test]
fn extraction_without_regrasp_is_one_transport() {
    let meet = pose([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let (tree_a, a) = chain(0.0, 1.0, meet);
    let (tree_b, b) = chain(3.0, 1.0, meet);
    let segs = extract_path(&tree_a, a, &tree_b, b, true);
    assert_eq!(segs.len(), 1);
    assert_eq!(segs[0].joints, vec![jv(0.0), jv(1.0), jv(3.0)]);
}
