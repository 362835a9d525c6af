// Copyright 2026 The Regrasp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


//! Fixtures shared by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regrasp::geometry::{Transform, Vec3};
use regrasp::graph::*;
use regrasp::kinematics::ArmId;
use regrasp::placement::ObjectPose;
use regrasp::kinematics::ArmConfig;
use regrasp::planner::{AllowedArms, GraspAction, GraspEvent, MotionRealizer, Plan, Segment, SegmentKind};

pub const ARMS: [ArmId; 2] = [ArmId::Left, ArmId::Right];

/// Random feasibility tables over a few grasps, table poses and handover poses,
/// plus an initial and a goal pose that may coincide with library poses.
pub struct Fixture {
    pub solver: TableSolver,
    pub poses: Vec<ObjectPose>,
    pub handover: Vec<HandoverPose>,
    pub initial: ObjectPose,
    pub goal: ObjectPose,
}

pub fn random_transform(rng: &mut ChaCha8Rng) -> Transform {
    let p = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0));
    let r = Vec3::new(rng.gen_range(-3.0..3.0), rng.gen_range(-1.5..1.5), rng.gen_range(-3.0..3.0));
    Transform::from_euler(&p, &r)
}

pub fn object_pose(id: usize, world: Transform) -> ObjectPose {
    ObjectPose {
        pose_id: id,
        placement_id: 0,
        rotation_id: 0,
        position_id: id,
        world,
    }
}

/// Small fixture: at most 100 nodes.
pub fn fixture(seed: u64) -> Fixture {
    fixture_sized(seed, 5, 5, 3)
}

/// Fixture with up to `max_g` grasps, `max_p` library table poses and
/// `max_h` handover poses; at most `2 * max_g * (max_p + 2 + max_h)` nodes.
pub fn fixture_sized(seed: u64, max_g: usize, max_p: usize, max_h: usize) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_g = rng.gen_range(1..=max_g);
    let n_p = rng.gen_range(1..=max_p);
    let n_h = rng.gen_range(0..=max_h);
    let grasps = (0..n_g).map(|_| random_transform(&mut rng)).collect();
    let mut solver = TableSolver::new(grasps);
    let poses: Vec<ObjectPose> = (0..n_p).map(|i| object_pose(i, random_transform(&mut rng))).collect();
    let handover: Vec<HandoverPose> = (0..n_h)
        .map(|i| HandoverPose {
            pose_id: i,
            position: Vec3::zeros(),
            direction: Vec3::z(),
            world: random_transform(&mut rng),
        })
        .collect();
    let pick = |rng: &mut ChaCha8Rng, fresh: usize| {
        if rng.gen_bool(0.5) {
            poses[rng.gen_range(0..n_p)].clone()
        } else {
            object_pose(fresh, random_transform(rng))
        }
    };
    let initial = pick(&mut rng, n_p);
    let mut goal = pick(&mut rng, n_p + 1);
    if rng.gen_bool(0.2) {
        goal = initial.clone();
    }
    let mut refs: Vec<PoseRef> = (0..n_p + 2).map(PoseRef::placement).collect();
    refs.extend((0..n_h).map(PoseRef::handover));
    let density = rng.gen_range(0.3..0.9);
    for &arm in &ARMS {
        for g in 0..n_g {
            for &pose in &refs {
                if rng.gen_bool(density) {
                    solver.allow(arm, g, pose);
                    if pose.kind == PoseKind::Placement && rng.gen_bool(0.2) {
                        solver.not_liftable.insert((arm, g, pose));
                    }
                    // Occasionally two grasps reach the same joint values.
                    if rng.gen_bool(0.15) {
                        solver.joints.insert((arm, g, pose), vec![0.5; 4]);
                    }
                }
            }
        }
    }
    for l in 0..n_g {
        for r in 0..n_g {
            if rng.gen_bool(0.5) {
                solver.disjoint.insert((l, r));
            }
        }
    }
    Fixture {
        solver,
        poses,
        handover,
        initial,
        goal,
    }
}

/// Dual-arm and super graphs of a fixture.
pub fn build(fx: &Fixture) -> (RegraspGraph, RegraspGraph) {
    let prov = Provenance::default();
    let s = &fx.solver;
    let disjoint = |l: usize, r: usize| s.grippers_disjoint(l, r);
    let left = build_single_arm_graph(s, ArmId::Left, &fx.poses, prov.clone());
    let right = build_single_arm_graph(s, ArmId::Right, &fx.poses, prov.clone());
    let hand = build_handover_graph(s, &ARMS, &fx.handover, prov.clone());
    let dual = build_dual_arm_graph(&left, &right, &hand, &disjoint).unwrap();
    let partials: Vec<RegraspGraph> = ARMS
        .iter()
        .flat_map(|&arm| {
            [
                build_partial_graph(s, arm, Role::Initial, &fx.initial, prov.clone()),
                build_partial_graph(s, arm, Role::Goal, &fx.goal, prov.clone()),
            ]
        })
        .collect();
    let refs: Vec<&RegraspGraph> = partials.iter().collect();
    let sup = build_super_graph(&dual, &refs, &disjoint).unwrap();
    (dual, sup)
}


fn grasp_frames(n: usize) -> Vec<Transform> {
    (0..n)
        .map(|g| Transform::from_euler(&Vec3::new(0.01 * g as f64, 0.0, 0.05), &Vec3::new(0.0, 0.0, 0.7 * g as f64)))
        .collect()
}

fn table_pose(id: usize) -> ObjectPose {
    object_pose(id, Transform::from_translation(Vec3::new(0.1 * id as f64, 0.0, 0.0)))
}

fn assemble(solver: &TableSolver, library: &[ObjectPose], handover: &[HandoverPose], initial: &ObjectPose, goal: &ObjectPose) -> RegraspGraph {
    let prov = Provenance::default();
    let disjoint = |l: usize, r: usize| solver.grippers_disjoint(l, r);
    let left = build_single_arm_graph(solver, ArmId::Left, library, prov.clone());
    let right = build_single_arm_graph(solver, ArmId::Right, library, prov.clone());
    let hand = build_handover_graph(solver, &ARMS, handover, prov.clone());
    let dual = build_dual_arm_graph(&left, &right, &hand, &disjoint).unwrap();
    let partials: Vec<RegraspGraph> = ARMS
        .iter()
        .flat_map(|&arm| {
            [
                build_partial_graph(solver, arm, Role::Initial, initial, prov.clone()),
                build_partial_graph(solver, arm, Role::Goal, goal, prov.clone()),
            ]
        })
        .collect();
    let refs: Vec<&RegraspGraph> = partials.iter().collect();
    build_super_graph(&dual, &refs, &disjoint).unwrap()
}

/// Left-arm nodes of the two-route replanning fixture, with joint values of
/// a planar two-link arm.
///
/// Short route: `I0 - A0 - A1 - Gg` (3 edges). Long route:
/// `I0 - B0 - B2 - C2 - C1 - Gg` (5 edges). Grasp 0 joins I0, A0 and B0,
/// grasp 1 joins A1, C1 and Gg, grasp 2 joins B2 and C2. A1 sits at
/// `q1 = 2.5`, which a wall near `(0, 0.4)` cuts off from the other nodes;
/// C2 sits at `q1 = -2.5`, cut off by the mirrored wall.
pub struct TwoRoutes {
    pub graph: RegraspGraph,
    pub configs: std::collections::BTreeMap<NodeId, Vec<f64>>,
}

pub const WALL_A: [f64; 4] = [-0.1, 0.3, 0.1, 0.5];
pub const WALL_C: [f64; 4] = [-0.1, -0.5, 0.1, -0.3];

pub fn two_routes() -> TwoRoutes {
    let mut solver = TableSolver::new(grasp_frames(3));
    let l = ArmId::Left;
    let p = PoseRef::placement;
    let cells = [
        (Role::Initial, 0, 0, [0.0, 0.0]),
        (Role::Goal, 1, 1, [0.3, -1.2]),
        (Role::Library, 0, 2, [0.5, 0.5]),
        (Role::Library, 1, 2, [2.5, 0.0]),
        (Role::Library, 0, 3, [-0.5, 1.0]),
        (Role::Library, 2, 3, [-1.0, -1.0]),
        (Role::Library, 2, 4, [-2.5, 0.0]),
        (Role::Library, 1, 4, [1.0, -0.5]),
    ];
    let mut configs = std::collections::BTreeMap::new();
    for (role, g, pose, q) in cells {
        solver.allow(l, g, p(pose));
        configs.insert(NodeId::new(role, l, p(pose), g), q.to_vec());
    }
    let library: Vec<ObjectPose> = (2..5).map(table_pose).collect();
    let graph = assemble(&solver, &library, &[], &table_pose(0), &table_pose(1));
    TwoRoutes { graph, configs }
}

/// Graph whose unique shortest plan hands the object over twice:
/// `ir_p0_g0 - r_h0_g0 - l_h0_g2 - l_p2_g2 - l_p2_g3 - l_h0_g3 - r_h0_g1 - gr_p1_g1`.
/// The right arm reaches only the initial and goal poses, the left arm only
/// the intermediate table pose, and grasp pairs (2, 0) and (3, 1) are the
/// only compatible ones.
pub fn two_handovers() -> RegraspGraph {
    let mut solver = TableSolver::new(grasp_frames(4));
    let (l, r) = (ArmId::Left, ArmId::Right);
    let (p, h) = (PoseRef::placement, PoseRef::handover);
    solver
        .allow(r, 0, p(0))
        .allow(r, 0, h(0))
        .allow(r, 1, h(0))
        .allow(r, 1, p(1))
        .allow(l, 2, h(0))
        .allow(l, 3, h(0))
        .allow(l, 2, p(2))
        .allow(l, 3, p(2));
    solver.disjoint.extend([(2, 0), (3, 1)]);
    let handover = [HandoverPose {
        pose_id: 0,
        position: Vec3::new(0.0, 0.0, 0.5),
        direction: Vec3::z(),
        world: Transform::from_translation(Vec3::new(0.0, 0.0, 0.5)),
    }];
    assemble(&solver, &[table_pose(2)], &handover, &table_pose(0), &table_pose(1))
}

/// Oracle view of a node, read straight from the fixture tables.
#[derive(Clone, Debug)]
pub struct OracleNode {
    pub id: NodeId,
    pub role: Role,
    pub arm: ArmId,
    pub grasp: usize,
    pub pose: PoseRef,
    pub world: Transform,
    pub q: Vec<f64>,
    pub liftable: bool,
}

pub fn oracle_nodes(fx: &Fixture) -> Vec<OracleNode> {
    let s = &fx.solver;
    let mut out = Vec::new();
    let mut add = |role: Role, arm: ArmId, pose: PoseRef, world: &Transform| {
        for g in 0..s.grasps.len() {
            let key = (arm, g, pose);
            if !s.feasible.contains(&key) {
                continue;
            }
            let hand = pose.kind == PoseKind::Handover;
            let q = s.joints.get(&key).cloned().unwrap_or_else(|| {
                vec![g as f64, pose.id as f64, if hand { 1.0 } else { 0.0 }, if arm == ArmId::Left { 0.0 } else { 1.0 }]
            });
            out.push(OracleNode {
                id: NodeId::new(role, arm, pose, g),
                role,
                arm,
                grasp: g,
                pose,
                world: *world,
                q,
                liftable: !hand && !s.not_liftable.contains(&key),
            });
        }
    };
    for &arm in &ARMS {
        for p in &fx.poses {
            add(Role::Library, arm, PoseRef::placement(p.pose_id), &p.world);
        }
        for h in &fx.handover {
            add(Role::Library, arm, PoseRef::handover(h.pose_id), &h.world);
        }
        add(Role::Initial, arm, PoseRef::placement(fx.initial.pose_id), &fx.initial.world);
        add(Role::Goal, arm, PoseRef::placement(fx.goal.pose_id), &fx.goal.world);
    }
    out
}

/// Edge rules stated one case at a time.
pub fn oracle_kind(a: &OracleNode, b: &OracleNode, solver: &TableSolver) -> Option<EdgeKind> {
    use PoseKind::*;
    let same_space = a.role == b.role && a.pose == b.pose;
    let placement_pair = a.pose.kind == Placement && b.pose.kind == Placement;
    if a.id == b.id {
        return None;
    }
    if a.arm != b.arm {
        let (l, r) = if a.arm == ArmId::Left { (a, b) } else { (b, a) };
        let ok = same_space && a.pose.kind == Handover && solver.disjoint.contains(&(l.grasp, r.grasp));
        return ok.then_some(EdgeKind::HandoverTransfer);
    }
    if same_space {
        let moved = a.q.iter().zip(&b.q).any(|(x, y)| x != y);
        return (a.pose.kind == Placement && moved).then_some(EdgeKind::Transfer);
    }
    if a.grasp != b.grasp {
        return None;
    }
    if placement_pair {
        if !a.liftable || !b.liftable {
            return None;
        }
        let roles: BTreeSet<Role> = [a.role, b.role].into();
        if roles == BTreeSet::from([Role::Initial, Role::Goal]) {
            return Some(EdgeKind::DirectInitGoal);
        }
        if a.role == b.role && a.role != Role::Library {
            return None;
        }
        if a.world.approx_eq(&b.world, 1e-9, 1e-9) {
            return None;
        }
        return Some(EdgeKind::Transit);
    }
    let (table, hand) = if a.pose.kind == Placement { (a, b) } else { (b, a) };
    if table.pose.kind == Placement && hand.pose.kind == Handover && table.liftable && hand.role == Role::Library {
        return Some(EdgeKind::HandoverTransit);
    }
    None
}

pub fn oracle_edges(nodes: &[OracleNode], solver: &TableSolver) -> BTreeSet<Edge> {
    let mut out = BTreeSet::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            if let Some(k) = oracle_kind(a, b, solver) {
                out.insert(Edge::new(a.id, b.id, k));
            }
        }
    }
    out
}

pub const MODES: [AllowedArms; 4] = [AllowedArms::LeftOnly, AllowedArms::RightOnly, AllowedArms::Both, AllowedArms::Auto];

/// Source, target and allowed-node sets of each sub-problem of a mode.
fn problems(graph: &RegraspGraph, mode: AllowedArms) -> Vec<(BTreeSet<NodeId>, BTreeSet<NodeId>, Option<ArmId>)> {
    let pick = |role: Role, arm: ArmId| -> BTreeSet<NodeId> {
        graph.nodes().filter(|n| n.role == role && n.arm == arm).map(|n| n.id).collect()
    };
    let both = |role: Role| -> BTreeSet<NodeId> { graph.nodes().filter(|n| n.role == role).map(|n| n.id).collect() };
    let (l, r) = (ArmId::Left, ArmId::Right);
    match mode {
        AllowedArms::LeftOnly => vec![(pick(Role::Initial, l), pick(Role::Goal, l), Some(l))],
        AllowedArms::RightOnly => vec![(pick(Role::Initial, r), pick(Role::Goal, r), Some(r))],
        AllowedArms::Both => vec![
            (pick(Role::Initial, l), pick(Role::Goal, r), None),
            (pick(Role::Initial, r), pick(Role::Goal, l), None),
        ],
        AllowedArms::Auto => vec![(both(Role::Initial), both(Role::Goal), None)],
    }
}

fn neighbours(graph: &RegraspGraph, removed: &BTreeSet<Edge>, arm: Option<ArmId>) -> BTreeMap<NodeId, Vec<NodeId>> {
    let keep = |n: NodeId| arm.map_or(true, |a| n.arm() == a && n.pose().kind == PoseKind::Placement);
    graph
        .adjacency(removed)
        .into_iter()
        .filter(|(n, _)| keep(*n))
        .map(|(n, v)| (n, v.into_iter().filter(|m| keep(*m)).collect()))
        .collect()
}

/// Hop distance of every node to the nearest target.
fn bfs(adj: &BTreeMap<NodeId, Vec<NodeId>>, from: &BTreeSet<NodeId>) -> BTreeMap<NodeId, usize> {
    let mut dist = BTreeMap::new();
    let mut queue = VecDeque::new();
    for s in from.iter().filter(|s| adj.contains_key(s)) {
        dist.insert(*s, 0);
        queue.push_back(*s);
    }
    while let Some(n) = queue.pop_front() {
        let d = dist[&n];
        for m in &adj[&n] {
            if !dist.contains_key(m) {
                dist.insert(*m, d + 1);
                queue.push_back(*m);
            }
        }
    }
    dist
}

/// Shortest path by breadth-first search, choosing the smallest node id at
/// every step among those that stay on a shortest path.
pub fn oracle(graph: &RegraspGraph, mode: AllowedArms, removed: &BTreeSet<Edge>) -> Option<(usize, Vec<NodeId>)> {
    let mut best: Option<(usize, Vec<NodeId>)> = None;
    for (sources, targets, arm) in problems(graph, mode) {
        let adj = neighbours(graph, removed, arm);
        let to_goal = bfs(&adj, &targets);
        let Some(cost) = sources.iter().filter_map(|s| to_goal.get(s)).min().copied() else {
            continue;
        };
        let mut path = vec![*sources.iter().find(|s| to_goal.get(s) == Some(&cost)).unwrap()];
        for left in (0..cost).rev() {
            let here = *path.last().unwrap();
            let next = adj[&here].iter().filter(|m| to_goal.get(m) == Some(&left)).min().unwrap();
            path.push(*next);
        }
        if best.as_ref().map_or(true, |b| (cost, &path) < (b.0, &b.1)) {
            best = Some((cost, path));
        }
    }
    best
}

/// Realizes every edge as a single waypoint per node, with grip and release
/// events for the arms that take and leave the object.
pub struct Structural;

impl MotionRealizer for Structural {
    fn realize(&mut self, graph: &RegraspGraph, path: &[NodeId]) -> Result<Vec<Segment>, usize> {
        Ok(path
            .windows(2)
            .map(|w| {
                let (a, b) = (graph.node(w[0]).unwrap(), graph.node(w[1]).unwrap());
                let edge = graph.edge_between(w[0], w[1]).unwrap();
                let config = |n: &regrasp::graph::GraspNode| ArmConfig {
                    arm_id: n.arm,
                    q: n.q.clone(),
                    jawwidth: n.jawwidth,
                };
                let mut events = Vec::new();
                if edge.kind == EdgeKind::HandoverTransfer {
                    events.push(GraspEvent {
                        arm: b.arm,
                        action: GraspAction::Grip,
                        waypoint: 1,
                        grasp: Some(b.object_grasp()),
                    });
                    events.push(GraspEvent {
                        arm: a.arm,
                        action: GraspAction::Release,
                        waypoint: 1,
                        grasp: None,
                    });
                }
                Segment {
                    kind: SegmentKind::of_edge(edge.kind),
                    edge: edge.kind,
                    start_node: w[0],
                    end_node: w[1],
                    waypoints: vec![config(a), config(b)],
                    events,
                    object_start: a.object_world,
                    object_end: b.object_world,
                }
            })
            .collect())
    }

    fn rest(&self) -> Vec<(ArmId, Vec<f64>)> {
        Vec::new()
    }
}

/// The object is held by exactly one arm between segments, the holder changes
/// only at handovers, and consecutive segments meet at the same node and pose.
pub fn structurally_valid(graph: &RegraspGraph, plan: &Plan) -> bool {
    let mut holder = plan.path[0].arm();
    let first = graph.node(plan.path[0]).unwrap();
    let mut object = first.object_world;
    for (i, s) in plan.segments.iter().enumerate() {
        if s.start_node != plan.path[i] || s.end_node != plan.path[i + 1] {
            return false;
        }
        if !s.object_start.approx_eq(&object, 1e-12, 1e-12) {
            return false;
        }
        let (a, b) = (graph.node(s.start_node).unwrap(), graph.node(s.end_node).unwrap());
        match s.edge {
            EdgeKind::HandoverTransfer => {
                if a.arm != holder || b.arm == holder || !a.object_world.approx_eq(&b.object_world, 1e-12, 1e-12) {
                    return false;
                }
                holder = b.arm;
            }
            _ => {
                if a.arm != holder || b.arm != holder {
                    return false;
                }
            }
        }
        object = s.object_end;
    }
    holder == plan.path.last().unwrap().arm() && plan.goal_object.approx_eq(&object, 1e-12, 1e-12)
}
