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


//! Node feasibility: deciding whether an arm can hold a grasp at a pose.

use std::collections::{BTreeMap, BTreeSet};

use crate::geometry::{Transform, Vec3};
use crate::grasp::{Grasp, GripperSpec};
use crate::kinematics::{ArmId, IkParams};
use crate::scene::{ArmState, Scene, World};

use super::{PoseKind, PoseRef};

/// A pose slot the solver is asked about.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseSlot {
    pub pose: PoseRef,
    pub world: Transform,
}

/// Result of a successful feasibility check.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeData {
    pub q: Vec<f64>,
    pub jawwidth: f64,
    /// Gripper pose in the world, from forward kinematics of `q`.
    pub gripper_world: Transform,
    /// A vertical lift from a placement is collision-free and IK-feasible.
    pub liftable: bool,
}

/// Source of node feasibility and grasp-pair compatibility.
pub trait NodeSolver {
    fn grasp_count(&self) -> usize;
    /// Gripper pose in the object frame for `grasp_id`.
    fn grasp_frame(&self, grasp_id: usize) -> Transform;
    fn solve(&self, arm: ArmId, grasp_id: usize, slot: &PoseSlot) -> Option<NodeData>;
    /// True when the left gripper at `left_grasp` and the right gripper at
    /// `right_grasp` can hold the object at the same time without touching.
    fn grippers_disjoint(&self, left_grasp: usize, right_grasp: usize) -> bool;
}

/// Feasibility from inverse kinematics and collision checks in a scene.
pub struct SceneSolver<'a> {
    pub scene: &'a Scene,
    pub world: World,
    pub grasps: &'a [Grasp],
    pub ik: IkParams,
    disjoint: Vec<Vec<bool>>,
}

impl<'a> SceneSolver<'a> {
    pub fn new(scene: &'a Scene, grasps: &'a [Grasp]) -> Self {
        let world = World::new(scene);
        let gripper = |arm| scene.robot.gripper(arm).ok().cloned();
        let disjoint = match (gripper(ArmId::Left), gripper(ArmId::Right)) {
            (Some(l), Some(r)) => pairwise_disjoint(grasps, &l, &r),
            _ => vec![vec![false; grasps.len()]; grasps.len()],
        };
        SceneSolver {
            scene,
            world,
            grasps,
            ik: IkParams::precise(),
            disjoint,
        }
    }

    /// Joint waypoints of a straight Cartesian motion of the gripper by
    /// `offset` (world frame) in steps of at most `step`, starting from `q0`.
    /// Each waypoint is checked with `free`. Returns `None` on an IK failure,
    /// a joint jump or a collision.
    pub fn cartesian_path(
        &self,
        arm: ArmId,
        q0: &[f64],
        offset: Vec3,
        step: f64,
        free: &dyn Fn(&[f64]) -> bool,
    ) -> Option<Vec<Vec<f64>>> {
        let model = self.scene.robot.arm(arm).ok()?;
        let start = model.fk(q0).ok()?;
        let n = (offset.norm() / step).ceil().max(1.0) as usize;
        let mut out = vec![q0.to_vec()];
        for k in 1..=n {
            let target = Transform::from_translation(offset * (k as f64 / n as f64)).compose(&start);
            let prev = out.last().expect("non-empty");
            let q = model.ik(&target, prev, &self.ik).ok()?.q;
            let jump = q.iter().zip(prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if jump > 0.5 || !free(&q) {
                return None;
            }
            out.push(q);
        }
        Some(out)
    }
}

/// `out[a][b]` is true when the left gripper at grasp `a` and the right
/// gripper at grasp `b` do not collide (both expressed in the object frame).
pub fn pairwise_disjoint(grasps: &[Grasp], left: &GripperSpec, right: &GripperSpec) -> Vec<Vec<bool>> {
    let bodies_l: Vec<_> = grasps.iter().map(|g| left.body(g.jawwidth).posed(&g.object_to_gripper)).collect();
    let bodies_r: Vec<_> = grasps.iter().map(|g| right.body(g.jawwidth).posed(&g.object_to_gripper)).collect();
    bodies_l
        .iter()
        .map(|a| bodies_r.iter().map(|b| !a.collides(b, 0.0)).collect())
        .collect()
}

impl NodeSolver for SceneSolver<'_> {
    fn grasp_count(&self) -> usize {
        self.grasps.len()
    }

    fn grasp_frame(&self, grasp_id: usize) -> Transform {
        self.grasps[grasp_id].object_to_gripper
    }

    fn solve(&self, arm: ArmId, grasp_id: usize, slot: &PoseSlot) -> Option<NodeData> {
        let grasp = &self.grasps[grasp_id];
        let target = slot.world.compose(&grasp.object_to_gripper);
        let jaw = grasp.jawwidth;
        // Cheap geometric rejection before any IK.
        if !self.world.gripper_free(arm, &target, jaw, &slot.world) {
            return None;
        }
        let model = self.scene.robot.arm(arm).ok()?;
        let q = model.ik(&target, &model.home(), &self.ik).ok()?.q;
        let state = ArmState {
            arm,
            q: q.clone(),
            jawwidth: jaw,
            held: None,
        };
        if !self.world.state_free(&state, None, Some(&slot.world), false) {
            return None;
        }
        let liftable = slot.pose.kind == PoseKind::Placement && {
            let held = Some(grasp.object_to_gripper);
            let free = |q: &[f64]| {
                let s = ArmState {
                    arm,
                    q: q.to_vec(),
                    jawwidth: jaw,
                    held,
                };
                self.world.state_free(&s, None, None, false)
            };
            let m = &self.scene.motion;
            self.cartesian_path(arm, &q, Vec3::z() * m.lift_height, m.cartesian_step, &free)
                .is_some()
        };
        let gripper_world = model.fk(&q).ok()?;
        Some(NodeData {
            q,
            jawwidth: jaw,
            gripper_world,
            liftable,
        })
    }

    fn grippers_disjoint(&self, left_grasp: usize, right_grasp: usize) -> bool {
        self.disjoint[left_grasp][right_grasp]
    }
}

/// Hand-built feasibility table for structural tests.
#[derive(Clone, Debug, Default)]
pub struct TableSolver {
    pub grasps: Vec<Transform>,
    /// Feasible `(arm, grasp, pose)` triples; absent means infeasible.
    pub feasible: BTreeSet<(ArmId, usize, PoseRef)>,
    /// Feasible triples whose vertical lift is blocked.
    pub not_liftable: BTreeSet<(ArmId, usize, PoseRef)>,
    /// Compatible `(left grasp, right grasp)` pairs for handovers.
    pub disjoint: BTreeSet<(usize, usize)>,
    /// Optional explicit joint values; otherwise derived from the triple.
    pub joints: BTreeMap<(ArmId, usize, PoseRef), Vec<f64>>,
}

impl TableSolver {
    pub fn new(grasps: Vec<Transform>) -> Self {
        TableSolver {
            grasps,
            ..TableSolver::default()
        }
    }

    pub fn allow(&mut self, arm: ArmId, grasp: usize, pose: PoseRef) -> &mut Self {
        self.feasible.insert((arm, grasp, pose));
        self
    }
}

impl NodeSolver for TableSolver {
    fn grasp_count(&self) -> usize {
        self.grasps.len()
    }

    fn grasp_frame(&self, grasp_id: usize) -> Transform {
        self.grasps[grasp_id]
    }

    fn solve(&self, arm: ArmId, grasp_id: usize, slot: &PoseSlot) -> Option<NodeData> {
        let key = (arm, grasp_id, slot.pose);
        if !self.feasible.contains(&key) {
            return None;
        }
        let q = self.joints.get(&key).cloned().unwrap_or_else(|| {
            let kind = if slot.pose.kind == PoseKind::Handover { 1.0 } else { 0.0 };
            let side = if arm == ArmId::Left { 0.0 } else { 1.0 };
            vec![grasp_id as f64, slot.pose.id as f64, kind, side]
        });
        Some(NodeData {
            q,
            jawwidth: 0.0,
            gripper_world: slot.world.compose(&self.grasps[grasp_id]),
            liftable: slot.pose.kind == PoseKind::Placement && !self.not_liftable.contains(&key),
        })
    }

    fn grippers_disjoint(&self, left_grasp: usize, right_grasp: usize) -> bool {
        self.disjoint.contains(&(left_grasp, right_grasp))
    }
}
