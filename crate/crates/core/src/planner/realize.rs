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


//! Motion realization of regrasp paths in a full scene.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Transform, Vec3};
use crate::grasp::Grasp;
use crate::graph::solver::SceneSolver;
use crate::graph::{EdgeKind, GraspNode, NodeId, PoseKind, RegraspGraph};
use crate::kinematics::{ArmConfig, ArmId, ArmModel};
use crate::scene::{ArmState, Scene, World};

use super::ddrrt::{plan_ddrrt, ConfigSpace, RrtParams};
use super::{GraspAction, GraspEvent, MotionRealizer, Segment, SegmentKind};

/// Configuration space of one arm with everything else frozen.
pub struct ArmSpace<'w> {
    pub world: &'w World,
    pub model: &'w ArmModel,
    pub arm: ArmId,
    pub jawwidth: f64,
    pub held: Option<Transform>,
    pub other: Option<ArmState>,
    pub resting_object: Option<Transform>,
}

impl ConfigSpace for ArmSpace<'_> {
    fn lower(&self) -> Vec<f64> {
        self.model.lower()
    }

    fn upper(&self) -> Vec<f64> {
        self.model.upper()
    }

    fn is_free(&self, q: &[f64]) -> bool {
        let state = ArmState {
            arm: self.arm,
            q: q.to_vec(),
            jawwidth: self.jawwidth,
            held: self.held,
        };
        self.world.state_free(&state, self.other.as_ref(), self.resting_object.as_ref(), true)
    }
}

/// Where the arms and the object are while a path is being realized.
#[derive(Clone, Debug)]
struct Tracker {
    q: BTreeMap<ArmId, Vec<f64>>,
    jaw: BTreeMap<ArmId, f64>,
    holders: Vec<(ArmId, Transform)>,
    object: Transform,
}

impl Tracker {
    fn held(&self, arm: ArmId) -> Option<Transform> {
        self.holders.iter().find(|(a, _)| *a == arm).map(|(_, g)| *g)
    }

    fn state(&self, arm: ArmId) -> ArmState {
        ArmState {
            arm,
            q: self.q[&arm].clone(),
            jawwidth: self.jaw[&arm],
            held: self.held(arm),
        }
    }
}

/// Realizer backed by inverse kinematics, Cartesian approach and lift
/// motions, and dynamic-domain RRT. One random stream is shared by every
/// attempt of a query, so results depend only on the seed.
pub struct SceneRealizer<'a> {
    scene: &'a Scene,
    world: World,
    solver: SceneSolver<'a>,
    pub params: RrtParams,
    rng: ChaCha8Rng,
}

struct Builder {
    t: Tracker,
    waypoints: Vec<ArmConfig>,
    events: Vec<GraspEvent>,
}

impl<'a> SceneRealizer<'a> {
    pub fn new(scene: &'a Scene, grasps: &'a [Grasp], seed: u64) -> Self {
        let m = &scene.motion;
        SceneRealizer {
            scene,
            world: World::new(scene),
            solver: SceneSolver::new(scene, grasps),
            params: RrtParams {
                iterations: m.rrt_iterations,
                step: m.rrt_step,
                initial_radius: m.rrt_initial_radius,
                goal_bias: m.goal_bias,
                resolution: m.check_resolution,
                ..RrtParams::default()
            },
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn space<'s>(&'s self, t: &Tracker, arm: ArmId) -> ArmSpace<'s> {
        let other = self.scene.robot.arm_ids().into_iter().find(|a| *a != arm).map(|o| t.state(o));
        ArmSpace {
            world: &self.world,
            model: self.scene.robot.arm(arm).expect("arm exists"),
            arm,
            jawwidth: t.jaw[&arm],
            held: t.held(arm),
            other,
            resting_object: if t.holders.is_empty() { Some(t.object) } else { None },
        }
    }

    /// Straight gripper motion by `offset` from `q0` under the current
    /// collision context of `arm`.
    fn cartesian(&self, t: &Tracker, arm: ArmId, q0: &[f64], offset: Vec3) -> Option<Vec<Vec<f64>>> {
        let space = self.space(t, arm);
        let m = &self.scene.motion;
        self.solver
            .cartesian_path(arm, q0, offset, m.cartesian_step, &|q| space.is_free(q))
    }

    fn rrt(&mut self, t: &Tracker, arm: ArmId, goal: &[f64]) -> Option<Vec<Vec<f64>>> {
        let start = t.q[&arm].clone();
        let params = self.params;
        let mut rng = self.rng.clone();
        let out = plan_ddrrt(&self.space(t, arm), &start, goal, &params, &mut rng).ok();
        self.rng = rng;
        out
    }

    fn retreat_offset(node: &GraspNode, h: f64) -> Vec3 {
        -(node.gripper_world.rotation * Vec3::z()) * h
    }
}

impl Builder {
    fn mark(&mut self, arm: ArmId) -> usize {
        if self.waypoints.last().map_or(true, |w| w.arm_id != arm) {
            self.waypoints.push(ArmConfig {
                arm_id: arm,
                q: self.t.q[&arm].clone(),
                jawwidth: self.t.jaw[&arm],
            });
        }
        self.waypoints.len() - 1
    }

    /// Appends `qs` (whose first entry is the current configuration).
    fn follow(&mut self, world: &World, arm: ArmId, qs: &[Vec<f64>]) {
        self.mark(arm);
        let model = world.robot.arm(arm).expect("arm exists");
        for q in &qs[1..] {
            self.waypoints.push(ArmConfig {
                arm_id: arm,
                q: q.clone(),
                jawwidth: self.t.jaw[&arm],
            });
            self.t.q.insert(arm, q.clone());
            if let Some(g) = self.t.held(arm) {
                let tip = model.fk(q).expect("planned configuration within limits");
                self.t.object = tip.compose(&g.inverse());
            }
        }
    }

    fn event(&mut self, arm: ArmId, action: GraspAction, grasp: Option<Transform>) {
        let waypoint = self.mark(arm);
        self.events.push(GraspEvent {
            arm,
            action,
            waypoint,
            grasp,
        });
        match action {
            GraspAction::Grip => self.t.holders.push((arm, grasp.expect("grip carries a grasp"))),
            GraspAction::Release => self.t.holders.retain(|(a, _)| *a != arm),
        }
    }
}

impl SceneRealizer<'_> {
    /// Moves a free arm to `node` (pre-grasp, approach) and grips.
    fn approach(&mut self, b: &mut Builder, node: &GraspNode) -> Option<()> {
        let arm = node.arm;
        b.t.jaw.insert(arm, node.jawwidth);
        let back = self.cartesian(&b.t, arm, &node.q, Self::retreat_offset(node, self.scene.motion.lift_height))?;
        let pre = back.last().expect("non-empty").clone();
        let to_pre = self.rrt(&b.t, arm, &pre)?;
        b.follow(&self.world, arm, &to_pre);
        let forward: Vec<Vec<f64>> = back.into_iter().rev().collect();
        b.follow(&self.world, arm, &forward);
        b.event(arm, GraspAction::Grip, Some(node.object_grasp()));
        Some(())
    }

    /// Releases at `node`, backs off along the approach axis and optionally
    /// returns to rest.
    fn depart(&mut self, b: &mut Builder, node: &GraspNode, to_rest: bool) -> Option<()> {
        let arm = node.arm;
        b.event(arm, GraspAction::Release, None);
        let back = self.cartesian(&b.t, arm, &b.t.q[&arm].clone(), Self::retreat_offset(node, self.scene.motion.lift_height))?;
        b.follow(&self.world, arm, &back);
        if to_rest {
            let rest = self.scene.rest(arm).ok()?;
            let home = self.rrt(&b.t, arm, &rest)?;
            b.follow(&self.world, arm, &home);
        }
        Some(())
    }

    /// Carries the object held at `a` to `b_node` with the same grasp.
    fn carry(&mut self, b: &mut Builder, a: &GraspNode, b_node: &GraspNode) -> Option<()> {
        let arm = a.arm;
        let up = self.scene.motion.lift_height * Vec3::z();
        if a.pose.kind == PoseKind::Placement {
            let lift = self.cartesian(&b.t, arm, &b.t.q[&arm].clone(), up)?;
            b.follow(&self.world, arm, &lift);
        }
        if b_node.pose.kind == PoseKind::Placement {
            // Plan the descent backwards from the target so that it ends
            // exactly at the node configuration.
            let mut probe = b.t.clone();
            probe.q.insert(arm, b_node.q.clone());
            let down: Vec<Vec<f64>> = self.cartesian(&probe, arm, &b_node.q, up)?.into_iter().rev().collect();
            let mid = self.rrt(&b.t, arm, &down[0])?;
            b.follow(&self.world, arm, &mid);
            b.follow(&self.world, arm, &down);
        } else {
            let mid = self.rrt(&b.t, arm, &b_node.q)?;
            b.follow(&self.world, arm, &mid);
        }
        Some(())
    }

    fn segment(&mut self, b: &mut Builder, na: &GraspNode, nb: &GraspNode, kind: EdgeKind, first: bool, last: bool) -> Option<()> {
        if first {
            self.approach(b, na)?;
        }
        match kind {
            EdgeKind::Transfer => {
                self.depart(b, na, false)?;
                self.approach(b, nb)?;
            }
            EdgeKind::HandoverTransfer => {
                self.approach(b, nb)?;
                self.depart(b, na, true)?;
            }
            EdgeKind::Transit | EdgeKind::HandoverTransit | EdgeKind::DirectInitGoal => self.carry(b, na, nb)?,
        }
        if last {
            self.depart(b, nb, true)?;
        }
        Some(())
    }
}

impl MotionRealizer for SceneRealizer<'_> {
    fn realize(&mut self, graph: &RegraspGraph, path: &[NodeId]) -> Result<Vec<Segment>, usize> {
        let first = graph.node(path[0]).expect("path node");
        let mut t = Tracker {
            q: BTreeMap::new(),
            jaw: BTreeMap::new(),
            holders: Vec::new(),
            object: first.object_world,
        };
        for arm in self.scene.robot.arm_ids() {
            t.q.insert(arm, self.scene.rest(arm).map_err(|_| 0usize)?);
            t.jaw.insert(arm, self.scene.robot.gripper(arm).map_err(|_| 0usize)?.max_jawwidth);
        }
        let mut segments = Vec::new();
        let n_edges = path.len() - 1;
        for (i, w) in path.windows(2).enumerate() {
            let (na, nb) = (graph.node(w[0]).expect("node"), graph.node(w[1]).expect("node"));
            let kind = graph.edge_between(w[0], w[1]).expect("path edge").kind;
            let mut b = Builder {
                t: t.clone(),
                waypoints: Vec::new(),
                events: Vec::new(),
            };
            let object_start = t.object;
            self.segment(&mut b, na, nb, kind, i == 0, i + 1 == n_edges).ok_or(i)?;
            t = b.t;
            segments.push(Segment {
                kind: super::SegmentKind::of_edge(kind),
                edge: kind,
                start_node: w[0],
                end_node: w[1],
                waypoints: b.waypoints,
                events: b.events,
                object_start,
                object_end: t.object,
            });
        }
        debug_assert!(segments.iter().all(|s| s.kind != SegmentKind::Transfer || !s.waypoints.is_empty()));
        Ok(segments)
    }

    fn rest(&self) -> Vec<(ArmId, Vec<f64>)> {
        self.scene.rest.clone()
    }
}
