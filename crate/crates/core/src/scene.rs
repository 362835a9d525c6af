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


//! The planning scene (robot, object, table, obstacles) and its collision
//! queries.

use serde::{Deserialize, Serialize};

use crate::geometry::{CollisionBody, PosedBody, Transform, TriMesh, Vec3};
use crate::grasp::GraspParams;
use crate::kinematics::{ArmId, KinematicsError, RobotModel};
use crate::placement::{PlacementError, PoseGrid, DEFAULT_MIN_MARGIN, DEFAULT_N_ROTATIONS};

/// The table collision box sits this far below the nominal surface so that an
/// object resting on the table does not count as colliding with it.
pub const TABLE_CONTACT_TOLERANCE: f64 = 0.001;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    /// Table extent in world xy.
    pub min: [f64; 2],
    pub max: [f64; 2],
    pub height: f64,
    pub thickness: f64,
}

/// Axis-aligned box in which handover poses are sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandoverSpec {
    pub min: Vec3,
    pub max: Vec3,
    pub lattice: [usize; 3],
    pub icosphere_level: usize,
}

impl Default for HandoverSpec {
    fn default() -> Self {
        HandoverSpec {
            min: Vec3::new(0.3, -0.05, 0.25),
            max: Vec3::new(0.45, 0.05, 0.35),
            lattice: [3, 3, 3],
            icosphere_level: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub n_r: usize,
    /// Region of the table covered by the position grid.
    pub grid_min: [f64; 2],
    pub grid_max: [f64; 2],
    pub grid: [usize; 2],
    pub min_margin: f64,
    pub handover: HandoverSpec,
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization {
            n_r: DEFAULT_N_ROTATIONS,
            grid_min: [0.3, -0.3],
            grid_max: [0.5, 0.3],
            grid: [5, 6],
            min_margin: DEFAULT_MIN_MARGIN,
            handover: HandoverSpec::default(),
        }
    }
}

/// Seeds and budgets of the online phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionSettings {
    pub seed: u64,
    pub rrt_iterations: usize,
    pub rrt_step: f64,
    pub rrt_initial_radius: f64,
    pub goal_bias: f64,
    pub check_resolution: f64,
    /// Vertical lift and approach distance.
    pub lift_height: f64,
    /// Cartesian step of lift, lower, approach and retreat motions.
    pub cartesian_step: f64,
}

impl Default for MotionSettings {
    fn default() -> Self {
        MotionSettings {
            seed: 0,
            rrt_iterations: 5000,
            rrt_step: 0.1,
            rrt_initial_radius: 0.5,
            goal_bias: 0.1,
            check_resolution: 0.02,
            lift_height: 0.05,
            cartesian_step: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub robot: RobotModel,
    /// Joint values each arm starts from and returns to.
    pub rest: Vec<(ArmId, Vec<f64>)>,
    pub object: TriMesh,
    pub table: TableSpec,
    pub discretization: Discretization,
    pub grasp: GraspParams,
    pub motion: MotionSettings,
    /// Extra obstacles considered only while planning motions.
    pub obstacles: Vec<TriMesh>,
}

impl Scene {
    pub fn pose_grid(&self) -> Result<PoseGrid, PlacementError> {
        let d = &self.discretization;
        PoseGrid::table_grid(d.n_r, d.grid_min, d.grid_max, d.grid[0], d.grid[1], self.table.height)
    }

    pub fn rest(&self, arm: ArmId) -> Result<Vec<f64>, KinematicsError> {
        self.rest
            .iter()
            .find(|(a, _)| *a == arm)
            .map(|(_, q)| q.clone())
            .ok_or(KinematicsError::MissingArm(arm))
    }

    pub fn table_mesh(&self) -> TriMesh {
        let t = &self.table;
        TriMesh::aabb_box(
            Vec3::new(t.min[0], t.min[1], t.height - t.thickness),
            Vec3::new(t.max[0], t.max[1], t.height - TABLE_CONTACT_TOLERANCE),
        )
    }
}

/// What one arm is doing: its joints, jaw opening and (if holding the object)
/// the gripper pose in the object frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ArmState {
    pub arm: ArmId,
    pub q: Vec<f64>,
    pub jawwidth: f64,
    pub held: Option<Transform>,
}

/// Collision bodies of a scene, ready for repeated queries.
#[derive(Clone, Debug)]
pub struct World {
    pub robot: RobotModel,
    table: PosedBody,
    torso: PosedBody,
    object: CollisionBody,
    obstacles: Vec<PosedBody>,
}

impl World {
    pub fn new(scene: &Scene) -> World {
        let id = Transform::identity();
        World {
            robot: scene.robot.clone(),
            table: CollisionBody::from_mesh(&scene.table_mesh()).posed(&id),
            torso: scene.robot.torso_body().posed(&id),
            object: CollisionBody::from_mesh(&scene.object),
            obstacles: scene
                .obstacles
                .iter()
                .map(|m| CollisionBody::from_mesh(m).posed(&id))
                .collect(),
        }
    }

    pub fn object_body(&self, world: &Transform) -> PosedBody {
        self.object.posed(world)
    }

    pub fn gripper_body(&self, arm: ArmId, gripper_world: &Transform, jawwidth: f64) -> PosedBody {
        let g = self.robot.gripper(arm).expect("arm exists");
        g.body(jawwidth).posed(gripper_world)
    }

    fn static_hit(&self, body: &PosedBody, with_obstacles: bool) -> bool {
        body.collides(&self.table, 0.0)
            || body.collides(&self.torso, 0.0)
            || (with_obstacles && self.obstacles.iter().any(|o| body.collides(o, 0.0)))
    }

    /// Gripper at a grasp: clear of table, torso and the object it grasps.
    pub fn gripper_free(&self, arm: ArmId, gripper_world: &Transform, jawwidth: f64, object_world: &Transform) -> bool {
        let body = self.gripper_body(arm, gripper_world, jawwidth);
        !self.static_hit(&body, false) && !body.collides(&self.object_body(object_world), 0.0)
    }

    /// Bodies of an arm: link boxes, gripper and the held object if any.
    pub fn arm_bodies(&self, state: &ArmState) -> Vec<PosedBody> {
        let arm = self.robot.arm(state.arm).expect("arm exists");
        let links = CollisionBody::from_convex_parts(arm.link_parts(&state.q)).posed(&Transform::identity());
        let tip = arm.fk(&state.q).expect("configuration within limits");
        let mut out = vec![links, self.gripper_body(state.arm, &tip, state.jawwidth)];
        if let Some(g) = &state.held {
            out.push(self.object_body(&tip.compose(&g.inverse())));
        }
        out
    }

    /// Full collision test of one arm state against the environment, an
    /// optional resting object and an optional second arm.
    pub fn state_free(
        &self,
        state: &ArmState,
        other: Option<&ArmState>,
        resting_object: Option<&Transform>,
        with_obstacles: bool,
    ) -> bool {
        if self.robot.arm(state.arm).and_then(|a| a.check_limits(&state.q)).is_err() {
            return false;
        }
        let bodies = self.arm_bodies(state);
        if bodies.iter().any(|b| self.static_hit(b, with_obstacles)) {
            return false;
        }
        // Links against a held object: the gripper itself is exempt.
        if state.held.is_some() && bodies[0].collides(&bodies[2], 0.0) {
            return false;
        }
        if let Some(w) = resting_object {
            let obj = self.object_body(w);
            if bodies[..2].iter().any(|b| b.collides(&obj, 0.0)) {
                return false;
            }
        }
        if let Some(o) = other {
            let theirs = self.arm_bodies(o);
            for (i, a) in bodies.iter().enumerate() {
                for (j, b) in theirs.iter().enumerate() {
                    // During a handover both arms hold the same object.
                    if i == 2 && j == 2 {
                        continue;
                    }
                    if a.collides(b, 0.0) {
                        return false;
                    }
                }
            }
        }
        true
    }
}
