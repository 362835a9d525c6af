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


//! Built-in models: the three-direction pipe, a dual-arm robot and a table
//! layout that together form the default planning scene.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::geometry::{Transform, TriMesh, Vec3};
use crate::grasp::{GraspParams, GripperSpec, DEFAULT_FRICTION};
use crate::kinematics::{ArmId, ArmModel, Joint, RobotModel};
use crate::placement::{DEFAULT_MIN_MARGIN, DEFAULT_N_ROTATIONS};
use crate::scene::{Discretization, HandoverSpec, MotionSettings, Scene, TableSpec};

/// Voxel cells of the three-direction pipe: a bar along x with a branch along +y.
pub const PIPE_CELLS: [[i32; 3]; 7] = [[-2, 0, 0], [-1, 0, 0], [0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 1, 0], [0, 2, 0]];
/// Edge length of one pipe voxel.
pub const PIPE_PITCH: f64 = 0.03;

/// The three-direction pipe with its center of mass at the volume centroid.
pub fn pipe_mesh() -> TriMesh {
    TriMesh::from_voxels(&PIPE_CELLS, PIPE_PITCH, None).expect("pipe voxels form a valid mesh")
}

pub fn default_gripper() -> GripperSpec {
    GripperSpec::new(0.08, 0.0, [0.02, 0.02], 0.01, 0.02).expect("valid gripper")
}

/// Distance between the two shoulders.
pub const SHOULDER_SPACING: f64 = 0.3;
/// Height of the shoulders above the table surface.
pub const SHOULDER_HEIGHT: f64 = 0.3;

/// Six revolute joints with axes z, y, y, x, y, x. At zero angles the upper
/// arm and forearm point forward along +x.
pub fn default_arm(arm_id: ArmId, gripper: &GripperSpec) -> ArmModel {
    let y = match arm_id {
        ArmId::Left => SHOULDER_SPACING / 2.0,
        ArmId::Right => -SHOULDER_SPACING / 2.0,
    };
    let joint = |axis: Vec3, offset: [f64; 3], lim: f64| Joint {
        axis,
        origin: Transform::from_translation(Vec3::from(offset)),
        limits: [-lim, lim],
    };
    let joints = vec![
        joint(Vec3::z(), [0.0, 0.0, 0.0], PI),
        joint(Vec3::y(), [0.0, 0.0, 0.05], 2.0),
        joint(Vec3::y(), [0.3, 0.0, 0.0], 2.6),
        joint(Vec3::x(), [0.15, 0.0, 0.0], PI),
        joint(Vec3::y(), [0.15, 0.0, 0.0], 2.2),
        joint(Vec3::x(), [0.05, 0.0, 0.0], PI),
    ];
    // The gripper approach axis (z) points along the flange x axis.
    let tool = Transform::from_translation(Vec3::new(gripper.mount_offset(), 0.0, 0.0)).compose(&Transform::rot_y(FRAC_PI_2));
    ArmModel::new(arm_id, joints, Transform::from_translation(Vec3::new(0.0, y, SHOULDER_HEIGHT)), tool)
        .expect("default arm is valid")
}

/// Box torso standing behind the shoulders.
pub fn default_torso() -> TriMesh {
    TriMesh::aabb_box(Vec3::new(-0.35, -0.1, -0.2), Vec3::new(-0.06, 0.1, SHOULDER_HEIGHT + 0.15))
}

pub fn default_robot() -> RobotModel {
    let g = default_gripper();
    RobotModel::new(
        vec![default_arm(ArmId::Left, &g), default_arm(ArmId::Right, &g)],
        vec![g.clone(), g],
        default_torso(),
    )
    .expect("default robot is valid")
}

/// Default planning scene: the dual-arm robot facing a wide table, with the
/// pipe as the object. The position grid has a central column reachable by
/// both arms and side columns reachable by one arm each.
pub fn default_scene() -> Scene {
    let robot = default_robot();
    let rest = vec![(ArmId::Left, rest_q(ArmId::Left)), (ArmId::Right, rest_q(ArmId::Right))];
    Scene {
        robot,
        rest,
        object: pipe_mesh(),
        table: TableSpec {
            min: [0.15, -0.8],
            max: [0.85, 0.8],
            height: 0.0,
            thickness: 0.05,
        },
        discretization: Discretization {
            n_r: DEFAULT_N_ROTATIONS,
            grid_min: [0.3, -0.75],
            grid_max: [0.5, 0.75],
            grid: [2, 3],
            min_margin: DEFAULT_MIN_MARGIN,
            handover: HandoverSpec {
                min: Vec3::new(0.3, -0.05, 0.2),
                max: Vec3::new(0.45, 0.05, 0.3),
                lattice: [2, 2, 1],
                icosphere_level: 0,
            },
        },
        grasp: GraspParams {
            friction_mu: DEFAULT_FRICTION,
            density: 1000.0,
            seed: 7,
        },
        motion: MotionSettings::default(),
        obstacles: Vec::new(),
    }
}

/// Folded arm pose clear of the table.
pub fn rest_q(arm: ArmId) -> Vec<f64> {
    let yaw = match arm {
        ArmId::Left => 0.6,
        ArmId::Right => -0.6,
    };
    vec![yaw, -1.2, 2.4, 0.0, 0.3, 0.0]
}
