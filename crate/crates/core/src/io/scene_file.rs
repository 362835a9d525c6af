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


//! Scene files: a TOML document naming the object mesh, the table, the robot
//! and every discretization parameter and seed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::geometry::io::load_mesh;
use crate::geometry::{Transform, TriMesh, Vec3};
use crate::grasp::{GraspParams, GripperSpec};
use crate::kinematics::{ArmId, ArmModel, Joint, RobotModel};
use crate::scene::{Discretization, HandoverSpec, MotionSettings, Scene, TableSpec};

use super::IoError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub object: ObjectSection,
    pub table: TableSpec,
    pub robot: RobotSection,
    pub discretization: DiscretizationSection,
    pub grasp: GraspSection,
    pub motion: MotionSettings,
    #[serde(default)]
    pub obstacles: Vec<ShapeSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSection {
    /// Mesh path, relative to the scene file.
    pub mesh: String,
    pub com: ComSpec,
}

/// Center of mass: `"auto"` for the volume centroid or an explicit point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComSpec {
    Auto(String),
    Point([f64; 3]),
}

/// Either a mesh file or an axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSection {
    pub mesh: Option<String>,
    pub min: Option<[f64; 3]>,
    pub max: Option<[f64; 3]>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSection {
    #[serde(default)]
    pub translation: [f64; 3],
    /// Roll, pitch, yaw applied as `Rx * Ry * Rz`.
    #[serde(default)]
    pub rpy: [f64; 3],
}

impl FrameSection {
    pub fn transform(&self) -> Transform {
        Transform::from_euler(&Vec3::from(self.translation), &Vec3::from(self.rpy))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSection {
    pub torso: ShapeSection,
    pub arms: Vec<ArmSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSection {
    pub id: ArmId,
    pub base: FrameSection,
    pub tool: FrameSection,
    pub link_radius: f64,
    pub rest: Vec<f64>,
    pub gripper: GripperSection,
    pub joints: Vec<JointSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointSection {
    pub axis: [f64; 3],
    #[serde(default)]
    pub origin: FrameSection,
    pub limits: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GripperSection {
    pub max_jawwidth: f64,
    pub min_jawwidth: f64,
    pub finger_pad: [f64; 2],
    pub finger_thickness: f64,
    pub palm_depth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSection {
    pub rotations: usize,
    pub grid_min: [f64; 2],
    pub grid_max: [f64; 2],
    pub grid: [usize; 2],
    pub min_margin: f64,
    pub handover: HandoverSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandoverSection {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub lattice: [usize; 3],
    pub icosphere_level: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraspSection {
    pub friction: f64,
    pub density: f64,
    pub seed: u64,
}

fn invalid(path: &Path, msg: impl Into<String>) -> IoError {
    IoError::Invalid {
        path: path.display().to_string(),
        message: msg.into(),
    }
}

fn resolve(base: &Path, rel: &str) -> PathBuf {
    base.parent().unwrap_or(Path::new(".")).join(rel)
}

fn load_shape(file: &Path, s: &ShapeSection) -> Result<TriMesh, IoError> {
    match (&s.mesh, s.min, s.max) {
        (Some(m), None, None) => {
            let p = resolve(file, m);
            if !p.is_file() {
                return Err(IoError::MissingFile(p.display().to_string()));
            }
            Ok(load_mesh(&p, None)?)
        }
        (None, Some(lo), Some(hi)) => {
            if (0..3).any(|k| lo[k] >= hi[k]) {
                return Err(invalid(file, "box min must be below max on every axis"));
            }
            Ok(TriMesh::aabb_box(Vec3::from(lo), Vec3::from(hi)))
        }
        _ => Err(invalid(file, "a shape needs either `mesh` or both `min` and `max`")),
    }
}

impl SceneFile {
    pub fn parse(text: &str, path: &Path) -> Result<SceneFile, IoError> {
        toml::from_str(text).map_err(|e| IoError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    /// Checks counts and ranges, loads referenced meshes relative to `path`
    /// and assembles the scene.
    pub fn to_scene(&self, path: &Path) -> Result<Scene, IoError> {
        let d = &self.discretization;
        let counts = [
            ("discretization.rotations", d.rotations),
            ("discretization.grid[0]", d.grid[0]),
            ("discretization.grid[1]", d.grid[1]),
            ("discretization.handover.lattice[0]", d.handover.lattice[0]),
            ("discretization.handover.lattice[1]", d.handover.lattice[1]),
            ("discretization.handover.lattice[2]", d.handover.lattice[2]),
            ("motion.rrt_iterations", self.motion.rrt_iterations),
            ("robot.arms", self.robot.arms.len()),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(invalid(path, format!("{name} must be at least 1")));
            }
        }
        let positive = [
            ("grasp.density", self.grasp.density),
            ("motion.rrt_step", self.motion.rrt_step),
            ("motion.check_resolution", self.motion.check_resolution),
            ("motion.cartesian_step", self.motion.cartesian_step),
            ("motion.rrt_initial_radius", self.motion.rrt_initial_radius),
            ("table.thickness", self.table.thickness),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(path, format!("{name} must be positive")));
            }
        }
        if !(self.grasp.friction.is_finite() && self.grasp.friction >= 0.0) {
            return Err(invalid(path, "grasp.friction must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.motion.goal_bias) {
            return Err(invalid(path, "motion.goal_bias must lie in [0, 1]"));
        }

        let mesh_path = resolve(path, &self.object.mesh);
        if !mesh_path.is_file() {
            return Err(IoError::MissingFile(mesh_path.display().to_string()));
        }
        let com = match &self.object.com {
            ComSpec::Auto(s) if s == "auto" => None,
            ComSpec::Auto(s) => return Err(invalid(path, format!("object.com must be \"auto\" or a point, got \"{s}\""))),
            ComSpec::Point(p) => Some(Vec3::from(*p)),
        };
        let object = load_mesh(&mesh_path, com)?;

        let mut arms = Vec::new();
        let mut grippers = Vec::new();
        let mut rest = Vec::new();
        for a in &self.robot.arms {
            let joints = a
                .joints
                .iter()
                .map(|j| Joint {
                    axis: Vec3::from(j.axis),
                    origin: j.origin.transform(),
                    limits: j.limits,
                })
                .collect();
            let mut model = ArmModel::new(a.id, joints, a.base.transform(), a.tool.transform())?;
            model.link_radius = a.link_radius;
            model.check_limits(&a.rest)?;
            let g = &a.gripper;
            grippers.push(GripperSpec::new(g.max_jawwidth, g.min_jawwidth, g.finger_pad, g.finger_thickness, g.palm_depth)?);
            rest.push((a.id, a.rest.clone()));
            arms.push(model);
        }
        let torso = load_shape(path, &self.robot.torso)?;
        let robot = RobotModel::new(arms, grippers, torso)?;
        let obstacles = self
            .obstacles
            .iter()
            .map(|o| load_shape(path, o))
            .collect::<Result<Vec<_>, _>>()?;
        let h = &d.handover;
        Ok(Scene {
            robot,
            rest,
            object,
            table: self.table.clone(),
            discretization: Discretization {
                n_r: d.rotations,
                grid_min: d.grid_min,
                grid_max: d.grid_max,
                grid: d.grid,
                min_margin: d.min_margin,
                handover: HandoverSpec {
                    min: Vec3::from(h.min),
                    max: Vec3::from(h.max),
                    lattice: h.lattice,
                    icosphere_level: h.icosphere_level,
                },
            },
            grasp: GraspParams {
                friction_mu: self.grasp.friction,
                density: self.grasp.density,
                seed: self.grasp.seed,
            },
            motion: self.motion.clone(),
            obstacles,
        })
    }
}

/// Reads, validates and assembles a scene file.
pub fn load_scene(path: &Path) -> Result<Scene, IoError> {
    let text = std::fs::read_to_string(path).map_err(|_| IoError::MissingFile(path.display().to_string()))?;
    SceneFile::parse(&text, path)?.to_scene(path)
}
