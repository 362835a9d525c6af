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


//! Serial-arm kinematics: forward kinematics, geometric Jacobians and damped
//! least-squares inverse kinematics.

use nalgebra::{DMatrix, DVector, Matrix6, OMatrix, Rotation3, Unit, Vector6, U6, Dyn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::transform::rotation_log;
use crate::geometry::{CollisionBody, Transform, TriMesh, Vec3};
use crate::grasp::GripperSpec;

/// Tolerance on joint limits when validating a configuration.
const LIMIT_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("joint {joint} value {value} outside [{lo}, {hi}]")]
    JointLimit { joint: usize, value: f64, lo: f64, hi: f64 },
    #[error("expected {expected} joint values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("target unreachable")]
    Unreachable,
    #[error("non-finite target")]
    NonFinite,
    #[error("invalid arm model: {0}")]
    InvalidModel(String),
    #[error("robot has no {0} arm")]
    MissingArm(ArmId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArmId {
    Left,
    Right,
}

impl ArmId {
    pub fn other(self) -> ArmId {
        match self {
            ArmId::Left => ArmId::Right,
            ArmId::Right => ArmId::Left,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ArmId::Left => "left",
            ArmId::Right => "right",
        }
    }
}

impl std::fmt::Display for ArmId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A revolute joint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    /// Rotation axis in the joint frame.
    pub axis: Vec3,
    /// Joint frame relative to the previous joint frame (or the base) at zero angle.
    pub origin: Transform,
    pub limits: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmModel {
    pub arm_id: ArmId,
    pub joints: Vec<Joint>,
    /// Base frame in the world.
    pub base: Transform,
    /// Gripper frame relative to the flange (the frame of the last joint).
    pub tool: Transform,
    /// Half-width of the square boxes used as link collision geometry.
    pub link_radius: f64,
}

/// Joint values of one arm plus its jaw opening.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmConfig {
    pub arm_id: ArmId,
    pub q: Vec<f64>,
    pub jawwidth: f64,
}

/// Settings of the damped least-squares solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IkParams {
    pub damping: f64,
    pub step_clip: f64,
    pub max_iterations: usize,
    pub max_restarts: usize,
    pub tol_position: f64,
    pub tol_rotation: f64,
}

impl Default for IkParams {
    fn default() -> Self {
        IkParams {
            damping: 0.05,
            step_clip: 0.2,
            max_iterations: 300,
            max_restarts: 20,
            tol_position: 1e-6,
            tol_rotation: 1e-5,
        }
    }
}

impl IkParams {
    /// Tolerances tight enough that object-frame grasps recovered from joint
    /// values agree to well below 1e-6.
    pub fn precise() -> Self {
        IkParams {
            tol_position: 1e-9,
            tol_rotation: 1e-9,
            ..IkParams::default()
        }
    }
}

fn joint_rotation(axis: &Vec3, angle: f64) -> Transform {
    Transform::from_rotation(*Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle).matrix())
}

impl ArmModel {
    pub fn new(arm_id: ArmId, joints: Vec<Joint>, base: Transform, tool: Transform) -> Result<Self, KinematicsError> {
        let arm = ArmModel {
            arm_id,
            joints,
            base,
            tool,
            link_radius: 0.012,
        };
        arm.validate()?;
        Ok(arm)
    }

    /// Structural checks. The chain length bound of a full robot is enforced by
    /// [`RobotModel::new`]; a bare arm may have any positive number of joints,
    /// which keeps small test chains expressible.
    pub fn validate(&self) -> Result<(), KinematicsError> {
        if self.joints.is_empty() || self.joints.len() > 9 {
            return Err(KinematicsError::InvalidModel("an arm needs 1 to 9 joints".into()));
        }
        for (i, j) in self.joints.iter().enumerate() {
            if !(j.limits[0] < j.limits[1]) {
                return Err(KinematicsError::InvalidModel(format!("joint {i}: lower limit not below upper")));
            }
            if !(j.axis.norm() > 1e-12) || !j.axis.iter().all(|v| v.is_finite()) || !j.origin.is_finite() {
                return Err(KinematicsError::InvalidModel(format!("joint {i}: bad axis or origin")));
            }
        }
        if !self.base.is_finite() || !self.tool.is_finite() {
            return Err(KinematicsError::InvalidModel("non-finite base or tool".into()));
        }
        Ok(())
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn lower(&self) -> Vec<f64> {
        self.joints.iter().map(|j| j.limits[0]).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.joints.iter().map(|j| j.limits[1]).collect()
    }

    pub fn check_limits(&self, q: &[f64]) -> Result<(), KinematicsError> {
        if q.len() != self.dof() {
            return Err(KinematicsError::DimensionMismatch {
                expected: self.dof(),
                got: q.len(),
            });
        }
        for (i, (v, j)) in q.iter().zip(&self.joints).enumerate() {
            if !(v.is_finite() && *v >= j.limits[0] - LIMIT_EPS && *v <= j.limits[1] + LIMIT_EPS) {
                return Err(KinematicsError::JointLimit {
                    joint: i,
                    value: *v,
                    lo: j.limits[0],
                    hi: j.limits[1],
                });
            }
        }
        Ok(())
    }

    pub fn clamp(&self, q: &mut [f64]) {
        for (v, j) in q.iter_mut().zip(&self.joints) {
            *v = v.clamp(j.limits[0], j.limits[1]);
        }
    }

    /// Middle of every joint range.
    pub fn home(&self) -> Vec<f64> {
        self.joints.iter().map(|j| 0.5 * (j.limits[0] + j.limits[1])).collect()
    }

    /// World frames of every joint after its rotation, followed by the gripper frame.
    pub fn frames(&self, q: &[f64]) -> Result<Vec<Transform>, KinematicsError> {
        self.check_limits(q)?;
        Ok(self.frames_unchecked(q))
    }

    fn frames_unchecked(&self, q: &[f64]) -> Vec<Transform> {
        let mut out = Vec::with_capacity(self.dof() + 1);
        let mut t = self.base;
        for (j, angle) in self.joints.iter().zip(q) {
            t = t.compose(&j.origin).compose(&joint_rotation(&j.axis, *angle));
            out.push(t);
        }
        out.push(t.compose(&self.tool));
        out
    }

    fn fk_unchecked(&self, q: &[f64]) -> Transform {
        *self.frames_unchecked(q).last().expect("at least the tool frame")
    }

    /// Gripper pose in the world frame.
    pub fn fk(&self, q: &[f64]) -> Result<Transform, KinematicsError> {
        self.check_limits(q)?;
        Ok(self.fk_unchecked(q))
    }

    /// Geometric Jacobian: rows 0..3 linear velocity of the gripper origin,
    /// rows 3..6 angular velocity, both in the world frame.
    pub fn jacobian(&self, q: &[f64]) -> Result<OMatrix<f64, U6, Dyn>, KinematicsError> {
        self.check_limits(q)?;
        Ok(self.jacobian_unchecked(q))
    }

    fn jacobian_unchecked(&self, q: &[f64]) -> OMatrix<f64, U6, Dyn> {
        let frames = self.frames_unchecked(q);
        let tip = frames[self.dof()].translation;
        let mut jac = OMatrix::<f64, U6, Dyn>::zeros(self.dof());
        for (i, j) in self.joints.iter().enumerate() {
            let axis = frames[i].rotation * j.axis.normalize();
            let lin = axis.cross(&(tip - frames[i].translation));
            jac.fixed_view_mut::<3, 1>(0, i).copy_from(&lin);
            jac.fixed_view_mut::<3, 1>(3, i).copy_from(&axis);
        }
        jac
    }

    /// Upper bound on the distance from the first joint to the gripper origin.
    pub fn reach(&self) -> f64 {
        self.joints.iter().skip(1).map(|j| j.origin.translation.norm()).sum::<f64>() + self.tool.translation.norm()
    }

    /// World position of the first joint.
    pub fn shoulder(&self) -> Vec3 {
        self.base.compose(&self.joints[0].origin).translation
    }

    /// Damped least-squares IK with deterministic restarts.
    pub fn ik(&self, target: &Transform, seed_q: &[f64], params: &IkParams) -> Result<ArmConfig, KinematicsError> {
        if !target.is_finite() {
            return Err(KinematicsError::NonFinite);
        }
        if seed_q.len() != self.dof() {
            return Err(KinematicsError::DimensionMismatch {
                expected: self.dof(),
                got: seed_q.len(),
            });
        }
        if (target.translation - self.shoulder()).norm() > self.reach() + 1e-9 {
            return Err(KinematicsError::Unreachable);
        }
        for restart in 0..=params.max_restarts {
            let mut q = seed_q.to_vec();
            if restart > 0 {
                for (i, (v, j)) in q.iter_mut().zip(&self.joints).enumerate() {
                    let h = halton(restart as u64, PRIMES[i]);
                    let half_range = 0.5 * (j.limits[1] - j.limits[0]);
                    *v += (2.0 * h - 1.0) * half_range.min(std::f64::consts::PI);
                }
            }
            self.clamp(&mut q);
            if let Some(q) = self.solve_from(target, q, params) {
                return Ok(ArmConfig {
                    arm_id: self.arm_id,
                    q,
                    jawwidth: 0.0,
                });
            }
        }
        Err(KinematicsError::Unreachable)
    }

    fn solve_from(&self, target: &Transform, mut q: Vec<f64>, params: &IkParams) -> Option<Vec<f64>> {
        let n = self.dof();
        let lambda2 = params.damping * params.damping;
        let mut best = f64::INFINITY;
        let mut since_improvement = 0;
        for _ in 0..=params.max_iterations {
            let current = self.fk_unchecked(&q);
            let e_pos = target.translation - current.translation;
            let e_rot = rotation_log(&(target.rotation * current.rotation.transpose()));
            if e_pos.norm() <= params.tol_position && e_rot.norm() <= params.tol_rotation {
                return Some(self.polish(target, q));
            }
            let err = e_pos.norm() + 0.1 * e_rot.norm();
            if err < best * (1.0 - 1e-3) {
                best = err;
                since_improvement = 0;
            } else {
                since_improvement += 1;
                if since_improvement > 25 {
                    return None;
                }
            }
            let e = Vector6::new(e_pos.x, e_pos.y, e_pos.z, e_rot.x, e_rot.y, e_rot.z);
            let jac = self.jacobian_unchecked(&q);
            // Damping fades as the error shrinks so the last steps are close to Gauss-Newton.
            let damp = lambda2 * err.min(1.0);
            let jjt: Matrix6<f64> = &jac * jac.transpose() + Matrix6::identity() * damp;
            let y = jjt.lu().solve(&e)?;
            let dq: DVector<f64> = jac.transpose() * y;
            let peak = dq.amax();
            let scale = if peak > params.step_clip { params.step_clip / peak } else { 1.0 };
            for i in 0..n {
                q[i] += dq[i] * scale;
            }
            self.clamp(&mut q);
        }
        None
    }

    /// A few nearly undamped steps from a converged solution, each kept only
    /// if it lowers the error and respects the joint limits.
    fn polish(&self, target: &Transform, mut q: Vec<f64>) -> Vec<f64> {
        let error = |q: &[f64]| {
            let t = self.fk_unchecked(q);
            let e_pos = target.translation - t.translation;
            let e_rot = rotation_log(&(target.rotation * t.rotation.transpose()));
            (Vector6::new(e_pos.x, e_pos.y, e_pos.z, e_rot.x, e_rot.y, e_rot.z), e_pos.norm() + e_rot.norm())
        };
        let (mut e, mut err) = error(&q);
        for _ in 0..4 {
            let jac = self.jacobian_unchecked(&q);
            let jjt: Matrix6<f64> = &jac * jac.transpose() + Matrix6::identity() * 1e-12;
            let Some(y) = jjt.lu().solve(&e) else {
                break;
            };
            let dq: DVector<f64> = jac.transpose() * y;
            let next: Vec<f64> = q.iter().zip(dq.iter()).map(|(a, d)| a + d).collect();
            let inside = next.iter().zip(&self.joints).all(|(v, j)| *v >= j.limits[0] && *v <= j.limits[1]);
            let (e2, err2) = error(&next);
            if !inside || !(err2 < err) {
                break;
            }
            (q, e, err) = (next, e2, err2);
        }
        q
    }

    /// Convex link boxes in the world frame at configuration `q`.
    pub fn link_parts(&self, q: &[f64]) -> Vec<Vec<Vec3>> {
        let frames = self.frames_unchecked(q);
        // Base, then every joint up to the flange; the gripper body covers the tool offset.
        let points: Vec<Vec3> = std::iter::once(self.base.translation)
            .chain(frames.iter().take(self.dof()).map(|f| f.translation))
            .collect();
        let mut parts = Vec::new();
        for w in points.windows(2) {
            if let Some(p) = segment_box(&w[0], &w[1], self.link_radius) {
                parts.push(p);
            }
        }
        parts
    }
}

/// Square prism of half-width `r` around a segment; `None` for zero-length segments.
pub fn segment_box(a: &Vec3, b: &Vec3, r: f64) -> Option<Vec<Vec3>> {
    let d = b - a;
    if d.norm() < 1e-9 {
        return None;
    }
    let (u, v) = crate::geometry::hull::plane_basis(&d.normalize());
    let mut out = Vec::with_capacity(8);
    for end in [a, b] {
        for (su, sv) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
            out.push(end + u * (su * r) + v * (sv * r));
        }
    }
    Some(out)
}

const PRIMES: [u64; 9] = [2, 3, 5, 7, 11, 13, 17, 19, 23];

/// Radical inverse of `index` in `base`.
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Numerical rank of a Jacobian (singular values above `tol`).
pub fn jacobian_rank(jac: &OMatrix<f64, U6, Dyn>, tol: f64) -> usize {
    let m = DMatrix::from_iterator(6, jac.ncols(), jac.iter().copied());
    m.singular_values().iter().filter(|s| **s > tol).count()
}

/// One or two arms, their grippers and a static torso obstacle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotModel {
    pub arms: Vec<ArmModel>,
    pub grippers: Vec<GripperSpec>,
    pub torso: TriMesh,
}

impl RobotModel {
    pub fn new(arms: Vec<ArmModel>, grippers: Vec<GripperSpec>, torso: TriMesh) -> Result<Self, KinematicsError> {
        if arms.is_empty() || arms.len() > 2 || grippers.len() != arms.len() {
            return Err(KinematicsError::InvalidModel("need one or two arms, each with a gripper".into()));
        }
        for arm in &arms {
            arm.validate()?;
            if arm.dof() < 6 {
                return Err(KinematicsError::InvalidModel(format!("{} arm needs 6 to 9 joints", arm.arm_id)));
            }
        }
        if arms.len() == 2 {
            if arms[0].arm_id == arms[1].arm_id {
                return Err(KinematicsError::InvalidModel("duplicate arm id".into()));
            }
            if arms[0].base.translation_distance(&arms[1].base) < 1e-9 {
                return Err(KinematicsError::InvalidModel("arm bases coincide".into()));
            }
        }
        for g in &grippers {
            g.validate().map_err(|e| KinematicsError::InvalidModel(e.to_string()))?;
        }
        Ok(RobotModel { arms, grippers, torso })
    }

    pub fn arm(&self, id: ArmId) -> Result<&ArmModel, KinematicsError> {
        self.arms.iter().find(|a| a.arm_id == id).ok_or(KinematicsError::MissingArm(id))
    }

    pub fn gripper(&self, id: ArmId) -> Result<&GripperSpec, KinematicsError> {
        let i = self.arms.iter().position(|a| a.arm_id == id).ok_or(KinematicsError::MissingArm(id))?;
        Ok(&self.grippers[i])
    }

    pub fn arm_ids(&self) -> Vec<ArmId> {
        let mut ids: Vec<ArmId> = self.arms.iter().map(|a| a.arm_id).collect();
        ids.sort();
        ids
    }

    pub fn torso_body(&self) -> CollisionBody {
        CollisionBody::from_mesh(&self.torso)
    }
}

/// Forward kinematics of one arm.
pub fn fk(arm: &ArmModel, q: &[f64]) -> Result<Transform, KinematicsError> {
    arm.fk(q)
}

pub fn jacobian(arm: &ArmModel, q: &[f64]) -> Result<OMatrix<f64, U6, Dyn>, KinematicsError> {
    arm.jacobian(q)
}

/// IK with the default solver settings.
pub fn ik(arm: &ArmModel, target: &Transform, seed_q: &[f64]) -> Result<ArmConfig, KinematicsError> {
    arm.ik(target, seed_q, &IkParams::default())
}

/// Gripper pose in the object frame: `inverse(object_world) * fk(q)`.
pub fn object_frame_grasp(object_world: &Transform, config: &ArmConfig, robot: &RobotModel) -> Result<Transform, KinematicsError> {
    let gripper = robot.arm(config.arm_id)?.fk(&config.q)?;
    Ok(object_world.inverse().compose(&gripper))
}
