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


//! Parallel-jaw gripper geometry and antipodal grasp synthesis.

use std::f64::consts::FRAC_PI_4;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{CollisionBody, Transform, TriMesh, Vec3};

/// Default friction coefficient at the finger pads.
pub const DEFAULT_FRICTION: f64 = 0.5;
/// Contact pairs closer than this (at both ends) are merged.
pub const CLUSTER_RADIUS: f64 = 0.005;
/// Gripper rotations enumerated about each contact axis.
pub const ROTATIONS_PER_PAIR: usize = 8;
/// Gap between a finger pad and the object surface at the nominal jaw width.
pub const PAD_CLEARANCE: f64 = 0.001;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraspError {
    #[error("invalid gripper: {0}")]
    InvalidGripper(String),
    #[error("invalid synthesis parameter: {0}")]
    InvalidParameter(String),
}

/// A parallel-jaw gripper.
///
/// The gripper frame has its origin midway between the finger pads, `y` along
/// the closing direction and `z` along the approach direction (pointing from
/// the palm towards the fingertips).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GripperSpec {
    pub max_jawwidth: f64,
    pub min_jawwidth: f64,
    /// Finger pad size: width along gripper `x`, height along gripper `z`.
    pub finger_pad: [f64; 2],
    pub finger_thickness: f64,
    pub palm_depth: f64,
}

impl GripperSpec {
    pub fn new(
        max_jawwidth: f64,
        min_jawwidth: f64,
        finger_pad: [f64; 2],
        finger_thickness: f64,
        palm_depth: f64,
    ) -> Result<Self, GraspError> {
        let spec = GripperSpec {
            max_jawwidth,
            min_jawwidth,
            finger_pad,
            finger_thickness,
            palm_depth,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GraspError> {
        let all = [
            self.max_jawwidth,
            self.min_jawwidth,
            self.finger_pad[0],
            self.finger_pad[1],
            self.finger_thickness,
            self.palm_depth,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(GraspError::InvalidGripper("non-finite dimension".into()));
        }
        if !(0.0 <= self.min_jawwidth && self.min_jawwidth < self.max_jawwidth) {
            return Err(GraspError::InvalidGripper("need 0 <= min_jawwidth < max_jawwidth".into()));
        }
        if all[2..].iter().any(|v| *v <= 0.0) {
            return Err(GraspError::InvalidGripper("pad, finger and palm sizes must be positive".into()));
        }
        Ok(())
    }

    /// Distance from the gripper origin back to the rear face of the palm,
    /// where the gripper mounts on the arm flange.
    pub fn mount_offset(&self) -> f64 {
        self.finger_pad[1] / 2.0 + self.palm_depth
    }

    /// Convex parts (box corner sets) of the gripper body at jaw width `d`:
    /// two fingers and the palm, in the gripper frame.
    pub fn body_parts(&self, d: f64) -> Vec<Vec<Vec3>> {
        let d = d.clamp(self.min_jawwidth, self.max_jawwidth);
        let [w, h] = self.finger_pad;
        let t = self.finger_thickness;
        let inner = d / 2.0 + PAD_CLEARANCE;
        let outer_palm = self.max_jawwidth / 2.0 + PAD_CLEARANCE + t;
        let finger_a = box_corners([-w / 2.0, inner, -h / 2.0], [w / 2.0, inner + t, h / 2.0]);
        let finger_b = box_corners([-w / 2.0, -inner - t, -h / 2.0], [w / 2.0, -inner, h / 2.0]);
        let palm = box_corners(
            [-w / 2.0, -outer_palm, -h / 2.0 - self.palm_depth],
            [w / 2.0, outer_palm, -h / 2.0],
        );
        vec![finger_a, finger_b, palm]
    }

    pub fn body(&self, d: f64) -> CollisionBody {
        CollisionBody::from_convex_parts(self.body_parts(d))
    }

    /// Gripper body as a triangle mesh, for export and inspection.
    pub fn body_mesh(&self, d: f64) -> TriMesh {
        let parts: Vec<TriMesh> = self
            .body_parts(d)
            .iter()
            .map(|c| TriMesh::aabb_box(c[0], c[7]))
            .collect();
        TriMesh::merged(&parts)
    }
}

fn box_corners(min: [f64; 3], max: [f64; 3]) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(8);
    for i in 0..8 {
        out.push(Vec3::new(
            if i & 1 == 0 { min[0] } else { max[0] },
            if i & 2 == 0 { min[1] } else { max[1] },
            if i & 4 == 0 { min[2] } else { max[2] },
        ));
    }
    out
}

/// One antipodal contact pair on the object surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactPair {
    pub contact_a: Vec3,
    pub contact_b: Vec3,
    pub normal_a: Vec3,
    pub normal_b: Vec3,
    /// Triangle carrying `contact_a`; its first edge fixes the reference
    /// direction for the rotations about the contact axis.
    pub face_a: usize,
    pub reference: Vec3,
}

impl ContactPair {
    pub fn width(&self) -> f64 {
        (self.contact_b - self.contact_a).norm()
    }

    /// True when `other` names the same contacts (in either order) within `tol`.
    pub fn same_contacts(&self, other: &ContactPair, tol: f64) -> bool {
        let direct = (self.contact_a - other.contact_a).norm() <= tol && (self.contact_b - other.contact_b).norm() <= tol;
        let swapped = (self.contact_a - other.contact_b).norm() <= tol && (self.contact_b - other.contact_a).norm() <= tol;
        direct || swapped
    }
}

/// A parallel-jaw grasp in the object frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grasp {
    /// Gripper frame expressed in the object frame.
    pub object_to_gripper: Transform,
    pub jawwidth: f64,
    pub contact_a: Vec3,
    pub contact_b: Vec3,
    pub normal_a: Vec3,
    pub normal_b: Vec3,
}

/// Parameters of [`synthesize_grasps`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspParams {
    pub friction_mu: f64,
    /// Surface samples per square meter.
    pub density: f64,
    pub seed: u64,
}

impl Default for GraspParams {
    fn default() -> Self {
        GraspParams {
            friction_mu: DEFAULT_FRICTION,
            density: 2000.0,
            seed: 0,
        }
    }
}

/// A surface sample: point, outward normal and the triangle it lies on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceSample {
    pub point: Vec3,
    pub normal: Vec3,
    pub face: usize,
}

/// Seeded uniform samples per triangle. Each triangle receives
/// `floor(area * density)` samples plus one more with probability equal to the
/// fractional part, so the expected count matches the density. The random
/// stream depends only on the seed and the triangle order, which makes the
/// samples move rigidly with the mesh.
pub fn sample_surface(mesh: &TriMesh, density: f64, seed: u64) -> Vec<SurfaceSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for face in 0..mesh.faces().len() {
        let expected = mesh.face_area(face) * density;
        let extra: f64 = rng.gen();
        let count = expected.floor() as usize + usize::from(extra < expected.fract());
        let [a, b, c] = mesh.triangle(face);
        let normal = mesh.face_normal(face);
        for _ in 0..count {
            let (mut u, mut v): (f64, f64) = (rng.gen(), rng.gen());
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            out.push(SurfaceSample {
                point: a + (b - a) * u + (c - a) * v,
                normal,
                face,
            });
        }
    }
    out
}

/// Two-contact force closure: the contact line lies inside both friction cones.
pub fn is_force_closure(contact_a: &Vec3, normal_a: &Vec3, contact_b: &Vec3, normal_b: &Vec3, mu: f64) -> bool {
    let line = contact_b - contact_a;
    let len = line.norm();
    if len < 1e-12 {
        return false;
    }
    let l = line / len;
    let half_angle = mu.atan();
    // Finger a pushes along +l into the surface at a, finger b along -l.
    let angle_a = (-normal_a).dot(&l).clamp(-1.0, 1.0).acos();
    let angle_b = (-normal_b).dot(&-l).clamp(-1.0, 1.0).acos();
    angle_a <= half_angle + 1e-12 && angle_b <= half_angle + 1e-12
}

/// Antipodal contact pairs found by casting a ray from every surface sample
/// along its inward normal, filtered by jaw stroke and friction cones, then
/// clustered within [`CLUSTER_RADIUS`].
pub fn antipodal_contact_pairs(mesh: &TriMesh, gripper: &GripperSpec, params: &GraspParams) -> Vec<ContactPair> {
    let mut pairs: Vec<ContactPair> = Vec::new();
    for s in sample_surface(mesh, params.density, params.seed) {
        let Some((t, face_b)) = mesh.raycast(&s.point, &-s.normal, 1e-9) else {
            continue;
        };
        let q = s.point - s.normal * t;
        let n_b = mesh.face_normal(face_b);
        if t < gripper.min_jawwidth || t > gripper.max_jawwidth {
            continue;
        }
        if !is_force_closure(&s.point, &s.normal, &q, &n_b, params.friction_mu) {
            continue;
        }
        let [v0, v1, _] = mesh.triangle(s.face);
        let pair = ContactPair {
            contact_a: s.point,
            contact_b: q,
            normal_a: s.normal,
            normal_b: n_b,
            face_a: s.face,
            reference: v1 - v0,
        };
        if !pairs.iter().any(|p| p.same_contacts(&pair, CLUSTER_RADIUS)) {
            pairs.push(pair);
        }
    }
    pairs
}

/// Gripper frames for the [`ROTATIONS_PER_PAIR`] rotations about the contact
/// axis of `pair`, in the object frame.
pub fn grasp_frames(pair: &ContactPair) -> Vec<Transform> {
    let y = (pair.contact_b - pair.contact_a).normalize();
    let mid = (pair.contact_a + pair.contact_b) / 2.0;
    let mut x0 = pair.reference - y * y.dot(&pair.reference);
    if x0.norm() < 1e-9 {
        x0 = crate::geometry::hull::plane_basis(&y).0;
    }
    let x0 = x0.normalize();
    (0..ROTATIONS_PER_PAIR)
        .map(|k| {
            let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_unchecked(y), k as f64 * FRAC_PI_4);
            let x = rot * x0;
            let z = x.cross(&y);
            Transform::new(nalgebra::Matrix3::from_columns(&[x, y, z]), mid)
        })
        .collect()
}

/// True when the gripper body at the grasp's jaw width overlaps the object.
pub fn grasp_collides(mesh_body: &CollisionBody, gripper: &GripperSpec, grasp: &Grasp) -> bool {
    let object = mesh_body.posed(&Transform::identity());
    gripper.body(grasp.jawwidth).posed(&grasp.object_to_gripper).collides(&object, 0.0)
}

/// Force-closure, collision-free parallel-jaw grasps of `mesh` in its own frame.
///
/// An empty list means no contact pair fits the jaw stroke.
pub fn synthesize_grasps(mesh: &TriMesh, gripper: &GripperSpec, params: &GraspParams) -> Result<Vec<Grasp>, GraspError> {
    gripper.validate()?;
    if !(params.friction_mu > 0.0 && params.friction_mu.is_finite()) {
        return Err(GraspError::InvalidParameter("friction_mu must be positive".into()));
    }
    if !(params.density > 0.0 && params.density.is_finite()) {
        return Err(GraspError::InvalidParameter("density must be positive".into()));
    }
    let body = CollisionBody::from_mesh(mesh);
    let object = body.posed(&Transform::identity());
    let mut grasps: Vec<Grasp> = Vec::new();
    for pair in antipodal_contact_pairs(mesh, gripper, params) {
        let jawwidth = pair.width();
        for frame in grasp_frames(&pair) {
            if gripper.body(jawwidth).posed(&frame).collides(&object, 0.0) {
                continue;
            }
            if grasps.iter().any(|g| g.object_to_gripper.approx_eq(&frame, 1e-9, 1e-9)) {
                continue;
            }
            grasps.push(Grasp {
                object_to_gripper: frame,
                jawwidth,
                contact_a: pair.contact_a,
                contact_b: pair.contact_b,
                normal_a: pair.normal_a,
                normal_b: pair.normal_b,
            });
        }
    }
    Ok(grasps)
}

/// Number of planned grasps.
pub fn grasp_count_report(grasps: &[Grasp]) -> usize {
    grasps.len()
}
