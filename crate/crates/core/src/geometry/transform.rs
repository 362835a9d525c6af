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

//! Rigid-body transforms.

use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;

/// A rigid transform in SE(3): `p' = rotation * p + translation`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl Default for Transform {
    fn default() -> Self {
        Self::identity()
    }
}

impl Transform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self::new(Matrix3::identity(), translation)
    }

    pub fn from_rotation(rotation: Matrix3<f64>) -> Self {
        Self::new(rotation, Vec3::zeros())
    }

    /// Rotation of `angle` radians about the (not necessarily normalized) `axis`.
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Self {
        let axis = Unit::new_normalize(*axis);
        Self::from_rotation(*Rotation3::from_axis_angle(&axis, angle).matrix())
    }

    pub fn rot_x(angle: f64) -> Self {
        Self::from_axis_angle(&Vec3::x(), angle)
    }

    pub fn rot_y(angle: f64) -> Self {
        Self::from_axis_angle(&Vec3::y(), angle)
    }

    pub fn rot_z(angle: f64) -> Self {
        Self::from_axis_angle(&Vec3::z(), angle)
    }

    /// Builds a transform from a position and the three Euler angles `r = (rx, ry, rz)`.
    ///
    /// The rotation block is the product `Rx(rx) * Ry(ry) * Rz(rz)`, written out
    /// entry by entry.
    pub fn from_euler(p: &Vec3, r: &Vec3) -> Self {
        let (sx, cx) = r.x.sin_cos();
        let (sy, cy) = r.y.sin_cos();
        let (sz, cz) = r.z.sin_cos();
        #[rustfmt::skip]
        let rotation = Matrix3::new(
            cy * cz,                   -cy * sz,                   sy,
            sx * sy * cz + cx * sz,    -sx * sy * sz + cx * cz,    -sx * cy,
            -cx * sy * cz + sx * sz,   cx * sy * sz + sx * cz,     cx * cy,
        );
        Self::new(rotation, *p)
    }

    /// Inverse of [`Transform::from_euler`] for the rotation block.
    ///
    /// Returns angles with `ry` in `[-pi/2, pi/2]`.
    pub fn euler_angles(&self) -> Vec3 {
        let m = &self.rotation;
        let ry = m[(0, 2)].clamp(-1.0, 1.0).asin();
        if ry.cos().abs() > 1e-9 {
            let rx = (-m[(1, 2)]).atan2(m[(2, 2)]);
            let rz = (-m[(0, 1)]).atan2(m[(0, 0)]);
            Vec3::new(rx, ry, rz)
        } else {
            // Gimbal lock: fold rz into rx.
            let rx = m[(2, 1)].atan2(m[(1, 1)]);
            Vec3::new(rx, ry, 0.0)
        }
    }

    pub fn compose(&self, other: &Transform) -> Transform {
        Transform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Transform {
        let rt = self.rotation.transpose();
        Transform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn apply_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn from_homogeneous(m: &Matrix4<f64>) -> Transform {
        Transform {
            rotation: m.fixed_view::<3, 3>(0, 0).into_owned(),
            translation: m.fixed_view::<3, 1>(0, 3).into_owned(),
        }
    }

    /// Rotation vector (axis * angle) of this transform's rotation block.
    pub fn rotation_vector(&self) -> Vec3 {
        rotation_log(&self.rotation)
    }

    /// Geodesic angle between the rotation blocks of `self` and `other`.
    pub fn rotation_distance(&self, other: &Transform) -> f64 {
        let rel = self.rotation.transpose() * other.rotation;
        rotation_log(&rel).norm()
    }

    pub fn translation_distance(&self, other: &Transform) -> f64 {
        (self.translation - other.translation).norm()
    }

    /// True when both translation and rotation agree within the given tolerances.
    pub fn approx_eq(&self, other: &Transform, tol_pos: f64, tol_rot: f64) -> bool {
        self.translation_distance(other) <= tol_pos && self.rotation_distance(other) <= tol_rot
    }

    /// Largest deviation of `R^T R` from identity and of `det R` from one.
    pub fn orthonormality_error(&self) -> f64 {
        let err = (self.rotation.transpose() * self.rotation - Matrix3::identity()).abs().max();
        err.max((self.rotation.determinant() - 1.0).abs())
    }

    pub fn is_finite(&self) -> bool {
        self.rotation.iter().all(|v| v.is_finite()) && self.translation.iter().all(|v| v.is_finite())
    }
}

impl Mul for Transform {
    type Output = Transform;

    fn mul(self, rhs: Transform) -> Transform {
        self.compose(&rhs)
    }
}

impl Mul<&Transform> for &Transform {
    type Output = Transform;

    fn mul(self, rhs: &Transform) -> Transform {
        self.compose(rhs)
    }
}

/// Free function form of [`Transform::compose`].
pub fn compose(a: &Transform, b: &Transform) -> Transform {
    a.compose(b)
}

/// Free function form of [`Transform::inverse`].
pub fn inverse(t: &Transform) -> Transform {
    t.inverse()
}

/// Free function form of [`Transform::from_euler`].
pub fn euler_to_transform(p: &Vec3, r: &Vec3) -> Transform {
    Transform::from_euler(p, r)
}

/// Logarithm map of SO(3), robust near 0 and pi.
pub fn rotation_log(r: &Matrix3<f64>) -> Vec3 {
    let cos = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let angle = cos.acos();
    let skew = Vec3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
    if angle < 1e-6 {
        // sin(angle) ~ angle; first-order expansion
        return skew * 0.5;
    }
    if std::f64::consts::PI - angle < 1e-4 {
        // Near pi the skew part vanishes; recover the axis from the symmetric part.
        let b = (r + Matrix3::identity()) * 0.5;
        let diag = Vec3::new(b[(0, 0)], b[(1, 1)], b[(2, 2)]);
        let i = diag.imax();
        let mut axis = b.column(i).into_owned();
        axis /= axis.norm();
        if axis.dot(&skew) < 0.0 {
            axis = -axis;
        }
        return axis * angle;
    }
    skew * (angle / (2.0 * angle.sin()))
}

/// Rotation taking unit vector `from` onto unit vector `to` by the shortest arc.
pub fn rotation_between(from: &Vec3, to: &Vec3) -> Matrix3<f64> {
    let f = from.normalize();
    let t = to.normalize();
    let c = f.dot(&t);
    if c > 1.0 - 1e-15 {
        return Matrix3::identity();
    }
    if c < -1.0 + 1e-15 {
        // Antiparallel: rotate pi about any axis perpendicular to `from`.
        let helper = if f.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let axis = f.cross(&helper).normalize();
        return *Rotation3::from_axis_angle(&Unit::new_unchecked(axis), std::f64::consts::PI).matrix();
    }
    let axis = f.cross(&t);
    let angle = axis.norm().atan2(c);
    *Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle).matrix()
}
