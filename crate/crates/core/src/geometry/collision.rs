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

//! Convex-part collision queries (GJK distance) for posed meshes.

use serde::{Deserialize, Serialize};

use super::mesh::{Aabb, TriMesh};
use super::transform::{Transform, Vec3};

/// Distances at or below this count as contact even with a zero margin.
pub const CONTACT_EPS: f64 = 1e-9;

/// A body made of convex parts, expressed in its own frame.
///
/// Convex meshes become a single part. Non-convex meshes are split into one part
/// per triangle and keep the source mesh for point-containment tests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionBody {
    parts: Vec<Vec<Vec3>>,
    solid: Option<TriMesh>,
}

impl CollisionBody {
    pub fn convex(points: Vec<Vec3>) -> Self {
        CollisionBody {
            parts: vec![points],
            solid: None,
        }
    }

    pub fn from_convex_parts(parts: Vec<Vec<Vec3>>) -> Self {
        CollisionBody { parts, solid: None }
    }

    pub fn from_convex_meshes(meshes: &[TriMesh]) -> Self {
        Self::from_convex_parts(meshes.iter().map(|m| m.vertices().to_vec()).collect())
    }

    pub fn from_mesh(mesh: &TriMesh) -> Self {
        if mesh.is_convex(1e-9) {
            return Self::convex(mesh.vertices().to_vec());
        }
        let parts = (0..mesh.faces().len()).map(|f| mesh.triangle(f).to_vec()).collect();
        CollisionBody {
            parts,
            solid: Some(mesh.clone()),
        }
    }

    pub fn parts(&self) -> &[Vec<Vec3>] {
        &self.parts
    }

    pub fn posed(&self, pose: &Transform) -> PosedBody {
        let parts: Vec<PosedPart> = self
            .parts
            .iter()
            .map(|p| {
                let pts: Vec<Vec3> = p.iter().map(|v| pose.apply_point(v)).collect();
                let aabb = Aabb::from_points(&pts);
                PosedPart { points: pts, aabb }
            })
            .collect();
        let aabb = parts.iter().fold(Aabb::empty(), |mut b, p| {
            b.grow(&p.aabb.min);
            b.grow(&p.aabb.max);
            b
        });
        PosedBody {
            parts,
            aabb,
            solid: self.solid.as_ref().map(|m| m.transformed(pose)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PosedPart {
    pub points: Vec<Vec3>,
    pub aabb: Aabb,
}

/// A [`CollisionBody`] placed in the world.
#[derive(Clone, Debug)]
pub struct PosedBody {
    parts: Vec<PosedPart>,
    aabb: Aabb,
    solid: Option<TriMesh>,
}

impl PosedBody {
    pub fn aabb(&self) -> &Aabb {
        &self.aabb
    }

    pub fn parts(&self) -> &[PosedPart] {
        &self.parts
    }

    /// True iff the minimum distance to `other` is below `margin` (or the bodies overlap).
    pub fn collides(&self, other: &PosedBody, margin: f64) -> bool {
        let threshold = margin.max(CONTACT_EPS);
        if !self.aabb.overlaps(&other.aabb, threshold) {
            return false;
        }
        for a in &self.parts {
            if !a.aabb.overlaps(&other.aabb, threshold) {
                continue;
            }
            for b in &other.parts {
                if a.aabb.overlaps(&b.aabb, threshold) && gjk_distance(&a.points, &b.points) < threshold {
                    return true;
                }
            }
        }
        // A body may sit entirely inside a non-convex solid without touching its surface.
        if let Some(solid) = &other.solid {
            if self.parts.iter().any(|p| solid.contains_point(&p.points[0])) {
                return true;
            }
        }
        if let Some(solid) = &self.solid {
            if other.parts.iter().any(|p| solid.contains_point(&p.points[0])) {
                return true;
            }
        }
        false
    }

    /// Minimum distance between the two bodies (zero when they overlap).
    pub fn distance(&self, other: &PosedBody) -> f64 {
        if self.collides(other, 0.0) {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for a in &self.parts {
            for b in &other.parts {
                best = best.min(gjk_distance(&a.points, &b.points));
            }
        }
        best
    }
}

/// True iff the posed meshes are closer than `margin` (overlap always counts).
pub fn collide(mesh_a: &TriMesh, pose_a: &Transform, mesh_b: &TriMesh, pose_b: &Transform, margin: f64) -> bool {
    let a = CollisionBody::from_mesh(mesh_a).posed(pose_a);
    let b = CollisionBody::from_mesh(mesh_b).posed(pose_b);
    a.collides(&b, margin)
}

fn support(points: &[Vec3], d: &Vec3) -> Vec3 {
    let mut best = points[0];
    let mut best_dot = best.dot(d);
    for p in &points[1..] {
        let v = p.dot(d);
        if v > best_dot {
            best_dot = v;
            best = *p;
        }
    }
    best
}

/// Euclidean distance between the convex hulls of two point sets; zero on overlap.
pub fn gjk_distance(a: &[Vec3], b: &[Vec3]) -> f64 {
    let minkowski = |d: &Vec3| support(a, d) - support(b, &(-d));
    let ca = a.iter().sum::<Vec3>() / a.len() as f64;
    let cb = b.iter().sum::<Vec3>() / b.len() as f64;
    let mut d = ca - cb;
    if d.norm_squared() < 1e-30 {
        d = Vec3::x();
    }
    let mut simplex: Vec<Vec3> = vec![minkowski(&(-d))];
    let mut v = simplex[0];
    let mut best = v.norm();
    for _ in 0..128 {
        let vv = v.norm_squared();
        if vv < 1e-28 {
            return 0.0;
        }
        let w = minkowski(&(-v));
        // No further progress toward the origin: v is the closest point.
        if vv - v.dot(&w) <= 1e-12 * vv.max(1e-20) || simplex.iter().any(|s| (s - w).norm_squared() < 1e-28) {
            return vv.sqrt();
        }
        simplex.push(w);
        let (closest, kept) = closest_on_simplex(&simplex);
        simplex = kept;
        if simplex.len() == 4 {
            return 0.0;
        }
        let n = closest.norm();
        if n >= best - 1e-15 {
            // Numerical stall.
            return best.min(n);
        }
        best = n;
        v = closest;
    }
    best
}

/// Closest point of a simplex (1-4 points) to the origin and the minimal sub-simplex supporting it.
fn closest_on_simplex(s: &[Vec3]) -> (Vec3, Vec<Vec3>) {
    match s.len() {
        1 => (s[0], s.to_vec()),
        2 => closest_on_segment(s[0], s[1]),
        3 => closest_on_triangle(s[0], s[1], s[2]),
        4 => closest_on_tetrahedron(s[0], s[1], s[2], s[3]),
        _ => unreachable!("simplex has at most 4 points"),
    }
}

fn closest_on_segment(a: Vec3, b: Vec3) -> (Vec3, Vec<Vec3>) {
    let ab = b - a;
    let denom = ab.norm_squared();
    if denom < 1e-30 {
        return (a, vec![a]);
    }
    let t = (-a).dot(&ab) / denom;
    if t <= 0.0 {
        (a, vec![a])
    } else if t >= 1.0 {
        (b, vec![b])
    } else {
        (a + ab * t, vec![a, b])
    }
}

// Voronoi-region walk after Ericson, "Real-Time Collision Detection", 5.1.5.
fn closest_on_triangle(a: Vec3, b: Vec3, c: Vec3) -> (Vec3, Vec<Vec3>) {
    let p = Vec3::zeros();
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (a, vec![a]);
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (b, vec![b]);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, vec![a, b]);
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (c, vec![c]);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, vec![a, c]);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, vec![b, c]);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, vec![a, b, c])
}

fn closest_on_tetrahedron(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> (Vec3, Vec<Vec3>) {
    // Origin outside the plane of (p, q, r) relative to the opposite vertex s?
    let outside = |p: Vec3, q: Vec3, r: Vec3, s: Vec3| {
        let n = (q - p).cross(&(r - p));
        let sign_o = (-p).dot(&n);
        let sign_s = (s - p).dot(&n);
        sign_o * sign_s < 0.0
    };
    // A flat tetrahedron encloses nothing, so every face is a candidate.
    let volume = (b - a).cross(&(c - a)).dot(&(d - a)).abs();
    let scale = [b - a, c - a, d - a].iter().map(|e| e.norm()).fold(0.0, f64::max);
    let flat = volume <= 1e-12 * scale.powi(3);
    let mut best: Option<(Vec3, Vec<Vec3>)> = None;
    let faces = [(a, b, c, d), (a, c, d, b), (a, d, b, c), (b, d, c, a)];
    for (p, q, r, s) in faces {
        if flat || outside(p, q, r, s) {
            let cand = closest_on_triangle(p, q, r);
            if best.as_ref().map_or(true, |(bp, _)| cand.0.norm_squared() < bp.norm_squared()) {
                best = Some(cand);
            }
        }
    }
    best.unwrap_or((Vec3::zeros(), vec![a, b, c, d]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cube() -> TriMesh {
        TriMesh::cuboid(Vec3::zeros(), Vec3::repeat(1.0))
    }

    #[test]
    fn separated_cubes() {
        let c = unit_cube();
        let far = Transform::from_translation(Vec3::new(3.0, 0.0, 0.0));
        assert!(!collide(&c, &Transform::identity(), &c, &far, 0.0));
    }

    #[test]
    fn overlapping_cubes() {
        let c = unit_cube();
        let near = Transform::from_translation(Vec3::new(0.5, 0.0, 0.0));
        assert!(collide(&c, &Transform::identity(), &c, &near, 0.0));
    }

    #[test]
    fn touching_cubes_within_margin() {
        let c = unit_cube();
        let touch = Transform::from_translation(Vec3::new(1.0, 0.0, 0.0));
        assert!(collide(&c, &Transform::identity(), &c, &touch, 1e-3));
        let gap = Transform::from_translation(Vec3::new(1.002, 0.0, 0.0));
        assert!(!collide(&c, &Transform::identity(), &c, &gap, 1e-3));
    }

    #[test]
    fn gjk_distance_of_offset_boxes() {
        let a = unit_cube();
        let pose = Transform::from_translation(Vec3::new(2.0, 2.0, 0.0));
        let b = CollisionBody::from_mesh(&a).posed(&pose);
        let a = CollisionBody::from_mesh(&a).posed(&Transform::identity());
        // Closest features are the parallel z edges at (0.5,0.5) and (1.5,1.5).
        assert!((a.distance(&b) - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn flat_simplex_does_not_report_overlap() {
        // Coplanar tetrahedron beside the origin.
        let (p, _) = closest_on_tetrahedron(
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(1.0, 0.0, 1.0),
            Vec3::new(1.0, 1.0, 1.0),
        );
        assert!((p.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_box_inside_concave_solid() {
        // A hollow-free L-shaped solid fully containing a small cube.
        let l = TriMesh::from_voxels(&[[0, 0, 0], [1, 0, 0], [0, 1, 0]], 1.0, None).unwrap();
        assert!(!l.is_convex(1e-9));
        let small = TriMesh::cuboid(Vec3::zeros(), Vec3::repeat(0.1));
        let inside = Transform::from_translation(Vec3::new(0.5, 0.5, 0.5));
        assert!(collide(&small, &inside, &l, &Transform::identity(), 0.0));
        let outside = Transform::from_translation(Vec3::new(1.5, 1.5, 0.5));
        assert!(!collide(&small, &outside, &l, &Transform::identity(), 0.0));
    }
}
