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

//! Triangle meshes.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::transform::{Transform, Vec3};
use super::GeometryError;

/// Faces with an area below this are dropped at load time.
const DEGENERATE_AREA: f64 = 1e-14;

/// Vertices closer than this are welded together at load time.
const WELD_DISTANCE: f64 = 1e-9;

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Aabb::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn overlaps(&self, other: &Aabb, margin: f64) -> bool {
        (0..3).all(|i| self.min[i] - margin <= other.max[i] && other.min[i] - margin <= self.max[i])
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] - tol && p[i] <= self.max[i] + tol)
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }
}

/// A triangle mesh with a center of mass, in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    com: Vec3,
}

impl TriMesh {
    /// Validates and cleans a raw mesh.
    ///
    /// Duplicate vertices are welded, degenerate faces dropped and unused vertices
    /// removed. With `com == None` the volumetric centroid is used (vertex mean for
    /// open or zero-volume meshes).
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>, com: Option<Vec3>) -> Result<Self, GeometryError> {
        if vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(GeometryError::NonFinite);
        }
        for (i, f) in faces.iter().enumerate() {
            if f.iter().any(|&ix| ix >= vertices.len()) {
                return Err(GeometryError::IndexOutOfRange { face: i });
            }
        }
        let (vertices, faces) = clean(vertices, faces);
        if faces.is_empty() {
            return Err(GeometryError::DegenerateGeometry("mesh has no non-degenerate faces".into()));
        }
        let com = match com {
            Some(c) => {
                if !c.iter().all(|x| x.is_finite()) {
                    return Err(GeometryError::NonFinite);
                }
                c
            }
            None => volume_centroid(&vertices, &faces)
                .unwrap_or_else(|| vertices.iter().sum::<Vec3>() / vertices.len() as f64),
        };
        let mesh = TriMesh { vertices, faces, com };
        if !mesh.aabb().contains(&mesh.com, 1e-9) {
            return Err(GeometryError::ComOutsideBounds);
        }
        Ok(mesh)
    }

    /// Axis-aligned box centered at `center` with full side lengths `size`.
    pub fn cuboid(center: Vec3, size: Vec3) -> Self {
        let h = size * 0.5;
        let mut vertices = Vec::with_capacity(8);
        for i in 0..8 {
            let sx = if i & 1 == 0 { -h.x } else { h.x };
            let sy = if i & 2 == 0 { -h.y } else { h.y };
            let sz = if i & 4 == 0 { -h.z } else { h.z };
            vertices.push(center + Vec3::new(sx, sy, sz));
        }
        // Outward-wound quads, split into two triangles each.
        let quads = [
            [0, 2, 3, 1], // -z
            [4, 5, 7, 6], // +z
            [0, 1, 5, 4], // -y
            [2, 6, 7, 3], // +y
            [0, 4, 6, 2], // -x
            [1, 3, 7, 5], // +x
        ];
        let faces = quads
            .iter()
            .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
            .collect();
        TriMesh::new(vertices, faces, Some(center)).expect("cuboid is well formed")
    }

    /// Axis-aligned box spanning `min..max`.
    pub fn aabb_box(min: Vec3, max: Vec3) -> Self {
        Self::cuboid((min + max) * 0.5, max - min)
    }

    /// Closed surface of a union of unit voxels scaled by `pitch`.
    ///
    /// Only faces between a filled and an empty cell are emitted, so the result has
    /// no internal faces.
    pub fn from_voxels(cells: &[[i32; 3]], pitch: f64, com: Option<Vec3>) -> Result<Self, GeometryError> {
        use std::collections::BTreeSet;
        let filled: BTreeSet<[i32; 3]> = cells.iter().copied().collect();
        let mut vertex_ids: HashMap<[i32; 3], usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        let mut vid = |c: [i32; 3], vertices: &mut Vec<Vec3>| -> usize {
            *vertex_ids.entry(c).or_insert_with(|| {
                vertices.push(Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64) * pitch);
                vertices.len() - 1
            })
        };
        for c in &filled {
            for axis in 0..3 {
                for dir in [-1i32, 1] {
                    let mut n = *c;
                    n[axis] += dir;
                    if filled.contains(&n) {
                        continue;
                    }
                    let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
                    let mut base = *c;
                    if dir > 0 {
                        base[axis] += 1;
                    }
                    let corner = |du: i32, dv: i32| {
                        let mut p = base;
                        p[u] += du;
                        p[v] += dv;
                        p
                    };
                    let q = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
                    let ids: Vec<usize> = q.iter().map(|p| vid(*p, &mut vertices)).collect();
                    // (u, v, axis) is right handed, so CCW in uv faces +axis.
                    if dir > 0 {
                        faces.push([ids[0], ids[1], ids[2]]);
                        faces.push([ids[0], ids[2], ids[3]]);
                    } else {
                        faces.push([ids[0], ids[2], ids[1]]);
                        faces.push([ids[0], ids[3], ids[2]]);
                    }
                }
            }
        }
        TriMesh::new(vertices, faces, com)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn com(&self) -> Vec3 {
        self.com
    }

    pub fn with_com(mut self, com: Vec3) -> Result<Self, GeometryError> {
        if !self.aabb().contains(&com, 1e-9) {
            return Err(GeometryError::ComOutsideBounds);
        }
        self.com = com;
        Ok(self)
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let f = self.faces[face];
        [self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]]
    }

    /// Outward unit normal of `face` (right-hand rule on its winding).
    pub fn face_normal(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.triangle(face);
        (b - a).cross(&(c - a)).normalize()
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.triangle(face);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    /// Signed enclosed volume; positive for outward-wound closed meshes.
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| self.vertices[f[0]].dot(&self.vertices[f[1]].cross(&self.vertices[f[2]])) / 6.0)
            .sum()
    }

    pub fn transformed(&self, t: &Transform) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|v| t.apply_point(v)).collect(),
            faces: self.faces.clone(),
            com: t.apply_point(&self.com),
        }
    }

    /// Concatenates several meshes; the center of mass is the vertex mean of the parts' coms.
    pub fn merged(parts: &[TriMesh]) -> TriMesh {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for p in parts {
            let off = vertices.len();
            vertices.extend_from_slice(&p.vertices);
            faces.extend(p.faces.iter().map(|f| [f[0] + off, f[1] + off, f[2] + off]));
        }
        let com = parts.iter().map(|p| p.com).sum::<Vec3>() / parts.len().max(1) as f64;
        TriMesh { vertices, faces, com }
    }

    /// True when every vertex lies on or below every face plane (within `tol`).
    pub fn is_convex(&self, tol: f64) -> bool {
        (0..self.faces.len()).all(|f| {
            let n = self.face_normal(f);
            let d = n.dot(&self.vertices[self.faces[f][0]]);
            self.vertices.iter().all(|v| n.dot(v) - d <= tol)
        })
    }

    /// Nearest intersection of the ray `origin + t * dir` (t > `t_min`) with the mesh.
    pub fn raycast(&self, origin: &Vec3, dir: &Vec3, t_min: f64) -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for face in 0..self.faces.len() {
            let [a, b, c] = self.triangle(face);
            if let Some(t) = ray_triangle(origin, dir, &a, &b, &c) {
                if t > t_min && best.map_or(true, |(bt, _)| t < bt) {
                    best = Some((t, face));
                }
            }
        }
        best
    }

    /// Point containment by ray parity; meaningful for closed meshes only.
    pub fn contains_point(&self, p: &Vec3) -> bool {
        // An irrational-ish direction avoids grazing edges of axis-aligned meshes.
        let dir = Vec3::new(0.5773502691896258, 0.5773502691896257, 0.5773502691896259)
            + Vec3::new(0.0131, -0.0071, 0.0029);
        let dir = dir.normalize();
        let mut hits = 0;
        for face in 0..self.faces.len() {
            let [a, b, c] = self.triangle(face);
            if let Some(t) = ray_triangle(p, &dir, &a, &b, &c) {
                if t > 0.0 {
                    hits += 1;
                }
            }
        }
        hits % 2 == 1
    }
}

/// Moller-Trumbore ray/triangle intersection; returns the ray parameter.
pub fn ray_triangle(origin: &Vec3, dir: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - a;
    let u = s.dot(&p) * inv;
    if !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < -1e-12 || u + v > 1.0 + 1e-12 {
        return None;
    }
    Some(e2.dot(&q) * inv)
}

fn clean(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    // Weld on a quantized grid; neighbours across a cell boundary are caught by the
    // exact-distance check against the cell's first occupant.
    let key = |v: &Vec3| {
        [
            (v.x / WELD_DISTANCE).round() as i64,
            (v.y / WELD_DISTANCE).round() as i64,
            (v.z / WELD_DISTANCE).round() as i64,
        ]
    };
    let mut remap = vec![0usize; vertices.len()];
    let mut seen: HashMap<[i64; 3], usize> = HashMap::new();
    let mut welded: Vec<Vec3> = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        let k = key(v);
        match seen.get(&k) {
            Some(&j) if (welded[j] - v).norm() <= WELD_DISTANCE => remap[i] = j,
            _ => {
                seen.insert(k, welded.len());
                remap[i] = welded.len();
                welded.push(*v);
            }
        }
    }
    let mut kept = Vec::with_capacity(faces.len());
    for f in faces {
        let g = [remap[f[0]], remap[f[1]], remap[f[2]]];
        if g[0] == g[1] || g[1] == g[2] || g[0] == g[2] {
            continue;
        }
        let area = 0.5 * (welded[g[1]] - welded[g[0]]).cross(&(welded[g[2]] - welded[g[0]])).norm();
        if area > DEGENERATE_AREA {
            kept.push(g);
        }
    }
    // Drop vertices no face references, keeping first-use order stable.
    let mut used = vec![usize::MAX; welded.len()];
    let mut out_vertices = Vec::new();
    for f in &mut kept {
        for ix in f.iter_mut() {
            if used[*ix] == usize::MAX {
                used[*ix] = out_vertices.len();
                out_vertices.push(welded[*ix]);
            }
            *ix = used[*ix];
        }
    }
    (out_vertices, kept)
}

fn volume_centroid(vertices: &[Vec3], faces: &[[usize; 3]]) -> Option<Vec3> {
    let mut volume = 0.0;
    let mut moment = Vec3::zeros();
    for f in faces {
        let (a, b, c) = (vertices[f[0]], vertices[f[1]], vertices[f[2]]);
        let v = a.dot(&b.cross(&c)) / 6.0;
        volume += v;
        moment += (a + b + c) * (v / 4.0);
    }
    let scale = Aabb::from_points(vertices).extent().max();
    if volume.abs() <= 1e-12 * scale.powi(3) {
        return None;
    }
    Some(moment / volume)
}
