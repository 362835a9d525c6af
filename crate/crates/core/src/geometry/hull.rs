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

//! 3D convex hulls with coplanar facets merged into polygons.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::mesh::TriMesh;
use super::transform::Vec3;
use super::GeometryError;

/// Maximum angle between two triangle normals for them to share a facet.
pub const COPLANAR_ANGLE_TOL: f64 = 1e-6;

/// One planar facet of a hull.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullFacet {
    /// Outward unit normal.
    pub normal: Vec3,
    /// Plane offset: `normal . x == offset` on the facet.
    pub offset: f64,
    /// Support polygon, counter-clockwise seen from outside.
    pub polygon: Vec<Vec3>,
}

impl HullFacet {
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    /// Orthonormal in-plane basis `(u, v)` with `u x v == normal`.
    pub fn basis(&self) -> (Vec3, Vec3) {
        plane_basis(&self.normal)
    }

    pub fn area(&self) -> f64 {
        let n = self.polygon.len();
        (0..n)
            .map(|i| self.polygon[i].cross(&self.polygon[(i + 1) % n]))
            .sum::<Vec3>()
            .dot(&self.normal)
            * 0.5
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexHull {
    pub facets: Vec<HullFacet>,
    /// Source vertices the hull was computed from.
    pub points: Vec<Vec3>,
}

impl ConvexHull {
    /// Largest signed distance of any source point above any facet plane.
    pub fn max_violation(&self) -> f64 {
        self.facets
            .iter()
            .flat_map(|f| self.points.iter().map(move |p| f.signed_distance(p)))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Hull vertices (the union of facet polygon corners), deduplicated.
    pub fn vertices(&self) -> Vec<Vec3> {
        let mut out: Vec<Vec3> = Vec::new();
        for f in &self.facets {
            for p in &f.polygon {
                if !out.iter().any(|q| (q - p).norm() < 1e-12) {
                    out.push(*p);
                }
            }
        }
        out
    }
}

pub fn plane_basis(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.6 { Vec3::x() } else if n.y.abs() < 0.6 { Vec3::y() } else { Vec3::z() };
    let u = (helper - n * n.dot(&helper)).normalize();
    let v = n.cross(&u);
    (u, v)
}

/// Convex hull of the mesh vertices.
pub fn convex_hull(mesh: &TriMesh) -> Result<ConvexHull, GeometryError> {
    convex_hull_of_points(mesh.vertices())
}

pub fn convex_hull_of_points(points: &[Vec3]) -> Result<ConvexHull, GeometryError> {
    if points.len() < 4 {
        return Err(GeometryError::DegenerateGeometry("fewer than 4 points".into()));
    }
    let scale = super::mesh::Aabb::from_points(points).extent().max().max(1e-300);
    let eps = 1e-10 * scale;
    let triangles = incremental_hull(points, eps)?;
    let facets = merge_coplanar(points, &triangles, eps);
    Ok(ConvexHull {
        facets,
        points: points.to_vec(),
    })
}

struct Face {
    v: [usize; 3],
    normal: Vec3,
    offset: f64,
    alive: bool,
}

impl Face {
    fn new(points: &[Vec3], v: [usize; 3]) -> Face {
        let (a, b, c) = (points[v[0]], points[v[1]], points[v[2]]);
        let normal = (b - a).cross(&(c - a)).normalize();
        Face {
            v,
            normal,
            offset: normal.dot(&a),
            alive: true,
        }
    }

    fn distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

fn incremental_hull(points: &[Vec3], eps: f64) -> Result<Vec<[usize; 3]>, GeometryError> {
    let degenerate = || GeometryError::DegenerateGeometry("all points are coplanar".into());
    // Initial simplex from extreme points.
    let i0 = (0..points.len())
        .min_by(|&a, &b| points[a].x.total_cmp(&points[b].x))
        .unwrap();
    let far = |from: &dyn Fn(&Vec3) -> f64| {
        (0..points.len())
            .max_by(|&a, &b| from(&points[a]).total_cmp(&from(&points[b])))
            .unwrap()
    };
    let p0 = points[i0];
    let i1 = far(&|p| (p - p0).norm());
    let p1 = points[i1];
    let dir = (p1 - p0).normalize();
    if (p1 - p0).norm() <= eps {
        return Err(degenerate());
    }
    let i2 = far(&|p| (p - p0 - dir * dir.dot(&(p - p0))).norm());
    let p2 = points[i2];
    if (p2 - p0 - dir * dir.dot(&(p2 - p0))).norm() <= eps {
        return Err(degenerate());
    }
    let n = (p1 - p0).cross(&(p2 - p0)).normalize();
    let i3 = far(&|p| n.dot(&(p - p0)).abs());
    if n.dot(&(points[i3] - p0)).abs() <= eps * 10.0 {
        return Err(degenerate());
    }

    let mut faces: Vec<Face> = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let centroid = (points[i0] + points[i1] + points[i2] + points[i3]) / 4.0;
    let add_face = |faces: &mut Vec<Face>, edges: &mut HashMap<(usize, usize), usize>, mut v: [usize; 3]| {
        let mut f = Face::new(points, v);
        if f.distance(&centroid) > 0.0 {
            v.swap(1, 2);
            f = Face::new(points, v);
        }
        let id = faces.len();
        for k in 0..3 {
            edges.insert((v[k], v[(k + 1) % 3]), id);
        }
        faces.push(f);
    };
    add_face(&mut faces, &mut edges, [i0, i1, i2]);
    add_face(&mut faces, &mut edges, [i0, i1, i3]);
    add_face(&mut faces, &mut edges, [i0, i2, i3]);
    add_face(&mut faces, &mut edges, [i1, i2, i3]);

    for (pi, p) in points.iter().enumerate() {
        if [i0, i1, i2, i3].contains(&pi) {
            continue;
        }
        let visible: Vec<usize> = (0..faces.len())
            .filter(|&f| faces[f].alive && faces[f].distance(p) > eps)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut horizon = Vec::new();
        for &f in &visible {
            let v = faces[f].v;
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                let twin = edges.get(&(b, a)).copied();
                let twin_visible = twin.map_or(false, |t| visible.contains(&t));
                if !twin_visible {
                    horizon.push((a, b));
                }
            }
        }
        for &f in &visible {
            faces[f].alive = false;
            let v = faces[f].v;
            for k in 0..3 {
                let key = (v[k], v[(k + 1) % 3]);
                if edges.get(&key) == Some(&f) {
                    edges.remove(&key);
                }
            }
        }
        for (a, b) in horizon {
            let id = faces.len();
            let f = Face::new(points, [a, b, pi]);
            edges.insert((a, b), id);
            edges.insert((b, pi), id);
            edges.insert((pi, a), id);
            faces.push(f);
        }
    }
    Ok(faces.into_iter().filter(|f| f.alive).map(|f| f.v).collect())
}

fn merge_coplanar(points: &[Vec3], triangles: &[[usize; 3]], eps: f64) -> Vec<HullFacet> {
    struct Group {
        normal: Vec3,
        weight: f64,
        members: Vec<usize>,
    }
    let mut groups: Vec<Group> = Vec::new();
    for (ti, t) in triangles.iter().enumerate() {
        let (a, b, c) = (points[t[0]], points[t[1]], points[t[2]]);
        let cross = (b - a).cross(&(c - a));
        let area = cross.norm();
        let n = cross / area;
        let d = n.dot(&a);
        let found = groups.iter_mut().find(|g| {
            let gn = g.normal.normalize();
            gn.dot(&n).clamp(-1.0, 1.0).acos() <= COPLANAR_ANGLE_TOL && (gn.dot(&a) - d).abs() <= eps * 10.0
        });
        match found {
            Some(g) => {
                g.normal += n * area;
                g.weight += area;
                g.members.push(ti);
            }
            None => groups.push(Group {
                normal: n * area,
                weight: area,
                members: vec![ti],
            }),
        }
    }
    let mut facets = Vec::with_capacity(groups.len());
    for g in groups {
        let _ = g.weight;
        let normal = g.normal.normalize();
        let offset = points.iter().map(|p| normal.dot(p)).fold(f64::NEG_INFINITY, f64::max);
        let on_plane: Vec<Vec3> = points
            .iter()
            .filter(|p| (normal.dot(p) - offset).abs() <= eps * 100.0)
            .copied()
            .collect();
        let polygon = planar_hull(&on_plane, &normal);
        facets.push(HullFacet { normal, offset, polygon });
    }
    facets
}

/// Counter-clockwise (about `normal`) convex hull of points lying in a plane.
pub fn planar_hull(points: &[Vec3], normal: &Vec3) -> Vec<Vec3> {
    let (u, v) = plane_basis(normal);
    let mut pts: Vec<(f64, f64, Vec3)> = points.iter().map(|p| (p.dot(&u), p.dot(&v), *p)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    if pts.len() < 3 {
        return pts.into_iter().map(|p| p.2).collect();
    }
    let cross = |o: &(f64, f64, Vec3), a: &(f64, f64, Vec3), b: &(f64, f64, Vec3)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64, Vec3)> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 1e-14 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<(f64, f64, Vec3)> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 1e-14 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower.into_iter().map(|p| p.2).collect()
}
