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


use std::f64::consts::PI;

use proptest::prelude::*;
use regrasp::fixtures::{default_gripper, pipe_mesh};
use regrasp::geometry::{CollisionBody, Transform, TriMesh, Vec3};
use regrasp::grasp::{antipodal_contact_pairs, is_force_closure, synthesize_grasps, GraspParams, CLUSTER_RADIUS};

fn basis(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = (helper - n * n.dot(&helper)).normalize();
    (u, n.cross(&u))
}

fn area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1])
        .sum::<f64>()
        / 2.0
}

/// Sutherland-Hodgman clip of `subject` by the convex counter-clockwise `clip`.
fn clip(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let side = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let input = std::mem::take(&mut out);
        for k in 0..input.len() {
            let (p, q) = (input[k], input[(k + 1) % input.len()]);
            let (sp, sq) = (side(p), side(q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push([p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t]);
            }
        }
        if out.is_empty() {
            break;
        }
    }
    out
}

fn ccw(mut p: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    if area(&p) < 0.0 {
        p.reverse();
    }
    p
}

/// Overlap, seen along the normal of face `i`, of two antiparallel faces
/// whose separation fits the jaw stroke and whose connecting segment stays
/// inside the object. Returned in face `i`'s plane coordinates.
struct FacePair {
    face_a: usize,
    normal: Vec3,
    region: Vec<[f64; 2]>,
    offset: f64,
}

fn exhaustive_face_pairs(mesh: &TriMesh, min_w: f64, max_w: f64) -> Vec<FacePair> {
    let mut out = Vec::new();
    let nf = mesh.faces().len();
    for i in 0..nf {
        let ni = mesh.face_normal(i);
        let (u, v) = basis(&ni);
        let ti = mesh.triangle(i);
        let proj = |t: &[Vec3; 3]| ccw(t.iter().map(|p| [u.dot(p), v.dot(p)]).collect());
        for j in 0..nf {
            let nj = mesh.face_normal(j);
            if ni.dot(&nj) > -1.0 + 1e-9 {
                continue;
            }
            let tj = mesh.triangle(j);
            let w = ni.dot(&(ti[0] - tj[0]));
            if w < min_w || w > max_w || w <= 1e-9 {
                continue;
            }
            let region = clip(&proj(&ti), &proj(&tj));
            if region.len() < 3 || area(&region) < 1e-6 {
                continue;
            }
            let c = region.iter().fold([0.0, 0.0], |s, p| [s[0] + p[0], s[1] + p[1]]);
            let c = [c[0] / region.len() as f64, c[1] / region.len() as f64];
            let on_i = u * c[0] + v * c[1] + ni * ni.dot(&ti[0]);
            let mid = on_i - ni * (w / 2.0);
            // The first surface hit along the inward normal must be face j's plane.
            let blocked = (1..20).any(|k| !mesh.contains_point(&(on_i - ni * (w * k as f64 / 20.0))));
            if !mesh.contains_point(&mid) || blocked {
                continue;
            }
            out.push(FacePair {
                face_a: i,
                normal: ni,
                region,
                offset: ni.dot(&ti[0]),
            });
        }
    }
    out
}

fn point_polygon_distance(p: [f64; 2], poly: &[[f64; 2]]) -> f64 {
    let inside = (0..poly.len()).all(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= -1e-12
    });
    if inside {
        return 0.0;
    }
    (0..poly.len())
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            let e = [b[0] - a[0], b[1] - a[1]];
            let t = (((p[0] - a[0]) * e[0] + (p[1] - a[1]) * e[1]) / (e[0] * e[0] + e[1] * e[1])).clamp(0.0, 1.0);
            ((p[0] - a[0] - t * e[0]).powi(2) + (p[1] - a[1] - t * e[1]).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn contact_pairs_agree_with_exhaustive_face_pair_scan_on_the_pipe() {
    let mesh = pipe_mesh();
    let gripper = default_gripper();
    let params = GraspParams {
        density: 100_000.0,
        ..GraspParams::default()
    };
    let oracle = exhaustive_face_pairs(&mesh, gripper.min_jawwidth, gripper.max_jawwidth);
    assert!(!oracle.is_empty());
    let pairs = antipodal_contact_pairs(&mesh, &gripper, &params);
    // Soundness: every pair sits on an antipodal face pair of the oracle.
    for p in &pairs {
        let ok = oracle.iter().any(|f| {
            let (u, v) = basis(&f.normal);
            (f.normal - p.normal_a).norm() < 1e-9
                && (f.normal.dot(&p.contact_a) - f.offset).abs() < 1e-9
                && point_polygon_distance([u.dot(&p.contact_a), v.dot(&p.contact_a)], &f.region) < 1e-9
        });
        assert!(ok, "pair at {:?} is not on an oracle face pair", p.contact_a);
        assert!(is_force_closure(&p.contact_a, &p.normal_a, &p.contact_b, &p.normal_b, params.friction_mu));
    }
    // Completeness: each oracle region holds a pair, or a pair that absorbed
    // its samples during clustering.
    for f in &oracle {
        let (u, v) = basis(&f.normal);
        let near = pairs.iter().any(|p| {
            p.face_a == f.face_a || {
                let d = point_polygon_distance([u.dot(&p.contact_a), v.dot(&p.contact_a)], &f.region);
                (f.normal - p.normal_a).norm() < 1e-9 && (f.normal.dot(&p.contact_a) - f.offset).abs() < 1e-9 && d <= CLUSTER_RADIUS
            }
        });
        assert!(near, "face {} has an antipodal partner but no contact pair", f.face_a);
    }
}

#[test]
fn grasps_are_force_closure_and_collision_free() {
    let mesh = pipe_mesh();
    let gripper = default_gripper();
    let params = GraspParams::default();
    let grasps = synthesize_grasps(&mesh, &gripper, &params).unwrap();
    assert!(!grasps.is_empty());
    let object = CollisionBody::from_mesh(&mesh).posed(&Transform::identity());
    for g in &grasps {
        let t = &g.object_to_gripper;
        assert!(t.orthonormality_error() < 1e-9);
        let y = t.rotation.column(1).into_owned();
        let axis = (g.contact_b - g.contact_a).normalize();
        assert!((y - axis).norm() < 1e-9, "closing axis is the gripper y axis");
        assert!((t.translation - (g.contact_a + g.contact_b) / 2.0).norm() < 1e-12);
        assert!((g.jawwidth - (g.contact_b - g.contact_a).norm()).abs() < 1e-12);
        assert!(g.jawwidth <= gripper.max_jawwidth && g.jawwidth >= gripper.min_jawwidth);
        assert!(is_force_closure(&g.contact_a, &g.normal_a, &g.contact_b, &g.normal_b, params.friction_mu));
        assert!(!gripper.body(g.jawwidth).posed(t).collides(&object, 0.0));
    }
    for (i, a) in grasps.iter().enumerate() {
        for b in &grasps[i + 1..] {
            assert!(!a.object_to_gripper.approx_eq(&b.object_to_gripper, 1e-9, 1e-9));
        }
    }
}

#[test]
fn same_seed_gives_identical_grasps() {
    let mesh = pipe_mesh();
    let g = default_gripper();
    let a = synthesize_grasps(&mesh, &g, &GraspParams::default()).unwrap();
    let b = synthesize_grasps(&mesh, &g, &GraspParams::default()).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Grasps are attached to the object: synthesizing on a moved mesh gives
    /// the moved grasps.
    #[test]
    fn grasps_move_with_the_object(r in prop::array::uniform3(-PI..PI), p in prop::array::uniform3(-0.5f64..0.5)) {
        let t = Transform::from_euler(&Vec3::from(p), &Vec3::from(r));
        let mesh = pipe_mesh();
        let g = default_gripper();
        let params = GraspParams::default();
        let base = synthesize_grasps(&mesh, &g, &params).unwrap();
        let moved = synthesize_grasps(&mesh.transformed(&t), &g, &params).unwrap();
        prop_assert_eq!(base.len(), moved.len());
        for (a, b) in base.iter().zip(&moved) {
            prop_assert!(t.compose(&a.object_to_gripper).approx_eq(&b.object_to_gripper, 1e-9, 1e-9));
            prop_assert!((a.jawwidth - b.jawwidth).abs() < 1e-9);
        }
    }
}
