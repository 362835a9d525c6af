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


//! Handover poses: a 3D lattice of positions times icosphere directions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{rotation_between, Transform, Vec3};
use crate::scene::HandoverSpec;

/// An airborne object pose where the arms may exchange the object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandoverPose {
    pub pose_id: usize,
    pub position: Vec3,
    /// Unit icosphere vertex the object z axis is aligned with.
    pub direction: Vec3,
    /// Object frame in the world.
    pub world: Transform,
}

/// Vertices of the icosahedron subdivided `level` times, projected to the unit sphere.
pub fn icosphere(level: usize) -> Vec<Vec3> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[k] = *midpoints.entry(key).or_insert_with(|| {
                    verts.push(((verts[a] + verts[b]) / 2.0).normalize());
                    verts.len() - 1
                });
            }
            next.push([f[0], mid[0], mid[2]]);
            next.push([f[1], mid[1], mid[0]]);
            next.push([f[2], mid[2], mid[1]]);
            next.push(mid);
        }
        faces = next;
    }
    verts
}

/// Lattice cell centers of the box times icosphere directions. Pose ids run
/// over directions fastest.
pub fn sample_handover_poses(spec: &HandoverSpec) -> Vec<HandoverPose> {
    let dirs = icosphere(spec.icosphere_level);
    let mut out = Vec::new();
    let step = (spec.max - spec.min).component_div(&Vec3::new(
        spec.lattice[0] as f64,
        spec.lattice[1] as f64,
        spec.lattice[2] as f64,
    ));
    for i in 0..spec.lattice[0] {
        for j in 0..spec.lattice[1] {
            for k in 0..spec.lattice[2] {
                let position = spec.min + step.component_mul(&Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5));
                for d in &dirs {
                    out.push(HandoverPose {
                        pose_id: out.len(),
                        position,
                        direction: *d,
                        world: Transform::new(rotation_between(&Vec3::z(), d), position),
                    });
                }
            }
        }
    }
    out
}
