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


//! Stable placements of an object on a flat table and their discretization
//! into a finite set of object poses.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::hull::{convex_hull, planar_hull};
use crate::geometry::{GeometryError, Transform, TriMesh, Vec3};

/// Default minimum distance from the projected center of mass to the support
/// polygon boundary.
pub const DEFAULT_MIN_MARGIN: f64 = 0.005;

/// Default number of rotations about the vertical axis.
pub const DEFAULT_N_ROTATIONS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlacementError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid pose grid: {0}")]
    InvalidGrid(String),
}

/// An object resting on one convex-hull facet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StablePlacement {
    /// Maps object coordinates into the table-contact frame. In that frame the
    /// supporting facet lies in `z == 0` with outward normal `-z`, and the
    /// center of mass projects onto the origin.
    pub object_to_table: Transform,
    /// Support polygon in table-contact xy coordinates, counter-clockwise.
    pub support_polygon: Vec<[f64; 2]>,
    /// Distance from the projected center of mass to the nearest polygon edge.
    pub stability_margin: f64,
}

/// Rotation and position discretization of the table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseGrid {
    pub n_r: usize,
    pub rotation_step: f64,
    /// Table xy coordinates of the candidate object positions.
    pub positions: Vec<[f64; 2]>,
    /// Height of the table surface.
    pub table_height: f64,
}

impl PoseGrid {
    pub fn new(n_r: usize, positions: Vec<[f64; 2]>, table_height: f64) -> Result<Self, PlacementError> {
        if n_r == 0 {
            return Err(PlacementError::InvalidGrid("n_r must be at least 1".into()));
        }
        if positions.is_empty() {
            return Err(PlacementError::InvalidGrid("no positions".into()));
        }
        if positions.iter().flatten().chain(std::iter::once(&table_height)).any(|v| !v.is_finite()) {
            return Err(PlacementError::InvalidGrid("non-finite coordinate".into()));
        }
        Ok(PoseGrid {
            n_r,
            rotation_step: TAU / n_r as f64,
            positions,
            table_height,
        })
    }

    /// Cell centers of an `nx` by `ny` grid covering the rectangle `[min, max]`.
    pub fn table_grid(
        n_r: usize,
        min: [f64; 2],
        max: [f64; 2],
        nx: usize,
        ny: usize,
        table_height: f64,
    ) -> Result<Self, PlacementError> {
        if nx == 0 || ny == 0 || !(min[0] < max[0] && min[1] < max[1]) {
            return Err(PlacementError::InvalidGrid("empty grid region".into()));
        }
        let dx = (max[0] - min[0]) / nx as f64;
        let dy = (max[1] - min[1]) / ny as f64;
        let mut positions = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                positions.push([min[0] + dx * (i as f64 + 0.5), min[1] + dy * (j as f64 + 0.5)]);
            }
        }
        PoseGrid::new(n_r, positions, table_height)
    }

    pub fn n_p(&self) -> usize {
        self.positions.len()
    }

    pub fn all_inside(&self, min: [f64; 2], max: [f64; 2]) -> bool {
        self.positions
            .iter()
            .all(|p| p[0] >= min[0] && p[0] <= max[0] && p[1] >= min[1] && p[1] <= max[1])
    }

    /// Table-frame transform for a rotation and position index.
    pub fn frame(&self, rotation_id: usize, position_id: usize) -> Transform {
        let p = self.positions[position_id];
        Transform::from_translation(Vec3::new(p[0], p[1], self.table_height))
            .compose(&Transform::rot_z(rotation_id as f64 * self.rotation_step))
    }
}

/// One discrete object pose on the table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectPose {
    pub pose_id: usize,
    pub placement_id: usize,
    pub rotation_id: usize,
    pub position_id: usize,
    /// Object frame expressed in the world frame.
    pub world: Transform,
}

/// Signed distance from `p` to the boundary of a counter-clockwise convex
/// polygon; positive inside.
pub fn polygon_margin(polygon: &[[f64; 2]], p: [f64; 2]) -> f64 {
    let n = polygon.len();
    if n < 3 {
        return f64::NEG_INFINITY;
    }
    (0..n)
        .map(|i| {
            let a = polygon[i];
            let b = polygon[(i + 1) % n];
            let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
            let len = (ex * ex + ey * ey).sqrt();
            (ex * (p[1] - a[1]) - ey * (p[0] - a[0])) / len
        })
        .fold(f64::INFINITY, f64::min)
}

/// One placement per hull facet whose center-of-mass projection falls inside
/// the facet with at least `min_margin` clearance. Symmetric duplicates are
/// kept.
pub fn plan_stable_placements(mesh: &TriMesh, min_margin: f64) -> Result<Vec<StablePlacement>, PlacementError> {
    let hull = convex_hull(mesh)?;
    let com = mesh.com();
    let mut out = Vec::new();
    for facet in &hull.facets {
        let rot = crate::geometry::rotation_between(&facet.normal, &-Vec3::z());
        let rotated_com = rot * com;
        // Height of the facet after rotation: every facet point maps to the same z.
        let facet_z = -facet.offset;
        let shift = Vec3::new(-rotated_com.x, -rotated_com.y, -facet_z);
        let object_to_table = Transform::new(rot, shift);
        let ring: Vec<Vec3> = facet.polygon.iter().map(|p| object_to_table.apply_point(p)).collect();
        // Seen from +z the facet polygon must be counter-clockwise.
        let ordered = planar_hull(&ring, &Vec3::z());
        let polygon: Vec<[f64; 2]> = ordered.iter().map(|p| [p.x, p.y]).collect();
        let margin = polygon_margin(&polygon, [0.0, 0.0]);
        if margin >= min_margin && margin > 0.0 {
            out.push(StablePlacement {
                object_to_table,
                support_polygon: polygon,
                stability_margin: margin,
            });
        }
    }
    Ok(out)
}

/// Expands placements over the grid. Pose ids enumerate placements first,
/// then rotations, then positions: `pose_id = (placement * n_r + rotation) * n_p + position`.
pub fn discretize(placements: &[StablePlacement], grid: &PoseGrid) -> Vec<ObjectPose> {
    let mut poses = Vec::with_capacity(placements.len() * grid.n_r * grid.n_p());
    for (pl, placement) in placements.iter().enumerate() {
        for r in 0..grid.n_r {
            for p in 0..grid.n_p() {
                poses.push(ObjectPose {
                    pose_id: poses.len(),
                    placement_id: pl,
                    rotation_id: r,
                    position_id: p,
                    world: grid.frame(r, p).compose(&placement.object_to_table),
                });
            }
        }
    }
    poses
}

/// Independent stability check of a posed object: the lowest hull points must
/// rest on the table and the center of mass must project inside their convex
/// hull by at least `min_margin`.
pub fn is_statically_stable(mesh: &TriMesh, world: &Transform, table_height: f64, min_margin: f64) -> bool {
    let pts: Vec<Vec3> = mesh.vertices().iter().map(|v| world.apply_point(v)).collect();
    let zmin = pts.iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
    if (zmin - table_height).abs() > 1e-6 {
        return false;
    }
    let contact: Vec<Vec3> = pts
        .iter()
        .filter(|p| p.z - zmin < 1e-7)
        .map(|p| Vec3::new(p.x, p.y, 0.0))
        .collect();
    let ring = planar_hull(&contact, &Vec3::z());
    let polygon: Vec<[f64; 2]> = ring.iter().map(|p| [p.x, p.y]).collect();
    let c = world.apply_point(&mesh.com());
    polygon_margin(&polygon, [c.x, c.y]) >= min_margin - 1e-9
}
