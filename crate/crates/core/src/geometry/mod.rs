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

//! Transforms, meshes, convex hulls and collision queries.

pub mod collision;
pub mod hull;
pub mod io;
pub mod mesh;
pub mod transform;

pub use collision::{collide, gjk_distance, CollisionBody, PosedBody};
pub use hull::{convex_hull, convex_hull_of_points, ConvexHull, HullFacet};
pub use mesh::{Aabb, TriMesh};
pub use transform::{compose, euler_to_transform, inverse, rotation_between, Transform, Vec3};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("face {face} references a vertex out of range")]
    IndexOutOfRange { face: usize },
    #[error("center of mass lies outside the mesh bounding box")]
    ComOutsideBounds,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),
}
