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


//! File formats: scene files, the graph cache, plan files and DOT export.

pub mod cache;
pub mod dot;
pub mod plan_file;
pub mod scene_file;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::grasp::GraspError;
use crate::kinematics::KinematicsError;

pub use cache::{load_cache, scene_digest, write_cache, Cache, CacheHashes, CacheManifest, CACHE_FORMAT_VERSION};
pub use dot::{to_dot, DotGraph};
pub use plan_file::{PlanFile, PlanSummary};
pub use scene_file::{load_scene, SceneFile};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("file not found: {0}")]
    MissingFile(String),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("{path}: {message}")]
    Write { path: String, message: String },
    #[error("cache format version {found} is not supported (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },
    #[error("stale cache: it was built from a different scene (cache {cached}, scene {current})")]
    StaleCache { cached: String, current: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Grasp(#[from] GraspError),
}

pub(crate) fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<(), IoError> {
    std::fs::write(path, bytes).map_err(|e| IoError::Write {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|_| IoError::MissingFile(path.display().to_string()))
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}
