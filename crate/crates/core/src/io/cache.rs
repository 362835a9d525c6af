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


//! The graph cache: the offline library plus content hashes.
//!
//! The cache file holds only deterministic content so that rebuilding from
//! the same scene reproduces it byte for byte. Wall-clock timings go to a
//! separate manifest file next to it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::pipeline::{Library, StageTimings};
use crate::scene::Scene;

use super::{read_file, sha256_hex, write_file, IoError};

pub const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheHashes {
    pub grasps: String,
    pub poses: String,
    pub handover_poses: String,
    /// Per graph: `left`, `right` and `handover`.
    pub graphs: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cache {
    pub format_version: u32,
    /// Digest of the scene the cache was built from.
    pub scene_digest: String,
    pub hashes: CacheHashes,
    pub build_params: BTreeMap<String, String>,
    pub library: Library,
}

/// Summary of a build: counts, hashes and stage timings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheManifest {
    pub format_version: u32,
    pub scene_digest: String,
    pub hashes: CacheHashes,
    pub build_params: BTreeMap<String, String>,
    pub grasps: usize,
    pub placements: usize,
    pub poses: usize,
    pub handover_poses: usize,
    /// `(nodes, edges)` per graph.
    pub graphs: BTreeMap<String, (usize, usize)>,
    pub timings: StageTimings,
}

fn json_hash<T: Serialize>(value: &T) -> String {
    sha256_hex(&serde_json::to_vec(value).expect("plain data serializes"))
}

fn content_hashes(library: &Library) -> CacheHashes {
    let mut graphs = BTreeMap::new();
    for (arm, g) in &library.single_arm {
        graphs.insert(arm.to_string(), json_hash(g));
    }
    if let Some(h) = &library.handover {
        graphs.insert("handover".to_string(), json_hash(h));
    }
    CacheHashes {
        grasps: json_hash(&library.grasps),
        poses: json_hash(&library.poses),
        handover_poses: json_hash(&library.handover_poses),
        graphs,
    }
}

/// Digest identifying a scene, including its meshes and all parameters.
pub fn scene_digest(scene: &Scene) -> String {
    json_hash(scene)
}

impl Cache {
    pub fn new(scene: &Scene, library: Library) -> Cache {
        let d = &scene.discretization;
        let build_params = BTreeMap::from([
            ("n_r".to_string(), d.n_r.to_string()),
            ("grid".to_string(), format!("{}x{}", d.grid[0], d.grid[1])),
            ("min_margin".to_string(), d.min_margin.to_string()),
            (
                "handover_lattice".to_string(),
                format!("{}x{}x{}", d.handover.lattice[0], d.handover.lattice[1], d.handover.lattice[2]),
            ),
            ("icosphere_level".to_string(), d.handover.icosphere_level.to_string()),
            ("friction".to_string(), scene.grasp.friction_mu.to_string()),
            ("sample_density".to_string(), scene.grasp.density.to_string()),
            ("grasp_seed".to_string(), scene.grasp.seed.to_string()),
        ]);
        Cache {
            format_version: CACHE_FORMAT_VERSION,
            scene_digest: scene_digest(scene),
            hashes: content_hashes(&library),
            build_params,
            library,
        }
    }

    /// Hashes recomputed from the stored content.
    pub fn recompute_hashes(&self) -> CacheHashes {
        content_hashes(&self.library)
    }

    pub fn manifest(&self, timings: StageTimings) -> CacheManifest {
        let lib = &self.library;
        let mut graphs = BTreeMap::new();
        for (arm, g) in &lib.single_arm {
            graphs.insert(arm.to_string(), (g.node_count(), g.edge_count()));
        }
        if let Some(h) = &lib.handover {
            graphs.insert("handover".to_string(), (h.node_count(), h.edge_count()));
        }
        CacheManifest {
            format_version: self.format_version,
            scene_digest: self.scene_digest.clone(),
            hashes: self.hashes.clone(),
            build_params: self.build_params.clone(),
            grasps: lib.grasps.len(),
            placements: lib.placements.len(),
            poses: lib.poses.len(),
            handover_poses: lib.handover_poses.len(),
            graphs,
            timings,
        }
    }
}

/// Path of the timing manifest written next to a cache file.
pub fn manifest_path(cache_path: &Path) -> PathBuf {
    let mut name = cache_path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    cache_path.with_file_name(name)
}

pub fn write_cache(path: &Path, cache: &Cache) -> Result<(), IoError> {
    let bytes = serde_json::to_vec(cache).expect("plain data serializes");
    write_file(path, &bytes)
}

/// Loads a cache and rejects it when its format version or scene digest
/// does not match. With `verify` the content hashes are recomputed too.
pub fn load_cache(path: &Path, scene: &Scene, verify: bool) -> Result<Cache, IoError> {
    let text = read_file(path)?;
    let cache: Cache = serde_json::from_str(&text).map_err(|e| IoError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    if cache.format_version != CACHE_FORMAT_VERSION {
        return Err(IoError::UnsupportedVersion {
            found: cache.format_version,
            expected: CACHE_FORMAT_VERSION,
        });
    }
    let current = scene_digest(scene);
    if cache.scene_digest != current {
        return Err(IoError::StaleCache {
            cached: cache.scene_digest,
            current,
        });
    }
    if verify && cache.recompute_hashes() != cache.hashes {
        return Err(IoError::Invalid {
            path: path.display().to_string(),
            message: "content hashes do not match the stored manifest".into(),
        });
    }
    Ok(cache)
}

/// Loads a cache without a scene, for inspection commands.
pub fn read_cache_unchecked(path: &Path) -> Result<Cache, IoError> {
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|e| IoError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
