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


//! Dynamic-domain RRT over a generic configuration space.

use rand::Rng;
use thiserror::Error;

/// A bounded configuration space with a validity test.
pub trait ConfigSpace {
    fn lower(&self) -> Vec<f64>;
    fn upper(&self) -> Vec<f64>;
    fn is_free(&self, q: &[f64]) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RrtParams {
    pub iterations: usize,
    /// Largest joint change of one extension, max-norm in radians.
    pub step: f64,
    /// Domain radius assigned to a node after its first failed extension.
    pub initial_radius: f64,
    pub goal_bias: f64,
    /// Spacing of collision checks along a straight joint motion.
    pub resolution: f64,
    /// Relative radius change after a success or failure.
    pub alpha: f64,
    pub min_radius: f64,
}

impl Default for RrtParams {
    fn default() -> Self {
        RrtParams {
            iterations: 5000,
            step: 0.1,
            initial_radius: 0.5,
            goal_bias: 0.1,
            resolution: 0.02,
            alpha: 0.1,
            min_radius: 0.05,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RrtError {
    #[error("no collision-free motion found within the iteration budget")]
    Blocked,
    #[error("start or goal configuration is in collision or out of bounds")]
    InvalidEndpoint,
}

pub fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn euclid2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + (y - x) * t).collect()
}

fn in_bounds(space: &dyn ConfigSpace, q: &[f64]) -> bool {
    let (lo, hi) = (space.lower(), space.upper());
    q.len() == lo.len() && q.iter().zip(lo.iter().zip(&hi)).all(|(v, (l, h))| v.is_finite() && l <= v && v <= h)
}

/// Checks the straight joint motion from `a` to `b` at `resolution`; `a`
/// itself is assumed valid.
pub fn motion_free(space: &dyn ConfigSpace, a: &[f64], b: &[f64], resolution: f64) -> bool {
    let n = (max_norm(a, b) / resolution).ceil().max(1.0) as usize;
    (1..=n).all(|k| space.is_free(&lerp(a, b, k as f64 / n as f64)))
}

/// Inserts intermediate waypoints so that consecutive entries differ by at
/// most `step` in every joint.
pub fn densify(path: &[Vec<f64>], step: f64) -> Vec<Vec<f64>> {
    let mut out = vec![path[0].clone()];
    for w in path.windows(2) {
        let n = (max_norm(&w[0], &w[1]) / step).ceil().max(1.0) as usize;
        for k in 1..n {
            out.push(lerp(&w[0], &w[1], k as f64 / n as f64));
        }
        out.push(w[1].clone());
    }
    out
}

struct TreeNode {
    q: Vec<f64>,
    parent: usize,
    radius: f64,
}

/// Plans a joint path from `start` to `goal`. The straight motion is tried
/// first. The returned path starts at `start`, ends at `goal` and has
/// consecutive waypoints at most `params.step` apart.
pub fn plan_ddrrt(
    space: &dyn ConfigSpace,
    start: &[f64],
    goal: &[f64],
    params: &RrtParams,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<f64>>, RrtError> {
    for q in [start, goal] {
        if !in_bounds(space, q) || !space.is_free(q) {
            return Err(RrtError::InvalidEndpoint);
        }
    }
    if motion_free(space, start, goal, params.resolution) {
        return Ok(densify(&[start.to_vec(), goal.to_vec()], params.step));
    }
    let (lo, hi) = (space.lower(), space.upper());
    let mut tree = vec![TreeNode {
        q: start.to_vec(),
        parent: usize::MAX,
        radius: f64::INFINITY,
    }];
    for _ in 0..params.iterations {
        let toward_goal = rng.gen::<f64>() < params.goal_bias;
        let target: Vec<f64> = if toward_goal {
            goal.to_vec()
        } else {
            lo.iter().zip(&hi).map(|(l, h)| rng.gen_range(*l..=*h)).collect()
        };
        let (near, d2) = tree
            .iter()
            .enumerate()
            .map(|(i, n)| (i, euclid2(&n.q, &target)))
            .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
        // Samples outside a node's dynamic domain are rejected, except the goal.
        if !toward_goal && d2.sqrt() > tree[near].radius {
            continue;
        }
        let gap = max_norm(&tree[near].q, &target);
        if gap < 1e-12 {
            continue;
        }
        let new = lerp(&tree[near].q, &target, (params.step / gap).min(1.0));
        if motion_free(space, &tree[near].q, &new, params.resolution) {
            if tree[near].radius.is_finite() {
                tree[near].radius *= 1.0 + params.alpha;
            }
            tree.push(TreeNode {
                q: new.clone(),
                parent: near,
                radius: f64::INFINITY,
            });
            if max_norm(&new, goal) <= params.step && motion_free(space, &new, goal, params.resolution) {
                let mut path = vec![goal.to_vec()];
                let mut i = tree.len() - 1;
                while i != usize::MAX {
                    path.push(tree[i].q.clone());
                    i = tree[i].parent;
                }
                path.reverse();
                path.dedup_by(|a, b| max_norm(a, b) < 1e-12);
                return Ok(densify(&path, params.step));
            }
        } else {
            let r = &mut tree[near].radius;
            *r = if r.is_finite() {
                (*r * (1.0 - params.alpha)).max(params.min_radius)
            } else {
                params.initial_radius
            };
        }
    }
    Err(RrtError::Blocked)
}
