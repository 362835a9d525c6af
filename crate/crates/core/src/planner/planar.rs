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


//! A two-link planar arm among axis-aligned boxes, used as a small
//! configuration space with an exact grid oracle.

use std::collections::VecDeque;
use std::f64::consts::PI;

use super::ddrrt::ConfigSpace;

/// Two revolute links in the plane, both joints limited to `[-pi, pi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarArm {
    pub link_lengths: [f64; 2],
    /// Boxes as `[xmin, ymin, xmax, ymax]`.
    pub obstacles: Vec<[f64; 4]>,
}

impl PlanarArm {
    pub fn new(link_lengths: [f64; 2], obstacles: Vec<[f64; 4]>) -> Self {
        PlanarArm { link_lengths, obstacles }
    }

    /// Elbow and tip positions.
    pub fn points(&self, q: &[f64]) -> [[f64; 2]; 2] {
        let [l1, l2] = self.link_lengths;
        let elbow = [l1 * q[0].cos(), l1 * q[0].sin()];
        let a = q[0] + q[1];
        [elbow, [elbow[0] + l2 * a.cos(), elbow[1] + l2 * a.sin()]]
    }

    /// Grid occupancy with `n x n` cells over the joint box; a cell is free
    /// when its center is.
    pub fn occupancy(&self, n: usize) -> Vec<bool> {
        let mut free = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                free[i * n + j] = self.is_free(&cell_center(n, i, j));
            }
        }
        free
    }
}

pub fn cell_of(n: usize, q: &[f64]) -> (usize, usize) {
    let idx = |v: f64| (((v + PI) / (2.0 * PI) * n as f64).floor() as isize).clamp(0, n as isize - 1) as usize;
    (idx(q[0]), idx(q[1]))
}

pub fn cell_center(n: usize, i: usize, j: usize) -> [f64; 2] {
    let c = |k: usize| -PI + (k as f64 + 0.5) * 2.0 * PI / n as f64;
    [c(i), c(j)]
}

/// Four-connected breadth-first reachability between two cells, without
/// wrap-around at the joint limits.
pub fn grid_connected(free: &[bool], n: usize, from: (usize, usize), to: (usize, usize)) -> bool {
    let at = |c: (usize, usize)| c.0 * n + c.1;
    if !free[at(from)] || !free[at(to)] {
        return false;
    }
    let mut seen = vec![false; n * n];
    let mut queue = VecDeque::from([from]);
    seen[at(from)] = true;
    while let Some((i, j)) = queue.pop_front() {
        if (i, j) == to {
            return true;
        }
        let mut push = |c: (usize, usize)| {
            if free[at(c)] && !seen[at(c)] {
                seen[at(c)] = true;
                queue.push_back(c);
            }
        };
        if i > 0 {
            push((i - 1, j));
        }
        if i + 1 < n {
            push((i + 1, j));
        }
        if j > 0 {
            push((i, j - 1));
        }
        if j + 1 < n {
            push((i, j + 1));
        }
    }
    false
}

/// Liang-Barsky clipping of the segment `a -> b` against a box.
fn segment_hits_box(a: [f64; 2], b: [f64; 2], bx: &[f64; 4]) -> bool {
    let d = [b[0] - a[0], b[1] - a[1]];
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    for k in 0..2 {
        let (lo, hi) = (bx[k], bx[k + 2]);
        if d[k].abs() < 1e-15 {
            if a[k] < lo || a[k] > hi {
                return false;
            }
            continue;
        }
        let (mut ta, mut tb) = ((lo - a[k]) / d[k], (hi - a[k]) / d[k]);
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t0 > t1 {
            return false;
        }
    }
    true
}

impl ConfigSpace for PlanarArm {
    fn lower(&self) -> Vec<f64> {
        vec![-PI, -PI]
    }

    fn upper(&self) -> Vec<f64> {
        vec![PI, PI]
    }

    fn is_free(&self, q: &[f64]) -> bool {
        if q.iter().any(|v| !v.is_finite() || v.abs() > PI) {
            return false;
        }
        let [elbow, tip] = self.points(q);
        !self
            .obstacles
            .iter()
            .any(|b| segment_hits_box([0.0, 0.0], elbow, b) || segment_hits_box(elbow, tip, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clipping_matches_simple_cases() {
        let b = [1.0, -1.0, 2.0, 1.0];
        assert!(segment_hits_box([0.0, 0.0], [3.0, 0.0], &b));
        assert!(!segment_hits_box([0.0, 0.0], [0.9, 0.0], &b));
        assert!(!segment_hits_box([0.0, 2.0], [3.0, 2.0], &b));
        assert!(segment_hits_box([1.5, 3.0], [1.5, 0.5], &b));
    }

    #[test]
    fn band_obstacle_splits_the_grid() {
        let arm = PlanarArm::new([1.0, 0.8], vec![[-0.1, 0.3, 0.1, 0.5]]);
        let n = 90;
        let free = arm.occupancy(n);
        assert!(grid_connected(&free, n, cell_of(n, &[0.0, 0.0]), cell_of(n, &[1.0, 1.0])));
        assert!(!grid_connected(&free, n, cell_of(n, &[0.0, 0.0]), cell_of(n, &[2.5, 0.0])));
    }
}
