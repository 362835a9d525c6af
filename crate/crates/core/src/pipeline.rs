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


//! End-to-end steps shared by the command line and the tests: building the
//! offline library and answering a query against it.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::grasp::{synthesize_grasps, Grasp, GraspError};
use crate::graph::handover::{sample_handover_poses, HandoverPose};
use crate::graph::solver::{NodeSolver, SceneSolver};
use crate::graph::{
    build_dual_arm_graph, build_handover_graph, build_partial_graph, build_single_arm_graph, build_super_graph,
    GraphError, Provenance, RegraspGraph, Role,
};
use crate::kinematics::{ArmId, KinematicsError};
use crate::placement::{discretize, plan_stable_placements, ObjectPose, PlacementError, StablePlacement};
use crate::planner::{plan_with_replanning, AllowedArms, NoPlan, Plan, SceneRealizer};
use crate::scene::Scene;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Grasp(#[from] GraspError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("invalid pose: {0}")]
    InvalidPose(String),
}

/// Everything precomputed offline for one scene.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Library {
    pub grasps: Vec<Grasp>,
    pub placements: Vec<StablePlacement>,
    pub poses: Vec<ObjectPose>,
    pub handover_poses: Vec<HandoverPose>,
    pub single_arm: BTreeMap<ArmId, RegraspGraph>,
    pub handover: Option<RegraspGraph>,
    pub provenance: Provenance,
}

/// How a query names a table pose.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoseSpec {
    Id(usize),
    /// `(placement, rotation, position)`.
    Triple(usize, usize, usize),
}

impl std::str::FromStr for PoseSpec {
    type Err = String;

    /// Accepts `17` or `2,3,1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let num = |p: &str| p.parse::<usize>().map_err(|_| format!("`{s}` is not a pose id or placement,rotation,position triple"));
        match parts.as_slice() {
            [id] => Ok(PoseSpec::Id(num(id)?)),
            [a, b, c] => Ok(PoseSpec::Triple(num(a)?, num(b)?, num(c)?)),
            _ => Err(format!("`{s}` is not a pose id or placement,rotation,position triple")),
        }
    }
}

/// Hex sha256 digest of the grasp set and both pose sets.
pub fn universe_digest(grasps: &[Grasp], poses: &[ObjectPose], handover_poses: &[HandoverPose]) -> String {
    let mut h = Sha256::new();
    let json = serde_json::to_vec(&(grasps, poses, handover_poses)).expect("plain data serializes");
    h.update(&json);
    hex::encode(h.finalize())
}

/// Wall time of each offline stage, in seconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    /// Grasp planning.
    pub gp: f64,
    /// Placement planning and discretization.
    pub pp: f64,
    /// Inverse kinematics and collision detection of the single-arm graphs.
    pub ik_cd: f64,
    /// Handover pose sampling and the handover graph.
    pub hp: f64,
    pub total: f64,
}

/// Offline phase: single-arm graphs for every arm and the handover graph.
pub fn build_library(scene: &Scene) -> Result<Library, PipelineError> {
    build_library_timed(scene).map(|(lib, _)| lib)
}

/// [`build_library`] with per-stage wall times.
pub fn build_library_timed(scene: &Scene) -> Result<(Library, StageTimings), PipelineError> {
    let clock = Instant::now();
    let mut timings = StageTimings::default();
    let lap = |t: &mut f64, since: Instant| *t = since.elapsed().as_secs_f64();

    let t = Instant::now();
    let arms = scene.robot.arm_ids();
    let grasps = synthesize_grasps(&scene.object, scene.robot.gripper(arms[0])?, &scene.grasp)?;
    lap(&mut timings.gp, t);

    let t = Instant::now();
    let placements = plan_stable_placements(&scene.object, scene.discretization.min_margin)?;
    let poses = discretize(&placements, &scene.pose_grid()?);
    lap(&mut timings.pp, t);

    let t = Instant::now();
    let handover_poses = if arms.len() == 2 {
        sample_handover_poses(&scene.discretization.handover)
    } else {
        Vec::new()
    };
    let mut hp = t.elapsed().as_secs_f64();

    let provenance = Provenance {
        universe: universe_digest(&grasps, &poses, &handover_poses),
        params: BTreeMap::new(),
    };
    let solver = SceneSolver::new(scene, &grasps);
    let t = Instant::now();
    let single_arm = arms
        .iter()
        .map(|a| (*a, build_single_arm_graph(&solver, *a, &poses, provenance.clone())))
        .collect();
    lap(&mut timings.ik_cd, t);

    let t = Instant::now();
    let handover = (arms.len() == 2).then(|| build_handover_graph(&solver, &arms, &handover_poses, provenance.clone()));
    hp += t.elapsed().as_secs_f64();
    timings.hp = hp;
    timings.total = clock.elapsed().as_secs_f64();
    let lib = Library {
        grasps,
        placements,
        poses,
        handover_poses,
        single_arm,
        handover,
        provenance,
    };
    Ok((lib, timings))
}

impl Library {
    pub fn resolve(&self, spec: PoseSpec) -> Result<&ObjectPose, PipelineError> {
        let found = match spec {
            PoseSpec::Id(id) => self.poses.get(id),
            PoseSpec::Triple(p, r, x) => self
                .poses
                .iter()
                .find(|o| o.placement_id == p && o.rotation_id == r && o.position_id == x),
        };
        found.ok_or_else(|| PipelineError::InvalidPose(format!("{spec:?} is not among the {} discretized poses", self.poses.len())))
    }

    /// Union of the single-arm graphs and the handover graph, joined by
    /// handover_transit edges. With one arm it is that arm's graph.
    pub fn dual_graph(&self, scene: &Scene) -> Result<RegraspGraph, PipelineError> {
        let solver = SceneSolver::new(scene, &self.grasps);
        self.dual_with(&solver)
    }

    fn dual_with(&self, solver: &SceneSolver) -> Result<RegraspGraph, PipelineError> {
        let disjoint = |l: usize, r: usize| solver.grippers_disjoint(l, r);
        let arms: Vec<ArmId> = self.single_arm.keys().copied().collect();
        Ok(match (&self.handover, arms.as_slice()) {
            (Some(h), [l, r]) => build_dual_arm_graph(&self.single_arm[l], &self.single_arm[r], h, &disjoint)?,
            _ => self.single_arm[&arms[0]].clone(),
        })
    }

    /// Online stitching: the dual-arm graph plus the initial and goal
    /// partial graphs of every arm.
    pub fn query_graph(&self, scene: &Scene, initial: &ObjectPose, goal: &ObjectPose) -> Result<RegraspGraph, PipelineError> {
        let solver = SceneSolver::new(scene, &self.grasps);
        let dual = self.dual_with(&solver)?;
        let disjoint = |l: usize, r: usize| solver.grippers_disjoint(l, r);
        let mut partials = Vec::new();
        for arm in self.single_arm.keys() {
            partials.push(build_partial_graph(&solver, *arm, Role::Initial, initial, self.provenance.clone()));
            partials.push(build_partial_graph(&solver, *arm, Role::Goal, goal, self.provenance.clone()));
        }
        let refs: Vec<&RegraspGraph> = partials.iter().collect();
        Ok(build_super_graph(&dual, &refs, &disjoint)?)
    }

    /// Online phase for one query: stitch, search, realize, replan.
    pub fn plan(
        &self,
        scene: &Scene,
        initial: PoseSpec,
        goal: PoseSpec,
        mode: AllowedArms,
        seed: u64,
    ) -> Result<Result<Plan, NoPlan>, PipelineError> {
        let (i, g) = (self.resolve(initial)?, self.resolve(goal)?);
        let graph = self.query_graph(scene, i, g)?;
        let mut realizer = SceneRealizer::new(scene, &self.grasps, seed);
        Ok(plan_with_replanning(&graph, mode, &mut realizer))
    }
}
