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


//! Query planning: graph search, motion realization and the replanning loop.

pub mod ddrrt;
pub mod planar;
pub mod realize;
pub mod search;
pub mod validate;

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Transform;
use crate::graph::{Edge, EdgeKind, NodeId, RegraspGraph};
use crate::kinematics::{ArmConfig, ArmId};

pub use ddrrt::{plan_ddrrt, ConfigSpace, RrtError, RrtParams};
pub use realize::SceneRealizer;
pub use search::{choose_arms, count_regrasps, search_min_regrasp, AllowedArms, ArmsUsed, SearchResult, Strategy};
pub use validate::{validate_plan, PlanViolation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    /// The moving arm does not carry the object.
    Transit,
    /// The object is carried with a constant grasp.
    Transfer,
    /// The object passes from one hand to the other.
    Handover,
}

impl SegmentKind {
    pub fn of_edge(kind: EdgeKind) -> SegmentKind {
        match kind {
            EdgeKind::Transfer => SegmentKind::Transit,
            EdgeKind::HandoverTransfer => SegmentKind::Handover,
            _ => SegmentKind::Transfer,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraspAction {
    Grip,
    Release,
}

/// Gripper action taken once the segment reaches `waypoint`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspEvent {
    pub arm: ArmId,
    pub action: GraspAction,
    pub waypoint: usize,
    /// Gripper pose in the object frame while gripping.
    pub grasp: Option<Transform>,
}

/// Motion realizing one graph edge. Waypoints move one arm at a time; the
/// other arm keeps its last configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub edge: EdgeKind,
    pub start_node: NodeId,
    pub end_node: NodeId,
    pub waypoints: Vec<ArmConfig>,
    pub events: Vec<GraspEvent>,
    pub object_start: Transform,
    pub object_end: Transform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub path: Vec<NodeId>,
    pub segments: Vec<Segment>,
    pub regrasps: usize,
    pub handovers: usize,
    pub arms_used: ArmsUsed,
    pub iterations: usize,
    pub removed_edges: Vec<Edge>,
    pub initial_object: Transform,
    pub goal_object: Transform,
    /// Arm configurations before the first and after the last segment.
    pub rest: Vec<(ArmId, Vec<f64>)>,
}

/// Turns a graph path into motion, or reports which edge could not be realized.
pub trait MotionRealizer {
    /// `Err(i)` names the edge `path[i] - path[i + 1]` as blocked.
    fn realize(&mut self, graph: &RegraspGraph, path: &[NodeId]) -> Result<Vec<Segment>, usize>;
    fn rest(&self) -> Vec<(ArmId, Vec<f64>)>;
}

/// Outcome when no realizable path remains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoPlan {
    pub iterations: usize,
    pub removed_edges: Vec<Edge>,
}

/// Search, realize, and on failure remove the blocked edge and search again.
/// Every iteration removes one edge, so the loop ends after at most
/// `|E| + 1` searches.
pub fn plan_with_replanning(
    graph: &RegraspGraph,
    mode: AllowedArms,
    realizer: &mut dyn MotionRealizer,
) -> Result<Plan, NoPlan> {
    let mut removed: BTreeSet<Edge> = BTreeSet::new();
    let mut order: Vec<Edge> = Vec::new();
    let mut iterations = 0;
    let index = search::SearchIndex::new(graph, mode);
    loop {
        iterations += 1;
        let Some(result) = index.search(&removed) else {
            return Err(NoPlan {
                iterations,
                removed_edges: order,
            });
        };
        match realizer.realize(graph, &result.path) {
            Ok(segments) => {
                let (regrasps, handovers) = count_regrasps(graph, &result.path);
                let node = |id: &NodeId| graph.node(*id).expect("path node in graph");
                return Ok(Plan {
                    arms_used: choose_arms(graph, &result),
                    initial_object: node(&result.path[0]).object_world,
                    goal_object: node(result.path.last().expect("non-empty path")).object_world,
                    path: result.path,
                    segments,
                    regrasps,
                    handovers,
                    iterations,
                    removed_edges: order,
                    rest: realizer.rest(),
                });
            }
            Err(i) => {
                let edge = graph
                    .edge_between(result.path[i], result.path[i + 1])
                    .expect("path edge in graph");
                removed.insert(edge);
                order.push(edge);
            }
        }
    }
}

/// Realizes every edge as one straight-or-RRT motion in an abstract
/// configuration space, with a fixed configuration per node. Grasp events
/// are not modelled.
pub struct ConfigRealizer<S: ConfigSpace> {
    pub space: S,
    pub arm: ArmId,
    pub configs: BTreeMap<NodeId, Vec<f64>>,
    pub params: RrtParams,
    pub rng: ChaCha8Rng,
}

impl<S: ConfigSpace> ConfigRealizer<S> {
    pub fn new(space: S, arm: ArmId, configs: BTreeMap<NodeId, Vec<f64>>, seed: u64) -> Self {
        ConfigRealizer {
            space,
            arm,
            configs,
            params: RrtParams::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl<S: ConfigSpace> MotionRealizer for ConfigRealizer<S> {
    fn realize(&mut self, graph: &RegraspGraph, path: &[NodeId]) -> Result<Vec<Segment>, usize> {
        let mut out = Vec::new();
        for (i, w) in path.windows(2).enumerate() {
            let (a, b) = (&self.configs[&w[0]], &self.configs[&w[1]]);
            let qs = plan_ddrrt(&self.space, a, b, &self.params, &mut self.rng).map_err(|_| i)?;
            let edge = graph.edge_between(w[0], w[1]).expect("path edge in graph");
            let (na, nb) = (graph.node(w[0]).expect("node"), graph.node(w[1]).expect("node"));
            out.push(Segment {
                kind: SegmentKind::of_edge(edge.kind),
                edge: edge.kind,
                start_node: w[0],
                end_node: w[1],
                waypoints: qs
                    .into_iter()
                    .map(|q| ArmConfig {
                        arm_id: self.arm,
                        q,
                        jawwidth: 0.0,
                    })
                    .collect(),
                events: Vec::new(),
                object_start: na.object_world,
                object_end: nb.object_world,
            });
        }
        Ok(out)
    }

    fn rest(&self) -> Vec<(ArmId, Vec<f64>)> {
        Vec::new()
    }
}
