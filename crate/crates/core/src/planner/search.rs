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


//! Minimum-regrasp graph search with deterministic tie-breaking.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::graph::{Edge, EdgeKind, NodeId, PoseKind, RegraspGraph, Role};
use crate::kinematics::ArmId;

/// Which arms a query may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllowedArms {
    LeftOnly,
    RightOnly,
    /// Dual-arm planning: the object starts in one hand and ends in the other.
    Both,
    /// The whole super graph; the search decides.
    Auto,
}

impl std::str::FromStr for AllowedArms {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left" | "left-only" | "left_only" => Ok(AllowedArms::LeftOnly),
            "right" | "right-only" | "right_only" => Ok(AllowedArms::RightOnly),
            "both" => Ok(AllowedArms::Both),
            "auto" => Ok(AllowedArms::Auto),
            other => Err(format!("unknown arm selection `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub path: Vec<NodeId>,
    /// Number of edges on the path.
    pub cost: usize,
}

/// Adjacency lists carrying the edge each neighbour is reached through.
pub type Adjacency = BTreeMap<NodeId, Vec<(NodeId, Edge)>>;

/// Best-first search over unit-cost edges, popping labels in `(f, path)`
/// order. With a consistent heuristic the first target popped lies on a
/// shortest path, and among shortest paths it has the lexicographically
/// smallest node-id sequence. Edges in `removed` are skipped.
pub fn astar(
    adj: &Adjacency,
    sources: &BTreeSet<NodeId>,
    targets: &BTreeSet<NodeId>,
    removed: &BTreeSet<Edge>,
    heuristic: &dyn Fn(NodeId) -> usize,
) -> Option<SearchResult> {
    let mut heap: BinaryHeap<Reverse<(usize, Vec<NodeId>)>> = BinaryHeap::new();
    for s in sources {
        if adj.contains_key(s) {
            heap.push(Reverse((heuristic(*s), vec![*s])));
        }
    }
    let mut settled: BTreeSet<NodeId> = BTreeSet::new();
    while let Some(Reverse((_, path))) = heap.pop() {
        let node = *path.last().expect("non-empty path");
        if !settled.insert(node) {
            continue;
        }
        if targets.contains(&node) {
            let cost = path.len() - 1;
            return Some(SearchResult { path, cost });
        }
        let g = path.len();
        for (next, edge) in &adj[&node] {
            if settled.contains(next) || removed.contains(edge) {
                continue;
            }
            let mut p = path.clone();
            p.push(*next);
            heap.push(Reverse((g + heuristic(*next), p)));
        }
    }
    None
}

/// Search problems of one query mode, prepared once and reused while edges
/// are removed.
pub struct SearchIndex {
    problems: Vec<(Adjacency, BTreeSet<NodeId>, BTreeSet<NodeId>)>,
}

impl SearchIndex {
    pub fn new(graph: &RegraspGraph, mode: AllowedArms) -> Self {
        let role_arm = |role: Role, arm: Option<ArmId>| -> BTreeSet<NodeId> {
            graph
                .nodes()
                .filter(|n| n.role == role && arm.map_or(true, |a| n.arm == a))
                .map(|n| n.id)
                .collect()
        };
        let adjacency = |arm: Option<ArmId>| -> Adjacency {
            let keep = |n: &NodeId| arm.map_or(true, |a| n.arm() == a && n.pose().kind == PoseKind::Placement);
            let mut adj: Adjacency = graph.nodes().filter(|n| keep(&n.id)).map(|n| (n.id, Vec::new())).collect();
            for e in graph.edges().filter(|e| keep(&e.a) && keep(&e.b)) {
                adj.get_mut(&e.a).expect("edge endpoint").push((e.b, *e));
                adj.get_mut(&e.b).expect("edge endpoint").push((e.a, *e));
            }
            for v in adj.values_mut() {
                v.sort();
            }
            adj
        };
        let (l, r) = (Some(ArmId::Left), Some(ArmId::Right));
        let problems = match mode {
            AllowedArms::LeftOnly => vec![(adjacency(l), role_arm(Role::Initial, l), role_arm(Role::Goal, l))],
            AllowedArms::RightOnly => vec![(adjacency(r), role_arm(Role::Initial, r), role_arm(Role::Goal, r))],
            AllowedArms::Both => {
                let adj = adjacency(None);
                vec![
                    (adj.clone(), role_arm(Role::Initial, l), role_arm(Role::Goal, r)),
                    (adj, role_arm(Role::Initial, r), role_arm(Role::Goal, l)),
                ]
            }
            AllowedArms::Auto => vec![(adjacency(None), role_arm(Role::Initial, None), role_arm(Role::Goal, None))],
        };
        SearchIndex { problems }
    }

    /// Best result over the mode's source/target pairings.
    pub fn search(&self, removed: &BTreeSet<Edge>) -> Option<SearchResult> {
        let mut best: Option<SearchResult> = None;
        for (adj, sources, targets) in &self.problems {
            if let Some(r) = astar(adj, sources, targets, removed, &|_| 0) {
                if best.as_ref().map_or(true, |b| (r.cost, &r.path) < (b.cost, &b.path)) {
                    best = Some(r);
                }
            }
        }
        best
    }
}

/// Minimum-edge path from the initial partial graph to the goal partial graph
/// under the arm restriction, ignoring `removed` edges.
pub fn search_min_regrasp(graph: &RegraspGraph, mode: AllowedArms, removed: &BTreeSet<Edge>) -> Option<SearchResult> {
    SearchIndex::new(graph, mode).search(removed)
}

/// How the arms are used along a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// One arm, pick-and-place only.
    Single,
    /// Handovers without pick-and-place between table poses.
    Dual,
    /// Both pick-and-place between table poses and handovers.
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmsUsed {
    pub arms: Vec<ArmId>,
    pub strategy: Strategy,
}

/// Edge kinds along a path.
pub fn path_edges(graph: &RegraspGraph, path: &[NodeId]) -> Vec<Edge> {
    path.windows(2)
        .map(|w| graph.edge_between(w[0], w[1]).expect("consecutive path nodes are adjacent"))
        .collect()
}

pub fn choose_arms(graph: &RegraspGraph, result: &SearchResult) -> ArmsUsed {
    let arms: BTreeSet<ArmId> = result.path.iter().map(|n| n.arm()).collect();
    let kinds: Vec<EdgeKind> = path_edges(graph, &result.path).iter().map(|e| e.kind).collect();
    let handover = kinds.contains(&EdgeKind::HandoverTransfer);
    let pick_place = kinds.iter().any(|k| matches!(k, EdgeKind::Transit | EdgeKind::DirectInitGoal));
    let strategy = match (handover, pick_place) {
        (false, _) => Strategy::Single,
        (true, false) => Strategy::Dual,
        (true, true) => Strategy::Mixed,
    };
    ArmsUsed {
        arms: arms.into_iter().collect(),
        strategy,
    }
}

/// `(total regrasps, handovers)`: every pick-and-place carry and every
/// handover counts once.
pub fn count_regrasps(graph: &RegraspGraph, path: &[NodeId]) -> (usize, usize) {
    let kinds: Vec<EdgeKind> = path_edges(graph, path).iter().map(|e| e.kind).collect();
    let handovers = kinds.iter().filter(|k| **k == EdgeKind::HandoverTransfer).count();
    let carries = kinds.iter().filter(|k| k.moves_object()).count();
    (carries + handovers, handovers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::PoseRef;

    fn id(k: usize) -> NodeId {
        NodeId::new(Role::Library, ArmId::Left, PoseRef::placement(k), 0)
    }

    #[test]
    fn ties_break_lexicographically() {
        // Diamond 0 -> {1, 2} -> 3: both routes have two edges.
        let mut adj: Adjacency = BTreeMap::new();
        for (a, b) in [(0, 2), (0, 1), (1, 3), (2, 3)] {
            let e = Edge::new(id(a), id(b), EdgeKind::Transit);
            adj.entry(id(a)).or_default().push((id(b), e));
            adj.entry(id(b)).or_default().push((id(a), e));
        }
        for v in adj.values_mut() {
            v.sort();
        }
        let none = BTreeSet::new();
        let r = astar(&adj, &[id(0)].into(), &[id(3)].into(), &none, &|_| 0).unwrap();
        assert_eq!(r.path, vec![id(0), id(1), id(3)]);
        assert_eq!(r.cost, 2);
        assert!(astar(&adj, &[id(0)].into(), &[id(9)].into(), &none, &|_| 0).is_none());
        let cut: BTreeSet<Edge> = [Edge::new(id(0), id(1), EdgeKind::Transit)].into();
        let r = astar(&adj, &[id(0)].into(), &[id(3)].into(), &cut, &|_| 0).unwrap();
        assert_eq!(r.path, vec![id(0), id(2), id(3)]);
    }
}
