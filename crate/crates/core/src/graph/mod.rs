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


//! Regrasp graphs: nodes are feasible (arm, grasp, object pose) configurations,
//! edges are regrasp, pick-and-place and handover relations between them.

pub mod handover;
pub mod solver;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Transform;
use crate::kinematics::ArmId;
use crate::placement::ObjectPose;

pub use handover::{icosphere, sample_handover_poses, HandoverPose};
pub use solver::{NodeData, NodeSolver, PoseSlot, SceneSolver, TableSolver};

/// Object-frame grasp equality tolerance (meters and radians).
pub const GRASP_EQ_TOL: f64 = 1e-6;
/// Two joint vectors closer than this (max-norm) count as the same configuration.
pub const SAME_Q_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("component graphs were built from different grasp/pose universes")]
    InconsistentUniverse,
    #[error("graph has the wrong species: expected {expected}, found {found}")]
    WrongSpecies { expected: String, found: String },
}

/// Which graph family a node belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Offline library graphs: single-arm and handover.
    Library,
    /// Partial graph of the initial pose.
    Initial,
    /// Partial graph of the goal pose.
    Goal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoseKind {
    Placement,
    Handover,
}

/// Reference to a table placement pose or a handover pose by id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PoseRef {
    pub kind: PoseKind,
    pub id: usize,
}

impl PoseRef {
    pub fn placement(id: usize) -> Self {
        PoseRef {
            kind: PoseKind::Placement,
            id,
        }
    }

    pub fn handover(id: usize) -> Self {
        PoseRef {
            kind: PoseKind::Handover,
            id,
        }
    }
}

impl std::fmt::Display for PoseRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            PoseKind::Placement => write!(f, "p{}", self.id),
            PoseKind::Handover => write!(f, "h{}", self.id),
        }
    }
}

const GRASP_BITS: u32 = 24;
const POSE_BITS: u32 = 36;

/// Packed node identifier. Ordering follows role, arm, pose kind, pose id and
/// grasp id, in that order, so ids are unique across every graph species.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl NodeId {
    pub fn new(role: Role, arm: ArmId, pose: PoseRef, grasp_id: usize) -> NodeId {
        assert!((grasp_id as u64) < (1 << GRASP_BITS), "grasp id too large");
        assert!((pose.id as u64) < (1 << POSE_BITS), "pose id too large");
        let role = role as u64;
        let arm = arm as u64;
        let kind = pose.kind as u64;
        let head = (role << 2) | (arm << 1) | kind;
        NodeId((head << (GRASP_BITS + POSE_BITS)) | ((pose.id as u64) << GRASP_BITS) | grasp_id as u64)
    }

    fn head(self) -> u64 {
        self.0 >> (GRASP_BITS + POSE_BITS)
    }

    pub fn role(self) -> Role {
        match self.head() >> 2 {
            0 => Role::Library,
            1 => Role::Initial,
            _ => Role::Goal,
        }
    }

    pub fn arm(self) -> ArmId {
        if (self.head() >> 1) & 1 == 0 {
            ArmId::Left
        } else {
            ArmId::Right
        }
    }

    pub fn pose(self) -> PoseRef {
        let id = ((self.0 >> GRASP_BITS) & ((1 << POSE_BITS) - 1)) as usize;
        if self.head() & 1 == 0 {
            PoseRef::placement(id)
        } else {
            PoseRef::handover(id)
        }
    }

    pub fn grasp_id(self) -> usize {
        (self.0 & ((1 << GRASP_BITS) - 1)) as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let role = match self.role() {
            Role::Library => "",
            Role::Initial => "i",
            Role::Goal => "g",
        };
        let arm = match self.arm() {
            ArmId::Left => "l",
            ArmId::Right => "r",
        };
        write!(f, "{role}{arm}_{}_g{}", self.pose(), self.grasp_id())
    }
}

/// A feasible grasp configuration of one arm at one object pose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspNode {
    pub id: NodeId,
    pub role: Role,
    pub arm: ArmId,
    pub grasp_id: usize,
    pub pose: PoseRef,
    pub q: Vec<f64>,
    pub jawwidth: f64,
    pub object_world: Transform,
    pub gripper_world: Transform,
    pub liftable: bool,
}

impl GraspNode {
    pub fn from_solver(solver: &dyn NodeSolver, role: Role, arm: ArmId, grasp_id: usize, slot: &PoseSlot) -> Option<Self> {
        let data = solver.solve(arm, grasp_id, slot)?;
        Some(GraspNode {
            id: NodeId::new(role, arm, slot.pose, grasp_id),
            role,
            arm,
            grasp_id,
            pose: slot.pose,
            q: data.q,
            jawwidth: data.jawwidth,
            object_world: slot.world,
            gripper_world: data.gripper_world,
            liftable: data.liftable,
        })
    }

    /// Gripper pose in the object frame.
    pub fn object_grasp(&self) -> Transform {
        self.object_world.inverse().compose(&self.gripper_world)
    }

    /// Identity of the modal configuration space the node lives in.
    pub fn modal_key(&self) -> (Role, PoseRef) {
        (self.role, self.pose)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// Regrasp at a fixed object pose: release one grasp, take another.
    Transfer,
    /// Pick-and-place between two table poses with the same grasp.
    Transit,
    /// Exchange of the object between the arms at a handover pose.
    HandoverTransfer,
    /// Carrying the object between a table pose and a handover pose.
    HandoverTransit,
    /// Pick-and-place straight from the initial pose to the goal pose.
    DirectInitGoal,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 5] = [
        EdgeKind::Transfer,
        EdgeKind::Transit,
        EdgeKind::HandoverTransfer,
        EdgeKind::HandoverTransit,
        EdgeKind::DirectInitGoal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Transfer => "transfer",
            EdgeKind::Transit => "transit",
            EdgeKind::HandoverTransfer => "handover_transfer",
            EdgeKind::HandoverTransit => "handover_transit",
            EdgeKind::DirectInitGoal => "direct_init_goal",
        }
    }

    /// Edges along which the object is picked up and carried.
    pub fn moves_object(self) -> bool {
        matches!(self, EdgeKind::Transit | EdgeKind::HandoverTransit | EdgeKind::DirectInitGoal)
    }
}

/// Undirected edge with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn new(x: NodeId, y: NodeId, kind: EdgeKind) -> Edge {
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        Edge { a, b, kind }
    }

    pub fn other(&self, n: NodeId) -> NodeId {
        if n == self.a {
            self.b
        } else {
            self.a
        }
    }
}

fn q_differs(a: &[f64], b: &[f64]) -> bool {
    a.len() != b.len() || a.iter().zip(b).any(|(x, y)| (x - y).abs() > SAME_Q_TOL)
}

fn same_world(a: &Transform, b: &Transform) -> bool {
    a.approx_eq(b, 1e-9, 1e-9)
}

/// The defining predicate of every edge kind, evaluated on a node pair.
///
/// * transfer: same modal space (role and table pose), same arm, different joints.
/// * transit: same arm and grasp at two different table poses, both liftable,
///   equal object-frame grasps; `direct_init_goal` when it joins the initial and
///   goal partial graphs.
/// * handover_transit: same arm and grasp, one liftable table node and one
///   library handover node, equal object-frame grasps.
/// * handover_transfer: same handover pose, different arms, compatible grippers.
pub fn edge_kind(a: &GraspNode, b: &GraspNode, disjoint: &dyn Fn(usize, usize) -> bool) -> Option<EdgeKind> {
    if a.id == b.id {
        return None;
    }
    let same_modal = a.modal_key() == b.modal_key();
    if a.arm == b.arm {
        if same_modal {
            return (a.pose.kind == PoseKind::Placement && q_differs(&a.q, &b.q)).then_some(EdgeKind::Transfer);
        }
        if a.grasp_id != b.grasp_id || !a.object_grasp().approx_eq(&b.object_grasp(), GRASP_EQ_TOL, GRASP_EQ_TOL) {
            return None;
        }
        return match (a.pose.kind, b.pose.kind) {
            (PoseKind::Placement, PoseKind::Placement) => {
                if !(a.liftable && b.liftable) {
                    return None;
                }
                let roles = (a.role.min(b.role), a.role.max(b.role));
                match roles {
                    (Role::Initial, Role::Goal) => Some(EdgeKind::DirectInitGoal),
                    (x, y) if x == y && x != Role::Library => None,
                    _ if same_world(&a.object_world, &b.object_world) => None,
                    _ => Some(EdgeKind::Transit),
                }
            }
            (PoseKind::Placement, PoseKind::Handover) => {
                (a.liftable && b.role == Role::Library).then_some(EdgeKind::HandoverTransit)
            }
            (PoseKind::Handover, PoseKind::Placement) => {
                (b.liftable && a.role == Role::Library).then_some(EdgeKind::HandoverTransit)
            }
            (PoseKind::Handover, PoseKind::Handover) => None,
        };
    }
    if same_modal && a.pose.kind == PoseKind::Handover {
        let (l, r) = if a.arm == ArmId::Left { (a, b) } else { (b, a) };
        return disjoint(l.grasp_id, r.grasp_id).then_some(EdgeKind::HandoverTransfer);
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Species {
    Partial { role: Role, arm: ArmId },
    SingleArm { arm: ArmId },
    Handover,
    DualArm,
    Super,
}

impl std::fmt::Display for Species {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Species::Partial { role, arm } => {
                let r = if *role == Role::Goal { "goal" } else { "initial" };
                write!(f, "partial_{r}_{arm}")
            }
            Species::SingleArm { arm } => write!(f, "single_arm_{arm}"),
            Species::Handover => f.write_str("handover"),
            Species::DualArm => f.write_str("dual_arm"),
            Species::Super => f.write_str("super"),
        }
    }
}

/// Build parameters and the identity of the grasp/pose universe.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Digest of the grasp set and pose sets the graph was built from.
    pub universe: String,
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "GraphRepr", into = "GraphRepr")]
pub struct RegraspGraph {
    pub species: Species,
    pub provenance: Provenance,
    nodes: BTreeMap<NodeId, GraspNode>,
    edges: BTreeSet<Edge>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    species: Species,
    provenance: Provenance,
    nodes: Vec<GraspNode>,
    edges: Vec<Edge>,
}

impl From<GraphRepr> for RegraspGraph {
    fn from(r: GraphRepr) -> Self {
        RegraspGraph {
            species: r.species,
            provenance: r.provenance,
            nodes: r.nodes.into_iter().map(|n| (n.id, n)).collect(),
            edges: r.edges.into_iter().collect(),
        }
    }
}

impl From<RegraspGraph> for GraphRepr {
    fn from(g: RegraspGraph) -> Self {
        GraphRepr {
            species: g.species,
            provenance: g.provenance,
            nodes: g.nodes.into_values().collect(),
            edges: g.edges.into_iter().collect(),
        }
    }
}

impl RegraspGraph {
    pub fn empty(species: Species, provenance: Provenance) -> Self {
        RegraspGraph {
            species,
            provenance,
            nodes: BTreeMap::new(),
            edges: BTreeSet::new(),
        }
    }

    /// Graph over `nodes` with every edge the predicate admits.
    pub fn from_nodes(
        species: Species,
        provenance: Provenance,
        nodes: Vec<GraspNode>,
        disjoint: &dyn Fn(usize, usize) -> bool,
    ) -> Self {
        let mut g = RegraspGraph::empty(species, provenance);
        let ids: Vec<NodeId> = nodes.iter().map(|n| n.id).collect();
        for n in nodes {
            g.nodes.insert(n.id, n);
        }
        g.connect(&ids, disjoint);
        g
    }

    pub fn nodes(&self) -> impl Iterator<Item = &GraspNode> {
        self.nodes.values()
    }

    pub fn node(&self, id: NodeId) -> Option<&GraspNode> {
        self.nodes.get(&id)
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn edge_set(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn count_edges(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    /// The edge joining two nodes, if any.
    pub fn edge_between(&self, x: NodeId, y: NodeId) -> Option<Edge> {
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        EdgeKind::ALL
            .iter()
            .map(|k| Edge { a, b, kind: *k })
            .find(|e| self.edges.contains(e))
    }

    /// Evaluates the edge predicate between each node of `new_ids` and every
    /// node sharing its modal space or its (arm, grasp) pair.
    fn connect(&mut self, new_ids: &[NodeId], disjoint: &dyn Fn(usize, usize) -> bool) {
        let mut by_modal: BTreeMap<(Role, PoseRef), Vec<NodeId>> = BTreeMap::new();
        let mut by_grasp: BTreeMap<(ArmId, usize), Vec<NodeId>> = BTreeMap::new();
        for n in self.nodes.values() {
            by_modal.entry(n.modal_key()).or_default().push(n.id);
            by_grasp.entry((n.arm, n.grasp_id)).or_default().push(n.id);
        }
        let mut found = Vec::new();
        for id in new_ids {
            let n = &self.nodes[id];
            let candidates = by_modal[&n.modal_key()].iter().chain(by_grasp[&(n.arm, n.grasp_id)].iter());
            for other in candidates {
                if other == id {
                    continue;
                }
                if let Some(kind) = edge_kind(n, &self.nodes[other], disjoint) {
                    found.push(Edge::new(*id, *other, kind));
                }
            }
        }
        self.edges.extend(found);
    }

    /// Adds `other`'s nodes and edges, then connects the new nodes to everything.
    fn absorb(&mut self, other: &RegraspGraph, link: bool, disjoint: &dyn Fn(usize, usize) -> bool) {
        let new_ids: Vec<NodeId> = other.nodes.keys().filter(|id| !self.nodes.contains_key(id)).copied().collect();
        for (id, n) in &other.nodes {
            self.nodes.entry(*id).or_insert_with(|| n.clone());
        }
        self.edges.extend(other.edges.iter().copied());
        if link {
            self.connect(&new_ids, disjoint);
        }
    }

    /// Re-evaluates the predicate on every edge; returns the first that fails.
    pub fn revalidate(&self, disjoint: &dyn Fn(usize, usize) -> bool) -> Result<(), Edge> {
        for e in &self.edges {
            let (Some(a), Some(b)) = (self.nodes.get(&e.a), self.nodes.get(&e.b)) else {
                return Err(*e);
            };
            if edge_kind(a, b, disjoint) != Some(e.kind) {
                return Err(*e);
            }
        }
        Ok(())
    }

    /// Sorted neighbor lists, skipping `removed` edges.
    pub fn adjacency(&self, removed: &BTreeSet<Edge>) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut adj: BTreeMap<NodeId, Vec<NodeId>> = self.nodes.keys().map(|k| (*k, Vec::new())).collect();
        for e in self.edges.difference(removed) {
            adj.get_mut(&e.a).expect("edge endpoint").push(e.b);
            adj.get_mut(&e.b).expect("edge endpoint").push(e.a);
        }
        for v in adj.values_mut() {
            v.sort();
            v.dedup();
        }
        adj
    }

    /// Subgraph induced by the nodes that satisfy `keep`.
    pub fn filtered(&self, species: Species, keep: impl Fn(&GraspNode) -> bool) -> RegraspGraph {
        let nodes: BTreeMap<NodeId, GraspNode> =
            self.nodes.iter().filter(|(_, n)| keep(n)).map(|(k, n)| (*k, n.clone())).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| nodes.contains_key(&e.a) && nodes.contains_key(&e.b))
            .copied()
            .collect();
        RegraspGraph {
            species,
            provenance: self.provenance.clone(),
            nodes,
            edges,
        }
    }
}

/// Every edge the predicate admits over all node pairs; the reference for
/// the indexed construction.
pub fn brute_force_edges(nodes: &[GraspNode], disjoint: &dyn Fn(usize, usize) -> bool) -> BTreeSet<Edge> {
    let mut out = BTreeSet::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            if let Some(k) = edge_kind(a, b, disjoint) {
                out.insert(Edge::new(a.id, b.id, k));
            }
        }
    }
    out
}

fn placement_slot(p: &ObjectPose) -> PoseSlot {
    PoseSlot {
        pose: PoseRef::placement(p.pose_id),
        world: p.world,
    }
}

fn handover_slot(p: &HandoverPose) -> PoseSlot {
    PoseSlot {
        pose: PoseRef::handover(p.pose_id),
        world: p.world,
    }
}

fn disjoint_of(solver: &dyn NodeSolver) -> impl Fn(usize, usize) -> bool + '_ {
    move |l, r| solver.grippers_disjoint(l, r)
}

/// Single-arm library graph over all table poses.
pub fn build_single_arm_graph(
    solver: &dyn NodeSolver,
    arm: ArmId,
    poses: &[ObjectPose],
    provenance: Provenance,
) -> RegraspGraph {
    let mut nodes = Vec::new();
    for pose in poses {
        let slot = placement_slot(pose);
        for g in 0..solver.grasp_count() {
            nodes.extend(GraspNode::from_solver(solver, Role::Library, arm, g, &slot));
        }
    }
    RegraspGraph::from_nodes(Species::SingleArm { arm }, provenance, nodes, &disjoint_of(solver))
}

/// Single-pose graph of the initial or goal pose for one arm.
pub fn build_partial_graph(
    solver: &dyn NodeSolver,
    arm: ArmId,
    role: Role,
    pose: &ObjectPose,
    provenance: Provenance,
) -> RegraspGraph {
    assert!(role != Role::Library, "partial graphs belong to the initial or goal pose");
    let slot = placement_slot(pose);
    let nodes = (0..solver.grasp_count())
        .filter_map(|g| GraspNode::from_solver(solver, role, arm, g, &slot))
        .collect();
    RegraspGraph::from_nodes(Species::Partial { role, arm }, provenance, nodes, &disjoint_of(solver))
}

/// Handover graph: nodes for every arm at every handover pose, edges between
/// compatible opposite-arm grasps at the same pose.
pub fn build_handover_graph(
    solver: &dyn NodeSolver,
    arms: &[ArmId],
    poses: &[HandoverPose],
    provenance: Provenance,
) -> RegraspGraph {
    let mut nodes = Vec::new();
    for pose in poses {
        let slot = handover_slot(pose);
        for &arm in arms {
            for g in 0..solver.grasp_count() {
                nodes.extend(GraspNode::from_solver(solver, Role::Library, arm, g, &slot));
            }
        }
    }
    RegraspGraph::from_nodes(Species::Handover, provenance, nodes, &disjoint_of(solver))
}

fn check_universe(parts: &[&RegraspGraph]) -> Result<(), GraphError> {
    let first = &parts[0].provenance.universe;
    if parts.iter().any(|g| &g.provenance.universe != first) {
        return Err(GraphError::InconsistentUniverse);
    }
    Ok(())
}

/// Union of the two single-arm graphs and the handover graph, joined by
/// handover_transit edges.
pub fn build_dual_arm_graph(
    left: &RegraspGraph,
    right: &RegraspGraph,
    handover: &RegraspGraph,
    disjoint: &dyn Fn(usize, usize) -> bool,
) -> Result<RegraspGraph, GraphError> {
    check_universe(&[left, right, handover])?;
    let mut g = RegraspGraph::empty(Species::DualArm, left.provenance.clone());
    g.absorb(left, false, disjoint);
    g.absorb(right, false, disjoint);
    g.absorb(handover, true, disjoint);
    Ok(g)
}

/// Super graph: the dual-arm graph plus the initial and goal partial graphs
/// connected through transit, handover_transit and direct_init_goal edges.
pub fn build_super_graph(
    dual: &RegraspGraph,
    partials: &[&RegraspGraph],
    disjoint: &dyn Fn(usize, usize) -> bool,
) -> Result<RegraspGraph, GraphError> {
    let mut all = vec![dual];
    all.extend(partials.iter().copied());
    check_universe(&all)?;
    let mut g = dual.clone();
    g.species = Species::Super;
    for p in partials {
        g.absorb(p, true, disjoint);
    }
    Ok(g)
}
