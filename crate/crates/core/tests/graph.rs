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


mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{build, fixture, oracle_edges, oracle_nodes, OracleNode, ARMS};
use proptest::prelude::*;
use regrasp::fixtures::default_scene;
use regrasp::graph::*;
use regrasp::kinematics::ArmId;
use regrasp::pipeline::build_library;

fn check_fixture(seed: u64) -> Result<(), TestCaseError> {
    let fx = fixture(seed);
    let nodes = oracle_nodes(&fx);
    prop_assert!(nodes.len() <= 200);
    let (dual, sup) = build(&fx);

    let want_ids: BTreeSet<NodeId> = nodes.iter().map(|n| n.id).collect();
    let got_ids: BTreeSet<NodeId> = sup.nodes().map(|n| n.id).collect();
    prop_assert_eq!(&got_ids, &want_ids);
    prop_assert_eq!(sup.edge_set(), &oracle_edges(&nodes, &fx.solver));

    let library: Vec<OracleNode> = nodes.into_iter().filter(|n| n.role == Role::Library).collect();
    prop_assert_eq!(dual.node_count(), library.len());
    prop_assert_eq!(dual.edge_set(), &oracle_edges(&library, &fx.solver));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Dual-arm and super graphs hold exactly the edges the rules admit.
    #[test]
    fn composed_graphs_match_edge_oracle(seed in any::<u64>()) {
        check_fixture(seed)?;
    }
}

#[test]
fn fixed_fixtures_match_edge_oracle() {
    for seed in 0..24 {
        check_fixture(seed).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    }
}

#[test]
fn fixtures_exercise_every_edge_kind() {
    let mut seen = BTreeSet::new();
    for seed in 0..24 {
        let (_, sup) = build(&fixture(seed));
        seen.extend(sup.edges().map(|e| e.kind));
    }
    assert_eq!(seen, EdgeKind::ALL.into_iter().collect());
}

#[test]
fn mixed_universes_are_rejected() {
    let fx = fixture(3);
    let s = &fx.solver;
    let a = Provenance {
        universe: "a".into(),
        ..Provenance::default()
    };
    let b = Provenance {
        universe: "b".into(),
        ..Provenance::default()
    };
    let disjoint = |l: usize, r: usize| s.grippers_disjoint(l, r);
    let left = build_single_arm_graph(s, ArmId::Left, &fx.poses, a.clone());
    let right = build_single_arm_graph(s, ArmId::Right, &fx.poses, a.clone());
    let hand = build_handover_graph(s, &ARMS, &fx.handover, b.clone());
    assert_eq!(build_dual_arm_graph(&left, &right, &hand, &disjoint).unwrap_err(), GraphError::InconsistentUniverse);
    let hand = build_handover_graph(s, &ARMS, &fx.handover, a.clone());
    let dual = build_dual_arm_graph(&left, &right, &hand, &disjoint).unwrap();
    let partial = build_partial_graph(s, ArmId::Left, Role::Initial, &fx.initial, b);
    assert_eq!(build_super_graph(&dual, &[&partial], &disjoint).unwrap_err(), GraphError::InconsistentUniverse);
}

#[test]
fn default_scene_graphs_are_consistent() {
    let scene = default_scene();
    let lib = build_library(&scene).unwrap();
    let dual = lib.dual_graph(&scene).unwrap();
    let solver = SceneSolver::new(&scene, &lib.grasps);
    let disjoint = |l: usize, r: usize| solver.grippers_disjoint(l, r);
    let nodes: Vec<GraspNode> = dual.nodes().cloned().collect();
    let by_id: BTreeMap<NodeId, &GraspNode> = nodes.iter().map(|n| (n.id, n)).collect();

    // One node per feasible (grasp, table pose) pair at most.
    for (arm, g) in &lib.single_arm {
        let bound = lib.grasps.len() * lib.poses.len();
        assert!(g.node_count() <= bound, "{arm:?}: {} > {bound}", g.node_count());
        println!("{arm:?}: {} of {bound} grasp-pose pairs feasible", g.node_count());
    }

    // Indexed construction agrees with the all-pairs scan.
    assert_eq!(&brute_force_edges(&nodes, &disjoint), dual.edge_set());

    let mut transit = 0;
    for e in dual.edges().filter(|e| matches!(e.kind, EdgeKind::Transit | EdgeKind::HandoverTransit)) {
        let (a, b) = (by_id[&e.a], by_id[&e.b]);
        assert_eq!(a.grasp_id, b.grasp_id);
        // Object-frame grasp recomputed from each node's world poses.
        let ga = a.object_world.inverse().compose(&a.gripper_world);
        let gb = b.object_world.inverse().compose(&b.gripper_world);
        assert!(ga.translation_distance(&gb) <= 1e-6 && ga.rotation_distance(&gb) <= 1e-6, "edge {e:?}");
        assert!(a.liftable || a.pose.kind == PoseKind::Handover);
        assert!(b.liftable || b.pose.kind == PoseKind::Handover);
        transit += 1;
    }
    assert!(transit > 0);
    for e in dual.edges().filter(|e| e.kind == EdgeKind::HandoverTransfer) {
        let (a, b) = (by_id[&e.a], by_id[&e.b]);
        assert_ne!(a.arm, b.arm);
        assert_eq!(a.pose, b.pose);
        assert!(a.object_world.approx_eq(&b.object_world, 1e-12, 1e-12));
    }
}
