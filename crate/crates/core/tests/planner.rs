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

use std::collections::BTreeSet;
use std::f64::consts::PI;

use common::{fixture_sized, oracle, structurally_valid, two_handovers, two_routes, Structural, MODES, WALL_A, WALL_C};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regrasp::graph::{Edge, NodeId, PoseKind};
use regrasp::kinematics::ArmId;
use regrasp::planner::ddrrt::{max_norm, motion_free};
use regrasp::planner::planar::{cell_of, grid_connected, PlanarArm};
use regrasp::planner::*;

fn check_search(seed: u64) -> Result<(), TestCaseError> {
    let fx = fixture_sized(seed, 8, 10, 4);
    let (_, graph) = common::build(&fx);
    prop_assert!(graph.node_count() <= 500);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let edges: Vec<Edge> = graph.edges().copied().collect();
    let removed: BTreeSet<Edge> = edges.iter().filter(|_| rng.gen_bool(0.1)).copied().collect();
    for mode in MODES {
        for cut in [BTreeSet::new(), removed.clone()] {
            let got = search_min_regrasp(&graph, mode, &cut);
            let want = oracle(&graph, mode, &cut);
            prop_assert_eq!(got.as_ref().map(|r| r.cost), want.as_ref().map(|w| w.0), "{:?}", mode);
            if let (Some(r), Some((_, path))) = (&got, &want) {
                prop_assert_eq!(&r.path, path);
                prop_assert_eq!(r.path.len(), r.cost + 1);
                for w in r.path.windows(2) {
                    let e = graph.edge_between(w[0], w[1]);
                    prop_assert!(e.is_some_and(|e| !cut.contains(&e)));
                }
            }
        }
    }
    Ok(())
}

#[test]
fn search_matches_bfs_oracle_on_fixed_graphs() {
    for seed in 0..60 {
        check_search(seed).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn search_matches_bfs_oracle(seed in any::<u64>()) {
        check_search(seed)?;
    }
}

#[test]
fn arm_modes_keep_to_their_nodes() {
    for seed in 0..30 {
        let (_, graph) = common::build(&fixture_sized(seed, 6, 6, 3));
        for (mode, arm) in [(AllowedArms::LeftOnly, ArmId::Left), (AllowedArms::RightOnly, ArmId::Right)] {
            if let Some(r) = search_min_regrasp(&graph, mode, &BTreeSet::new()) {
                assert!(r.path.iter().all(|n| n.arm() == arm && n.pose().kind == PoseKind::Placement));
            }
        }
        if let Some(r) = search_min_regrasp(&graph, AllowedArms::Both, &BTreeSet::new()) {
            assert_ne!(r.path[0].arm(), r.path.last().unwrap().arm());
        }
    }
}

fn random_obstacles(rng: &mut ChaCha8Rng) -> Vec<[f64; 4]> {
    (0..rng.gen_range(1..=3))
        .map(|_| {
            let c = [rng.gen_range(-1.6..1.6), rng.gen_range(-1.6..1.6)];
            let h = [rng.gen_range(0.05..0.3), rng.gen_range(0.05..0.3)];
            [c[0] - h[0], c[1] - h[1], c[0] + h[0], c[1] + h[1]]
        })
        .collect()
}

fn random_free(rng: &mut ChaCha8Rng, arm: &PlanarArm) -> Vec<f64> {
    loop {
        let q = vec![rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
        if arm.is_free(&q) {
            return q;
        }
    }
}

/// DD-RRT succeeds exactly on the queries a fine occupancy grid connects,
/// counting only queries on which two grid resolutions agree.
#[test]
fn ddrrt_agrees_with_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let params = RrtParams::default();
    let (mut connected, mut separated) = (0, 0);
    for case in 0..40 {
        let arm = PlanarArm::new([1.0, 0.8], random_obstacles(&mut rng));
        let (a, b) = (random_free(&mut rng, &arm), random_free(&mut rng, &arm));
        let verdict = |n: usize| grid_connected(&arm.occupancy(n), n, cell_of(n, &a), cell_of(n, &b));
        let (coarse, fine) = (verdict(180), verdict(360));
        let result = plan_ddrrt(&arm, &a, &b, &params, &mut ChaCha8Rng::seed_from_u64(case));
        if let Ok(path) = &result {
            assert_eq!(path.first().unwrap(), &a);
            assert_eq!(path.last().unwrap(), &b);
            for w in path.windows(2) {
                assert!(max_norm(&w[0], &w[1]) <= params.step + 1e-12);
                assert!(motion_free(&arm, &w[0], &w[1], params.resolution / 4.0), "case {case}");
            }
        }
        if coarse != fine {
            continue;
        }
        assert_eq!(result.is_ok(), fine, "case {case}");
        if fine {
            connected += 1;
        } else {
            separated += 1;
        }
    }
    assert!(connected >= 10 && separated >= 3, "{connected} connected, {separated} separated");
}

#[test]
fn ddrrt_rejects_colliding_endpoints() {
    let arm = PlanarArm::new([1.0, 0.8], vec![[0.9, -0.1, 1.1, 0.1]]);
    let r = plan_ddrrt(&arm, &[0.0, 0.0], &[1.0, 1.0], &RrtParams::default(), &mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(r, Err(RrtError::InvalidEndpoint));
}

fn replan(walls: &[[f64; 4]], seed: u64) -> (usize, Result<Plan, NoPlan>) {
    let fx = two_routes();
    let arm = PlanarArm::new([1.0, 0.8], walls.to_vec());
    for q in fx.configs.values() {
        assert!(arm.is_free(q), "{q:?}");
    }
    let mut realizer = ConfigRealizer::new(arm, ArmId::Left, fx.configs.clone(), seed);
    (fx.graph.edge_count(), plan_with_replanning(&fx.graph, AllowedArms::LeftOnly, &mut realizer))
}

fn names(path: &[NodeId]) -> Vec<String> {
    path.iter().map(|n| n.to_string()).collect()
}

#[test]
fn walled_route_is_replaced_by_the_other() {
    let (_, plan) = replan(&[WALL_A], 1);
    let plan = plan.expect("the long route is open");
    assert_eq!(plan.iterations, 2);
    assert_eq!(plan.removed_edges.len(), 1);
    let cut = plan.removed_edges[0];
    assert_eq!(names(&[cut.a, cut.b]), ["l_p2_g0", "l_p2_g1"]);
    assert_eq!(names(&plan.path), ["il_p0_g0", "l_p3_g0", "l_p3_g2", "l_p4_g2", "l_p4_g1", "gl_p1_g1"]);
    assert_eq!(plan.segments.len(), 5);
    for (s, w) in plan.segments.iter().zip(plan.path.windows(2)) {
        assert_eq!((s.start_node, s.end_node), (w[0], w[1]));
    }
}

#[test]
fn open_fixture_takes_the_short_route() {
    let (_, plan) = replan(&[], 1);
    let plan = plan.unwrap();
    assert_eq!((plan.iterations, plan.removed_edges.len()), (1, 0));
    assert_eq!(names(&plan.path), ["il_p0_g0", "l_p2_g0", "l_p2_g1", "gl_p1_g1"]);
}

#[test]
fn both_routes_walled_gives_no_plan() {
    let (edges, r) = replan(&[WALL_A, WALL_C], 1);
    let none = r.unwrap_err();
    assert_eq!(edges, 10);
    assert_eq!(none.iterations, 3);
    assert!(none.iterations <= edges);
    assert_eq!(none.removed_edges.len(), 2);
}

#[test]
fn replanning_is_deterministic() {
    for walls in [vec![WALL_A], vec![WALL_A, WALL_C]] {
        let (_, a) = replan(&walls, 5);
        let (_, b) = replan(&walls, 5);
        assert_eq!(a, b);
    }
}

#[test]
fn unique_shortest_plan_with_two_handovers_is_returned() {
    let graph = two_handovers();
    let plan = plan_with_replanning(&graph, AllowedArms::Auto, &mut Structural).unwrap();
    assert_eq!(
        names(&plan.path),
        ["ir_p0_g0", "r_h0_g0", "l_h0_g2", "l_p2_g2", "l_p2_g3", "l_h0_g3", "r_h0_g1", "gr_p1_g1"]
    );
    assert_eq!(plan.handovers, 2);
    assert_eq!(plan.arms_used.strategy, regrasp::planner::Strategy::Dual);
    assert!(structurally_valid(&graph, &plan));
    // Removing any path edge leaves no plan, so the shortest path is unique.
    for w in plan.path.windows(2) {
        let cut = BTreeSet::from([graph.edge_between(w[0], w[1]).unwrap()]);
        assert!(search_min_regrasp(&graph, AllowedArms::Auto, &cut).is_none());
    }
    assert!(search_min_regrasp(&graph, AllowedArms::RightOnly, &BTreeSet::new()).is_none());
}
