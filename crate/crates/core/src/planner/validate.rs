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


//! Independent replay of a plan against its scene.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geometry::Transform;
use crate::kinematics::ArmId;
use crate::placement::is_statically_stable;
use crate::scene::{ArmState, Scene, World};

use super::{GraspAction, Plan};

/// Pose agreement required between replayed and declared object poses.
pub const REPLAY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanViolation {
    #[error("segment {segment}: does not continue from the previous segment's end node")]
    Discontinuous { segment: usize },
    #[error("segment {segment}, waypoint {waypoint}: joint limits violated")]
    JointLimit { segment: usize, waypoint: usize },
    #[error("segment {segment}, waypoint {waypoint}: collision")]
    Collision { segment: usize, waypoint: usize },
    #[error("segment {segment}: object pose differs from the declared track")]
    ObjectTrack { segment: usize },
    #[error("segment {segment}, waypoint {waypoint}: {detail}")]
    GraspSequence {
        segment: usize,
        waypoint: usize,
        detail: String,
    },
    #[error("object does not end at the goal pose or is still held")]
    GoalMismatch,
    #[error("plan has no segments")]
    Empty,
}

fn close(a: &Transform, b: &Transform) -> bool {
    a.approx_eq(b, REPLAY_TOL, REPLAY_TOL)
}

/// Replays every waypoint with forward kinematics and collision checks,
/// tracks the object through grip and release events, and compares the
/// result with the declared object poses.
pub fn validate_plan(scene: &Scene, plan: &Plan) -> Result<(), PlanViolation> {
    if plan.segments.is_empty() {
        return Err(PlanViolation::Empty);
    }
    let world = World::new(scene);
    let mut q: BTreeMap<ArmId, Vec<f64>> = BTreeMap::new();
    let mut jaw: BTreeMap<ArmId, f64> = BTreeMap::new();
    for arm in scene.robot.arm_ids() {
        let rest = plan
            .rest
            .iter()
            .find(|(a, _)| *a == arm)
            .map(|(_, q)| q.clone())
            .or_else(|| scene.rest(arm).ok())
            .unwrap_or_else(|| scene.robot.arm(arm).expect("arm exists").home());
        q.insert(arm, rest);
        jaw.insert(arm, scene.robot.gripper(arm).expect("arm exists").max_jawwidth);
    }
    let mut holders: Vec<(ArmId, Transform)> = Vec::new();
    let mut object = plan.initial_object;
    let mut prev_end = plan.path.first().copied();
    let held = |holders: &[(ArmId, Transform)], arm: ArmId| holders.iter().find(|(a, _)| *a == arm).map(|(_, g)| *g);

    for (si, seg) in plan.segments.iter().enumerate() {
        if Some(seg.start_node) != prev_end {
            return Err(PlanViolation::Discontinuous { segment: si });
        }
        prev_end = Some(seg.end_node);
        if !close(&object, &seg.object_start) {
            return Err(PlanViolation::ObjectTrack { segment: si });
        }
        for (wi, w) in seg.waypoints.iter().enumerate() {
            let arm = w.arm_id;
            let model = scene.robot.arm(arm).map_err(|_| PlanViolation::JointLimit { segment: si, waypoint: wi })?;
            if model.check_limits(&w.q).is_err() {
                return Err(PlanViolation::JointLimit { segment: si, waypoint: wi });
            }
            q.insert(arm, w.q.clone());
            jaw.insert(arm, w.jawwidth);
            let tip = model.fk(&w.q).expect("within limits");
            if let Some(g) = held(&holders, arm) {
                object = tip.compose(&g.inverse());
            }
            // With two holders neither may drag the object out of the other hand.
            for (other, g) in &holders {
                let t = scene.robot.arm(*other).expect("arm").fk(&q[other]).expect("within limits");
                if !close(&t.compose(&g.inverse()), &object) {
                    return Err(PlanViolation::ObjectTrack { segment: si });
                }
            }
            let state = |a: ArmId, jaw: &BTreeMap<ArmId, f64>| ArmState {
                arm: a,
                q: q[&a].clone(),
                jawwidth: jaw[&a],
                held: held(&holders, a),
            };
            let other = q.keys().find(|a| **a != arm).map(|a| state(*a, &jaw));
            let resting = if holders.is_empty() { Some(object) } else { None };
            if !world.state_free(&state(arm, &jaw), other.as_ref(), resting.as_ref(), true) {
                return Err(PlanViolation::Collision { segment: si, waypoint: wi });
            }
            for ev in seg.events.iter().filter(|e| e.waypoint == wi) {
                let fail = |detail: &str| PlanViolation::GraspSequence {
                    segment: si,
                    waypoint: wi,
                    detail: detail.to_string(),
                };
                if ev.arm != arm {
                    // Events act on the arm that reached the waypoint.
                    return Err(fail("event arm does not own the waypoint"));
                }
                match ev.action {
                    GraspAction::Grip => {
                        if held(&holders, arm).is_some() {
                            return Err(fail("grip while already holding"));
                        }
                        let g = ev.grasp.ok_or_else(|| fail("grip without a grasp"))?;
                        if !close(&tip.compose(&g.inverse()), &object) {
                            return Err(fail("gripper is not at the declared grasp"));
                        }
                        holders.push((arm, g));
                    }
                    GraspAction::Release => {
                        if held(&holders, arm).is_none() {
                            return Err(fail("release without holding"));
                        }
                        holders.retain(|(a, _)| *a != arm);
                        let margin = (scene.discretization.min_margin - REPLAY_TOL).max(0.0);
                        if holders.is_empty() && !is_statically_stable(&scene.object, &object, scene.table.height, margin) {
                            return Err(fail("object released in an unstable pose"));
                        }
                    }
                }
            }
        }
        if seg.events.iter().any(|e| e.waypoint >= seg.waypoints.len()) {
            return Err(PlanViolation::GraspSequence {
                segment: si,
                waypoint: seg.waypoints.len(),
                detail: "event past the last waypoint".into(),
            });
        }
        if !close(&object, &seg.object_end) {
            return Err(PlanViolation::ObjectTrack { segment: si });
        }
    }
    if prev_end != plan.path.last().copied() || !holders.is_empty() || !close(&object, &plan.goal_object) {
        return Err(PlanViolation::GoalMismatch);
    }
    Ok(())
}
