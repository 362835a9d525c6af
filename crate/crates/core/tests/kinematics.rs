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

use nalgebra::Matrix4;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regrasp::fixtures::default_robot;
use regrasp::geometry::transform::rotation_log;
use regrasp::geometry::{Transform, Vec3};
use regrasp::kinematics::{jacobian_rank, object_frame_grasp, ArmConfig, ArmId, ArmModel, IkParams};

fn random_q(arm: &ArmModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
    arm.joints.iter().map(|j| rng.gen_range(j.limits[0]..j.limits[1])).collect()
}

/// Homogeneous matrix of a rotation about a unit axis (Rodrigues, written out).
fn rodrigues(axis: Vec3, a: f64) -> Matrix4<f64> {
    let k = axis.normalize();
    let (s, c) = a.sin_cos();
    let v = 1.0 - c;
    Matrix4::new(
        c + k.x * k.x * v,
        k.x * k.y * v - k.z * s,
        k.x * k.z * v + k.y * s,
        0.0,
        k.y * k.x * v + k.z * s,
        c + k.y * k.y * v,
        k.y * k.z * v - k.x * s,
        0.0,
        k.z * k.x * v - k.y * s,
        k.z * k.y * v + k.x * s,
        c + k.z * k.z * v,
        0.0,
        0.0,
        0.0,
        0.0,
        1.0,
    )
}

fn naive_fk(arm: &ArmModel, q: &[f64]) -> Matrix4<f64> {
    let mut m = arm.base.to_homogeneous();
    for (j, a) in arm.joints.iter().zip(q) {
        m = m * j.origin.to_homogeneous() * rodrigues(j.axis, *a);
    }
    m * arm.tool.to_homogeneous()
}

#[test]
fn fk_matches_chain_product_oracle() {
    let robot = default_robot();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for arm in &robot.arms {
        for _ in 0..200 {
            let q = random_q(arm, &mut rng);
            let t = arm.fk(&q).unwrap().to_homogeneous();
            assert!((t - naive_fk(arm, &q)).abs().max() < 1e-12);
        }
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let robot = default_robot();
    let arm = robot.arm(ArmId::Left).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let eps = 1e-7;
    for _ in 0..50 {
        let mut q = random_q(arm, &mut rng);
        for (v, j) in q.iter_mut().zip(&arm.joints) {
            *v = v.clamp(j.limits[0] + 1e-3, j.limits[1] - 1e-3);
        }
        let jac = arm.jacobian(&q).unwrap();
        let base = arm.fk(&q).unwrap();
        for i in 0..arm.dof() {
            let mut qp = q.clone();
            qp[i] += eps;
            let moved = arm.fk(&qp).unwrap();
            let lin = (moved.translation - base.translation) / eps;
            let ang = rotation_log(&(moved.rotation * base.rotation.transpose())) / eps;
            let col = jac.column(i);
            let err = (0..3)
                .map(|r| (col[r] - lin[r]).abs().max((col[r + 3] - ang[r]).abs()))
                .fold(0.0, f64::max);
            assert!(err <= 1e-5, "column {i} differs by {err}");
        }
    }
}

#[test]
fn stretched_arm_is_singular() {
    let robot = default_robot();
    let arm = robot.arm(ArmId::Right).unwrap();
    // All zero: the arm is fully stretched and joints 4 and 6 share an axis.
    let jac = arm.jacobian(&[0.0; 6]).unwrap();
    assert!(jacobian_rank(&jac, 1e-9) < 6);
}

#[test]
fn ik_round_trips_on_random_reachable_targets() {
    let robot = default_robot();
    let arm = robot.arm(ArmId::Left).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = IkParams::default();
    let mut solved = 0;
    for _ in 0..100 {
        let q = random_q(arm, &mut rng);
        let target = arm.fk(&q).unwrap();
        let sol = arm.ik(&target, &arm.home(), &params).expect("fk-generated target is reachable");
        arm.check_limits(&sol.q).unwrap();
        let got = arm.fk(&sol.q).unwrap();
        assert!(got.translation_distance(&target) <= 1e-6);
        assert!(got.rotation_distance(&target) <= 1e-5);
        solved += 1;
    }
    assert_eq!(solved, 100);
}

#[test]
fn ik_at_solution_returns_seed() {
    let robot = default_robot();
    let arm = robot.arm(ArmId::Left).unwrap();
    let q0 = vec![0.3, -0.4, 1.0, 0.2, 0.5, -0.1];
    let target = arm.fk(&q0).unwrap();
    let sol = arm.ik(&target, &q0, &IkParams::default()).unwrap();
    assert_eq!(sol.q, q0);
}

#[test]
fn object_frame_grasp_is_equivariant() {
    let robot = default_robot();
    let arm = robot.arm(ArmId::Right).unwrap();
    let object = Transform::from_translation(Vec3::new(0.4, -0.1, 0.02));
    let grasp = Transform::from_euler(&Vec3::new(0.0, 0.0, 0.03), &Vec3::new(std::f64::consts::PI, 0.0, 0.3));
    let params = IkParams::precise();
    let q = arm.ik(&object.compose(&grasp), &arm.home(), &params).unwrap().q;
    let cfg = ArmConfig { arm_id: ArmId::Right, q, jawwidth: 0.03 };
    let identity_case = object_frame_grasp(&Transform::identity(), &cfg, &robot).unwrap();
    assert!(identity_case.approx_eq(&arm.fk(&cfg.q).unwrap(), 1e-15, 1e-15));
    let g0 = object_frame_grasp(&object, &cfg, &robot).unwrap();
    assert!(g0.approx_eq(&grasp, 1e-6, 1e-6));
    // Rotate the object about the vertical axis and re-solve the same grasp.
    for (shift, yaw) in [(Vec3::new(0.1, 0.0, 0.0), 0.0), (Vec3::new(0.0, 0.05, 0.0), 0.7)] {
        let moved = Transform::from_translation(shift).compose(&object).compose(&Transform::rot_z(yaw));
        let q = arm.ik(&moved.compose(&grasp), &cfg.q, &params).unwrap().q;
        let c2 = ArmConfig { q, ..cfg.clone() };
        let g1 = object_frame_grasp(&moved, &c2, &robot).unwrap();
        assert!(g1.approx_eq(&g0, 1e-6, 1e-6));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn object_frame_grasp_invariant_under_common_motion(
        q in prop::array::uniform6(-1.5f64..1.5),
        r in prop::array::uniform3(-3.0f64..3.0),
        p in prop::array::uniform3(-0.5f64..0.5),
    ) {
        let robot = default_robot();
        let arm = robot.arm(ArmId::Left).unwrap();
        let object = Transform::from_euler(&Vec3::new(0.4, 0.1, 0.0), &Vec3::new(0.0, 0.0, 0.4));
        let cfg = ArmConfig { arm_id: ArmId::Left, q: q.to_vec(), jawwidth: 0.0 };
        let g = object_frame_grasp(&object, &cfg, &robot).unwrap();
        // Move object and gripper together by m: the object-frame grasp is unchanged.
        let m = Transform::from_euler(&Vec3::from(p), &Vec3::from(r));
        let gripper_world = m.compose(&arm.fk(&cfg.q).unwrap());
        let moved = m.compose(&object).inverse().compose(&gripper_world);
        prop_assert!(moved.approx_eq(&g, 1e-9, 1e-9));
    }
}
