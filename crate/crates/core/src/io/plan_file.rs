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


//! Plan files: a summary block followed by the full plan, as JSON.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::kinematics::ArmId;
use crate::planner::{AllowedArms, NoPlan, Plan, Strategy};

use super::{read_file, write_file, IoError};

pub const PLAN_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanSummary {
    /// `plan` or `no_path`.
    pub status: String,
    pub initial_pose: usize,
    pub goal_pose: usize,
    pub allowed_arms: AllowedArms,
    pub seed: u64,
    pub regrasps: usize,
    pub handovers: usize,
    /// `single` or `dual`, by the number of distinct arms on the path.
    pub arms_used: String,
    pub arms: Vec<ArmId>,
    pub strategy: Option<Strategy>,
    pub iterations: usize,
    pub edges_removed: usize,
    pub path: Vec<String>,
}

impl PlanSummary {
    pub fn new(initial_pose: usize, goal_pose: usize, allowed_arms: AllowedArms, seed: u64, outcome: &Result<Plan, NoPlan>) -> Self {
        let mut s = PlanSummary {
            status: "no_path".into(),
            initial_pose,
            goal_pose,
            allowed_arms,
            seed,
            regrasps: 0,
            handovers: 0,
            arms_used: "none".into(),
            arms: Vec::new(),
            strategy: None,
            iterations: 0,
            edges_removed: 0,
            path: Vec::new(),
        };
        match outcome {
            Ok(p) => {
                s.status = "plan".into();
                s.regrasps = p.regrasps;
                s.handovers = p.handovers;
                s.arms = p.arms_used.arms.clone();
                s.arms_used = if s.arms.len() > 1 { "dual" } else { "single" }.into();
                s.strategy = Some(p.arms_used.strategy);
                s.iterations = p.iterations;
                s.edges_removed = p.removed_edges.len();
                s.path = p.path.iter().map(|n| n.to_string()).collect();
            }
            Err(e) => {
                s.iterations = e.iterations;
                s.edges_removed = e.removed_edges.len();
            }
        }
        s
    }

    /// `key=value` lines, one per field.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let arms: Vec<&str> = self.arms.iter().map(|a| a.as_str()).collect();
        let strategy = match self.strategy {
            Some(Strategy::Single) => "single",
            Some(Strategy::Dual) => "dual",
            Some(Strategy::Mixed) => "mixed",
            None => "none",
        };
        let _ = writeln!(out, "status={}", self.status);
        let _ = writeln!(out, "initial_pose={}", self.initial_pose);
        let _ = writeln!(out, "goal_pose={}", self.goal_pose);
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "regrasps={}", self.regrasps);
        let _ = writeln!(out, "handovers={}", self.handovers);
        let _ = writeln!(out, "arms_used={}", self.arms_used);
        let _ = writeln!(out, "arms={}", arms.join(","));
        let _ = writeln!(out, "strategy={strategy}");
        let _ = writeln!(out, "iterations={}", self.iterations);
        let _ = writeln!(out, "edges_removed={}", self.edges_removed);
        let _ = writeln!(out, "path={}", self.path.join(" "));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub format_version: u32,
    pub scene_digest: String,
    pub summary: PlanSummary,
    pub plan: Option<Plan>,
}

impl PlanFile {
    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        let mut text = serde_json::to_string_pretty(self).expect("plain data serializes");
        text.push('\n');
        write_file(path, text.as_bytes())
    }

    pub fn read(path: &Path) -> Result<PlanFile, IoError> {
        let text = read_file(path)?;
        serde_json::from_str(&text).map_err(|e| IoError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}
