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


//! Graphviz export of regrasp graphs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::graph::{EdgeKind, RegraspGraph, Role};

fn color(kind: EdgeKind) -> &'static str {
    match kind {
        EdgeKind::Transfer => "gray40",
        EdgeKind::Transit => "blue",
        EdgeKind::HandoverTransit => "darkgreen",
        EdgeKind::HandoverTransfer => "red",
        EdgeKind::DirectInitGoal => "orange",
    }
}

/// Renders `graph` as an undirected DOT graph. Every node line carries the
/// arm, role, pose and grasp; every edge line carries its kind. The edge
/// kinds present are listed in the graph label as a legend.
pub fn to_dot(graph: &RegraspGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "graph regrasp {{");
    let _ = writeln!(out, "  // species: {}", graph.species);
    let mut counts: BTreeMap<EdgeKind, usize> = BTreeMap::new();
    for e in graph.edges() {
        *counts.entry(e.kind).or_default() += 1;
    }
    let legend: Vec<String> = counts
        .iter()
        .map(|(k, n)| format!("{} ({}, {n})", k.as_str(), color(*k)))
        .collect();
    let _ = writeln!(out, "  graph [label=\"edge kinds: {}\", labelloc=t];", legend.join("; "));
    for (k, n) in &counts {
        let _ = writeln!(out, "  // legend {} {} {n}", k.as_str(), color(*k));
    }
    let _ = writeln!(out, "  node [shape=circle, width=0.15, label=\"\"];");
    for n in graph.nodes() {
        let role = match n.role {
            Role::Library => "library",
            Role::Initial => "initial",
            Role::Goal => "goal",
        };
        let _ = writeln!(
            out,
            "  \"{}\" [arm=\"{}\", role=\"{role}\", pose=\"{}\", grasp={}];",
            n.id, n.arm, n.pose, n.grasp_id
        );
    }
    for e in graph.edges() {
        let _ = writeln!(
            out,
            "  \"{}\" -- \"{}\" [kind=\"{}\", color=\"{}\"];",
            e.a,
            e.b,
            e.kind.as_str(),
            color(e.kind)
        );
    }
    let _ = writeln!(out, "}}");
    out
}

/// Node and edge content recovered from [`to_dot`] output.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DotGraph {
    /// `(name, arm, role, pose, grasp)`.
    pub nodes: Vec<(String, String, String, String, usize)>,
    /// `(a, b, kind)`.
    pub edges: Vec<(String, String, String)>,
    pub legend: Vec<String>,
}

fn attr<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let start = line.find(&format!("{key}="))? + key.len() + 1;
    let rest = &line[start..];
    if let Some(stripped) = rest.strip_prefix('"') {
        stripped.split('"').next()
    } else {
        rest.split([',', ']']).next()
    }
}

impl DotGraph {
    /// Parses the line-oriented subset of DOT that [`to_dot`] writes.
    pub fn parse(text: &str) -> Option<DotGraph> {
        let mut g = DotGraph::default();
        for line in text.lines().map(str::trim) {
            if let Some(rest) = line.strip_prefix("// legend ") {
                g.legend.push(rest.split(' ').next()?.to_string());
            } else if line.starts_with('"') && line.contains(" -- ") {
                let mut names = line.split('"').skip(1).step_by(2);
                let (a, b) = (names.next()?.to_string(), names.next()?.to_string());
                g.edges.push((a, b, attr(line, "kind")?.to_string()));
            } else if line.starts_with('"') {
                let name = line.split('"').nth(1)?.to_string();
                g.nodes.push((
                    name,
                    attr(line, "arm")?.to_string(),
                    attr(line, "role")?.to_string(),
                    attr(line, "pose")?.to_string(),
                    attr(line, "grasp")?.parse().ok()?,
                ));
            }
        }
        Some(g)
    }
}
