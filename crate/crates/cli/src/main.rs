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


//! Command-line front end: offline cache building, online planning, graph
//! export and plan validation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use regrasp::graph::{RegraspGraph, Species};
use regrasp::io::cache::{load_cache, manifest_path, read_cache_unchecked};
use regrasp::io::{load_scene, scene_digest, to_dot, write_cache, Cache, PlanFile, PlanSummary};
use regrasp::kinematics::ArmId;
use regrasp::pipeline::{build_library_timed, PoseSpec};
use regrasp::planner::{plan_with_replanning, validate_plan, AllowedArms, SceneRealizer};

#[derive(Parser)]
#[command(name = "regrasp", version, about = "Regrasp and handover planning for dual-arm robots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Offline phase: grasps, placements, single-arm and handover graphs.
    BuildCache {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Online phase: stitch the query graph, search, realize and replan.
    Plan {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        cache: PathBuf,
        /// Pose id or `placement,rotation,position`.
        #[arg(long)]
        init: PoseSpec,
        #[arg(long)]
        goal: PoseSpec,
        /// left, right, both or auto.
        #[arg(long, default_value = "auto")]
        arms: AllowedArms,
        /// Motion planning seed; defaults to the scene's motion seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Writes one graph of the cache as DOT.
    ExportGraph {
        #[arg(long)]
        cache: PathBuf,
        /// left, right, handover, dual or super.
        #[arg(long)]
        species: String,
        #[arg(long)]
        out: PathBuf,
        /// Needed for the dual and super species.
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Needed for the super species.
        #[arg(long)]
        init: Option<PoseSpec>,
        #[arg(long)]
        goal: Option<PoseSpec>,
    },
    /// Replays a plan file against a scene file.
    ValidatePlan {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        plan: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::BuildCache { scene, out } => build_cache(&scene, &out),
        Command::Plan {
            scene,
            cache,
            init,
            goal,
            arms,
            seed,
            out,
        } => plan(&scene, &cache, init, goal, arms, seed, &out),
        Command::ExportGraph {
            cache,
            species,
            out,
            scene,
            init,
            goal,
        } => export_graph(&cache, &species, &out, scene.as_deref(), init, goal),
        Command::ValidatePlan { scene, plan } => validate(&scene, &plan),
    }
}

fn build_cache(scene_path: &Path, out: &Path) -> Result<ExitCode> {
    let scene = load_scene(scene_path)?;
    let (library, timings) = build_library_timed(&scene)?;
    let cache = Cache::new(&scene, library);
    write_cache(out, &cache)?;
    let manifest = cache.manifest(timings);
    let mpath = manifest_path(out);
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&mpath, text + "\n").with_context(|| format!("writing {}", mpath.display()))?;
    println!("grasps={}", manifest.grasps);
    println!("placements={}", manifest.placements);
    println!("poses={}", manifest.poses);
    println!("handover_poses={}", manifest.handover_poses);
    for (name, (n, e)) in &manifest.graphs {
        println!("graph.{name}=nodes:{n},edges:{e}");
    }
    let t = &manifest.timings;
    eprintln!(
        "timings gp={:.3}s pp={:.3}s ik_cd={:.3}s hp={:.3}s total={:.3}s",
        t.gp, t.pp, t.ik_cd, t.hp, t.total
    );
    Ok(ExitCode::SUCCESS)
}

fn plan(
    scene_path: &Path,
    cache_path: &Path,
    init: PoseSpec,
    goal: PoseSpec,
    arms: AllowedArms,
    seed: Option<u64>,
    out: &Path,
) -> Result<ExitCode> {
    let clock = Instant::now();
    let scene = load_scene(scene_path)?;
    let cache = load_cache(cache_path, &scene, false)?;
    let lib = &cache.library;
    let (i, g) = (lib.resolve(init)?, lib.resolve(goal)?);
    let seed = seed.unwrap_or(scene.motion.seed);
    let graph = lib.query_graph(&scene, i, g)?;
    let mut realizer = SceneRealizer::new(&scene, &lib.grasps, seed);
    let outcome = plan_with_replanning(&graph, arms, &mut realizer);
    let summary = PlanSummary::new(i.pose_id, g.pose_id, arms, seed, &outcome);
    let found = outcome.is_ok();
    PlanFile {
        format_version: regrasp::io::plan_file::PLAN_FORMAT_VERSION,
        scene_digest: scene_digest(&scene),
        summary: summary.clone(),
        plan: outcome.ok(),
    }
    .write(out)?;
    print!("{}", summary.to_text());
    eprintln!("online time {:.3}s", clock.elapsed().as_secs_f64());
    Ok(if found { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn export_graph(
    cache_path: &Path,
    species: &str,
    out: &Path,
    scene_path: Option<&Path>,
    init: Option<PoseSpec>,
    goal: Option<PoseSpec>,
) -> Result<ExitCode> {
    let with_scene = |needs: &str| -> Result<(regrasp::scene::Scene, Cache)> {
        let Some(p) = scene_path else {
            bail!("species `{needs}` needs --scene");
        };
        let scene = load_scene(p)?;
        let cache = load_cache(cache_path, &scene, false)?;
        Ok((scene, cache))
    };
    let graph: RegraspGraph = match species {
        "left" | "right" => {
            let arm = if species == "left" { ArmId::Left } else { ArmId::Right };
            let cache = read_cache_unchecked(cache_path)?;
            cache
                .library
                .single_arm
                .get(&arm)
                .cloned()
                .with_context(|| format!("cache has no {arm} arm graph"))?
        }
        "handover" => {
            let cache = read_cache_unchecked(cache_path)?;
            match cache.library.handover {
                Some(h) => h,
                None => RegraspGraph::empty(Species::Handover, cache.library.provenance.clone()),
            }
        }
        "dual" => {
            let (scene, cache) = with_scene(species)?;
            cache.library.dual_graph(&scene)?
        }
        "super" => {
            let (scene, cache) = with_scene(species)?;
            let (Some(i), Some(g)) = (init, goal) else {
                bail!("species `super` needs --init and --goal");
            };
            let lib = &cache.library;
            lib.query_graph(&scene, lib.resolve(i)?, lib.resolve(g)?)?
        }
        other => bail!("unknown species `{other}` (expected left, right, handover, dual or super)"),
    };
    std::fs::write(out, to_dot(&graph)).with_context(|| format!("writing {}", out.display()))?;
    println!("nodes={} edges={}", graph.node_count(), graph.edge_count());
    Ok(ExitCode::SUCCESS)
}

fn validate(scene_path: &Path, plan_path: &Path) -> Result<ExitCode> {
    let scene = load_scene(scene_path)?;
    let file = PlanFile::read(plan_path)?;
    let Some(plan) = file.plan else {
        bail!("{} holds no plan (status {})", plan_path.display(), file.summary.status);
    };
    validate_plan(&scene, &plan)?;
    println!("valid segments={} waypoints={}", plan.segments.len(), plan.segments.iter().map(|s| s.waypoints.len()).sum::<usize>());
    Ok(ExitCode::SUCCESS)
}
