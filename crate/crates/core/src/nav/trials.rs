//! Offline experience-accumulation trials.

use super::{NavConfig, NavError, NavState, WorldContact};
use crate::camera::project;
use crate::geometry::Scene;
use crate::planner::{
    build_graph, build_lattice, search, FootId, Lambda, LatticeOptions, MaskContext, Outcome,
    TorsoPath, WeightContext,
};
use crate::render::{mask_query, raycast_frame, MaskQuery};
use crate::trajopt::{build_problem, solve, SolveStatus};
use nalgebra::Point3;
use serde::Serialize;

/// Outcome of one offline planning trial.
#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    pub success: bool,
    /// Index of the edge whose optimization failed, for failed trials.
    pub failed_edge: Option<usize>,
    /// Total planned path cost, recorded on success.
    pub total_cost: Option<f64>,
    pub edges: usize,
    pub nodes_expanded: usize,
    /// Landing-label audit of the planned footholds against the mask.
    pub non_passable_landings: usize,
    #[serde(skip)]
    pub search_time_s: f64,
    #[serde(skip)]
    pub to_times_s: Vec<f64>,
}

/// Run up to `n_max` offline trials: one graph search each, then the
/// transition optimizations in order. The first infeasible transition ends
/// the trial, updates the experience store, and leaves the remaining
/// subproblems unattempted. Stops at the first fully successful trial.
pub fn run_offline_trials(
    scene: &Scene,
    start_center: [f64; 2],
    n_max: usize,
    heuristic_on: bool,
    config: &NavConfig,
) -> Result<Vec<TrialReport>, NavError> {
    assert!(n_max >= 1, "need at least one trial");
    // One static view from the start rig; offline trials plan against the
    // same mask every time.
    let lattice0 = build_lattice(scene, config.lattice_resolution, &LatticeOptions::default())?;
    let full = crate::planner::snap_stance(&lattice0, start_center, 0.25)?;
    let stance: [WorldContact; 4] = {
        let mut out = [WorldContact {
            position: Point3::origin(),
            object: crate::geometry::PrimitiveId(0),
        }; 4];
        for foot in FootId::ALL {
            let p = lattice0.point(full.point_of(foot));
            out[foot.index()] = WorldContact { position: p.position, object: p.object };
        }
        out
    };
    let probe = NavState {
        stance,
        next_swing: FootId::GAIT_CYCLE[0],
        plan: None,
        progress: 0,
        perceived: super::PerceivedRegion::new(),
        experience: crate::planner::ExperienceStore::default(),
        tick: 0,
        executed_queries: Vec::new(),
        search_times: Vec::new(),
        to_times: Vec::new(),
        search_stats: Vec::new(),
    };
    let pose = probe.camera(&scene.goal, 0);
    let frame = raycast_frame(scene, &config.intrinsics, &pose, &config.render)?;

    let lambda = if heuristic_on {
        config.lambda
    } else {
        Lambda { step: 0.0, ..config.lambda }
    };
    let torso_path = TorsoPath::line(probe.com(), scene.goal.center_point());
    let mut experience = crate::planner::ExperienceStore::default();
    let mut reports = Vec::new();

    for trial in 1..=n_max {
        let graph = build_graph(&lattice0, config.graph, full, FootId::GAIT_CYCLE[0], scene.goal)?;
        let mask_ctx = MaskContext {
            mask: &frame.mask,
            intrinsics: &frame.intrinsics,
            pose: &frame.pose,
            foot_radius: config.foot_radius,
        };
        let wctx = WeightContext {
            mask: Some(mask_ctx),
            experience: &experience,
            torso_path: &torso_path,
            lambda,
        };
        let plan = match search(&graph, &wctx) {
            Ok(p) => p,
            Err(e) => {
                reports.push(TrialReport {
                    trial,
                    success: false,
                    failed_edge: None,
                    total_cost: None,
                    edges: 0,
                    nodes_expanded: e.stats.nodes_expanded,
                    non_passable_landings: 0,
                    search_time_s: e.stats.wall_time_s,
                    to_times_s: Vec::new(),
                });
                break;
            }
        };

        // Audit planned landings against the mask.
        let mut non_passable = 0usize;
        for e in &plan.edges {
            let land = e.footholds[e.swing_foot.index()];
            let px = project(
                &Point3::new(land[0], land[1], land[2]),
                &frame.intrinsics,
                &frame.pose,
            );
            if mask_query(&frame.mask, &px) == MaskQuery::NonPassable {
                non_passable += 1;
            }
        }

        // Execute the transition optimizations in order.
        let mut feet = stance;
        let mut to_times = Vec::new();
        let mut failed_edge = None;
        for (i, e) in plan.edges.iter().enumerate() {
            let swing = e.swing_foot;
            let landing = e.footholds[swing.index()];
            let landing_pt = Point3::new(landing[0], landing[1], landing[2]);
            let stance_feet: Vec<(FootId, Point3<f64>)> = FootId::ALL
                .iter()
                .filter(|f| **f != swing)
                .map(|f| (*f, feet[f.index()].position))
                .collect();
            let problem = build_problem(
                stance_feet,
                swing,
                feet[swing.index()].position,
                landing_pt,
                scene,
                config.transition.clone(),
            )?;
            let sol = solve(&problem);
            to_times.push(sol.wall_time_s);
            let outcome = match sol.status {
                SolveStatus::Converged => Outcome::Converged(sol.objective),
                _ => Outcome::Failed,
            };
            experience.update(graph.lattice, &e.source, &e.dest, outcome);
            if sol.status != SolveStatus::Converged {
                failed_edge = Some(i);
                break;
            }
            feet[swing.index()] =
                WorldContact { position: landing_pt, object: e.landing_object };
        }

        let success = failed_edge.is_none();
        reports.push(TrialReport {
            trial,
            success,
            failed_edge,
            total_cost: success.then_some(plan.total_cost),
            edges: plan.edges.len(),
            nodes_expanded: plan.stats.nodes_expanded,
            non_passable_landings: non_passable,
            search_time_s: plan.stats.wall_time_s,
            to_times_s: to_times,
        });
        if success {
            break;
        }
    }
    Ok(reports)
}
