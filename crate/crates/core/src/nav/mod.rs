//! Event-driven navigation: per-tick execution with boundary- and
//! disturbance-triggered re-planning.
//!
//! Execution is kinematic: one planned transition advances per tick. Every
//! tick renders a fresh frame from the torso-mounted camera, extends the
//! perceived region, and validates the upcoming footholds against the new
//! steppability mask before committing to the next transition.

mod episode;
mod perceive;
mod trials;

pub use episode::{run_episode, DisturbanceScript, EpisodeReport, EventRecord, SpawnCommand};
pub use perceive::PerceivedRegion;
pub use trials::{run_offline_trials, TrialReport};

use crate::camera::{default_rig_pose, project, CameraPose, Intrinsics};
use crate::geometry::{GoalRegion, Pose6D, PrimitiveId, Scene};
use crate::planner::{
    build_graph, build_lattice, search, ExperienceStore, FootId, FullStance, GraphConfig, Lambda,
    LatticeOptions, MaskContext, Mode, NoPath, Outcome, PlanResult, SearchStats, TorsoPath,
    WeightContext, NOMINAL_COM_HEIGHT,
};
use crate::render::{mask_query, raycast_frame, Frame, MaskQuery, RenderConfig};
use crate::trajopt::{build_problem, solve, SolveStatus, TransitionConfig};
use nalgebra::Point3;
use serde::Serialize;
use thiserror::Error;

/// Navigation and planning parameters shared by ticks, re-plans, episodes,
/// and offline trials.
#[derive(Debug, Clone)]
pub struct NavConfig {
    /// How many upcoming footholds each tick validates against the mask.
    pub lookahead: usize,
    pub tick_budget: usize,
    pub lattice_resolution: f64,
    pub foot_radius: f64,
    pub lambda: Lambda,
    pub graph: GraphConfig,
    pub render: RenderConfig,
    pub intrinsics: Intrinsics,
    pub transition: TransitionConfig,
    /// Solve the transition optimization for every executed edge.
    pub solve_transitions: bool,
    pub seed: u64,
}

impl Default for NavConfig {
    fn default() -> Self {
        let (intrinsics, _) = crate::camera::default_rig();
        NavConfig {
            lookahead: 2,
            tick_budget: 100,
            lattice_resolution: 0.05,
            foot_radius: 0.02,
            lambda: Lambda::default(),
            graph: GraphConfig::default(),
            render: RenderConfig::near_field(),
            intrinsics,
            transition: TransitionConfig::default(),
            solve_transitions: true,
            seed: 0,
        }
    }
}

/// Navigation events, in emission order within a tick.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NavEvent {
    BoundaryReached,
    FootholdInvalidated {
        edge_index: usize,
        foothold: [f64; 3],
        label: String,
    },
    GoalReached,
    PlanFailed {
        edge_index: usize,
    },
    Replanned,
}

/// One stance foot in world coordinates with its supporting object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldContact {
    pub position: Point3<f64>,
    pub object: PrimitiveId,
}

/// Live navigation state.
#[derive(Debug, Clone)]
pub struct NavState {
    /// All four feet planted, indexed by [`FootId::index`].
    pub stance: [WorldContact; 4],
    pub next_swing: FootId,
    pub plan: Option<PlanResult>,
    pub progress: usize,
    pub perceived: PerceivedRegion,
    pub experience: ExperienceStore,
    pub tick: usize,
    /// Landing-query audit: (tick, label at execution time) per executed
    /// transition.
    pub executed_queries: Vec<(usize, MaskQuery)>,
    pub search_times: Vec<f64>,
    pub to_times: Vec<f64>,
    pub search_stats: Vec<SearchStats>,
}

impl NavState {
    pub fn com(&self) -> Point3<f64> {
        let mut c = nalgebra::Vector3::zeros();
        for f in &self.stance {
            c += f.position.coords;
        }
        Point3::from(c / 4.0) + nalgebra::Vector3::new(0.0, 0.0, NOMINAL_COM_HEIGHT)
    }

    /// Torso-mounted camera at the rig height above the feet, yawed toward
    /// the goal.
    pub fn camera(&self, goal: &GoalRegion, tick: usize) -> CameraPose {
        let com = self.com();
        let feet_z =
            self.stance.iter().map(|f| f.position.z).sum::<f64>() / 4.0;
        let yaw = (goal.center[1] - com.y).atan2(goal.center[0] - com.x);
        let rig = default_rig_pose();
        let body = Pose6D::new(com.x, com.y, feet_z + rig.z, 0.0, rig.pitch, yaw);
        CameraPose::from_world_pose(&body, tick as f64)
    }
}

#[derive(Debug, Error)]
pub enum NavError {
    #[error(transparent)]
    Planner(#[from] crate::planner::PlannerError),
    #[error("render failed: {0}")]
    Render(#[from] crate::render::RenderError),
    #[error("trajectory optimization setup failed: {0}")]
    TrajOpt(#[from] crate::trajopt::TrajOptError),
    #[error("no plan and no progress possible from the current stance")]
    Stuck,
}

/// Initialize navigation at a nominal stance around `start_center`: render
/// the first frame, seed the perceived region, and build the initial plan.
pub fn init_nav(
    scene: &Scene,
    start_center: [f64; 2],
    config: &NavConfig,
) -> Result<(NavState, Vec<NavEvent>), NavError> {
    // Initial stance snaps onto the unfiltered lattice: the robot knows
    // where it stands even before perceiving anything.
    let lattice = build_lattice(scene, config.lattice_resolution, &LatticeOptions::default())?;
    let full = crate::planner::snap_stance(&lattice, start_center, 0.25)?;
    let stance: [WorldContact; 4] = {
        let mut out = [WorldContact { position: Point3::origin(), object: PrimitiveId(0) }; 4];
        for foot in FootId::ALL {
            let p = lattice.point(full.point_of(foot));
            out[foot.index()] = WorldContact { position: p.position, object: p.object };
        }
        out
    };
    let mut state = NavState {
        stance,
        next_swing: FootId::GAIT_CYCLE[0],
        plan: None,
        progress: 0,
        perceived: PerceivedRegion::new(),
        experience: ExperienceStore::default(),
        tick: 0,
        executed_queries: Vec::new(),
        search_times: Vec::new(),
        to_times: Vec::new(),
        search_stats: Vec::new(),
    };
    let frame = render_current(&mut state, scene, config)?;
    let events = replan(&mut state, scene, &frame, config)?;
    Ok((state, events))
}

fn render_current(
    state: &mut NavState,
    scene: &Scene,
    config: &NavConfig,
) -> Result<Frame, NavError> {
    let pose = state.camera(&scene.goal, state.tick);
    let frame = raycast_frame(scene, &config.intrinsics, &pose, &config.render)?;
    state.perceived.observe(&frame);
    Ok(frame)
}

/// Rebuild lattice and graph over the currently perceived region and search
/// from the current stance. The experience store persists across re-plans.
pub fn replan(
    state: &mut NavState,
    scene: &Scene,
    frame: &Frame,
    config: &NavConfig,
) -> Result<Vec<NavEvent>, NavError> {
    let mut filter = state.perceived.object_filter(scene);
    for c in &state.stance {
        filter.insert(c.object);
    }
    let options = LatticeOptions {
        object_filter: Some(filter),
        extra_points: state
            .stance
            .iter()
            .map(|c| (c.object, [c.position.x, c.position.y, c.position.z]))
            .collect(),
    };
    let lattice = build_lattice(scene, config.lattice_resolution, &options)?;
    let mut points = [0u32; 4];
    for foot in FootId::ALL {
        let c = &state.stance[foot.index()];
        points[foot.index()] = lattice
            .nearest(&c.position, 1e-6)
            .expect("stance points are injected into the lattice");
    }
    let full = FullStance { points };
    let graph = match build_graph(&lattice, config.graph, full, state.next_swing, scene.goal) {
        Ok(g) => g,
        Err(e) => {
            // A goal outside the perceived lattice is planned toward the
            // frontier instead; other failures bubble up.
            if let crate::planner::PlannerError::StanceUnreachable { side: "goal", .. } = e {
                crate::planner::ModeGraph {
                    lattice: &lattice,
                    config: config.graph,
                    start: Mode::from_full(&full, state.next_swing),
                    goal: scene.goal,
                }
            } else {
                return Err(e.into());
            }
        }
    };
    let torso_path = TorsoPath::line(state.com(), scene.goal.center_point());
    let mask_ctx = MaskContext {
        mask: &frame.mask,
        intrinsics: &frame.intrinsics,
        pose: &frame.pose,
        foot_radius: config.foot_radius,
    };
    let wctx = WeightContext {
        mask: Some(mask_ctx),
        experience: &state.experience,
        torso_path: &torso_path,
        lambda: config.lambda,
    };
    match search(&graph, &wctx) {
        Ok(plan) if plan.edges.is_empty() => {
            // The start mode already satisfies the planner's goal test.
            state.search_times.push(plan.stats.wall_time_s);
            state.search_stats.push(plan.stats);
            state.plan = None;
            state.progress = 0;
            Ok(vec![NavEvent::Replanned, NavEvent::GoalReached])
        }
        Ok(plan) => {
            state.search_times.push(plan.stats.wall_time_s);
            state.search_stats.push(plan.stats);
            state.plan = Some(plan);
            state.progress = 0;
            Ok(vec![NavEvent::Replanned])
        }
        Err(NoPath { stats, partial: Some(partial), .. }) if !partial.edges.is_empty() => {
            state.search_times.push(stats.wall_time_s);
            state.search_stats.push(stats);
            state.plan = Some(partial);
            state.progress = 0;
            Ok(vec![NavEvent::Replanned])
        }
        Err(NoPath { stats, .. }) => {
            state.search_times.push(stats.wall_time_s);
            state.search_stats.push(stats);
            state.plan = None;
            state.progress = 0;
            Ok(vec![NavEvent::PlanFailed { edge_index: 0 }])
        }
    }
}

/// Advance one tick: render, validate upcoming footholds, then execute one
/// transition. Events signal every condition; the caller decides when to
/// re-plan.
pub fn tick(
    state: &mut NavState,
    scene: &Scene,
    config: &NavConfig,
) -> Result<Vec<NavEvent>, NavError> {
    let mut events = Vec::new();
    state.tick += 1;
    let frame = render_current(state, scene, config)?;

    if state.plan.is_none() {
        return Ok(events);
    }

    // Validate the next `lookahead` upcoming footholds against the fresh
    // mask, inflation offsets included.
    let (invalidated, boundary) = {
        let plan = state.plan.as_ref().unwrap();
        let mut invalidated = None;
        'check: for i in state.progress..(state.progress + config.lookahead).min(plan.edges.len()) {
            let e = &plan.edges[i];
            let land = e.footholds[e.swing_foot.index()];
            let center = Point3::new(land[0], land[1], land[2]);
            let mut probes = vec![center];
            if config.foot_radius > 0.0 {
                let r = config.foot_radius;
                probes.push(center + nalgebra::Vector3::new(r, 0.0, 0.0));
                probes.push(center + nalgebra::Vector3::new(-r, 0.0, 0.0));
                probes.push(center + nalgebra::Vector3::new(0.0, r, 0.0));
                probes.push(center + nalgebra::Vector3::new(0.0, -r, 0.0));
            }
            for p in probes {
                let px = project(&p, &frame.intrinsics, &frame.pose);
                if mask_query(&frame.mask, &px) == MaskQuery::NonPassable {
                    invalidated = Some((i, land));
                    break 'check;
                }
            }
        }
        let exhausted = state.progress >= plan.edges.len();
        let boundary = exhausted
            || (invalidated.is_none() && {
                let e = &plan.edges[state.progress];
                let land = e.footholds[e.swing_foot.index()];
                !state.perceived.contains(land[0], land[1])
            });
        (invalidated, boundary)
    };

    if let Some((i, land)) = invalidated {
        events.push(NavEvent::FootholdInvalidated {
            edge_index: i,
            foothold: land,
            label: "non_passable".into(),
        });
        state.plan = None;
        return Ok(events);
    }
    if boundary {
        events.push(NavEvent::BoundaryReached);
        state.plan = None;
        return Ok(events);
    }

    // Execute the next transition.
    let edge = state.plan.as_ref().unwrap().edges[state.progress].clone();
    let swing = edge.swing_foot;
    let landing = edge.footholds[swing.index()];
    let landing_pt = Point3::new(landing[0], landing[1], landing[2]);

    if config.solve_transitions {
        let stance: Vec<(FootId, Point3<f64>)> = FootId::ALL
            .iter()
            .filter(|f| **f != swing)
            .map(|f| (*f, state.stance[f.index()].position))
            .collect();
        let takeoff = state.stance[swing.index()].position;
        let problem = build_problem(
            stance,
            swing,
            takeoff,
            landing_pt,
            scene,
            config.transition.clone(),
        )?;
        let sol = solve(&problem);
        state.to_times.push(sol.wall_time_s);
        let (lattice_src, src_mode, dst_mode) = modes_for_experience(state, scene, config, &edge)?;
        let outcome = match sol.status {
            SolveStatus::Converged => Outcome::Converged(sol.objective),
            _ => Outcome::Failed,
        };
        state
            .experience
            .update(&lattice_src, &src_mode, &dst_mode, outcome);
        if sol.status != SolveStatus::Converged {
            events.push(NavEvent::PlanFailed { edge_index: state.progress });
            state.plan = None;
            return Ok(events);
        }
    }

    // Audit the landing label at execution time.
    let px = project(&landing_pt, &frame.intrinsics, &frame.pose);
    state.executed_queries.push((state.tick, mask_query(&frame.mask, &px)));

    state.stance[swing.index()] =
        WorldContact { position: landing_pt, object: edge.landing_object };
    state.next_swing = swing.next_in_cycle();
    state.progress += 1;

    if scene.goal.contains(&state.com()) {
        events.push(NavEvent::GoalReached);
        state.plan = None;
    }
    Ok(events)
}

/// Rebuild the pair of modes an executed edge transitions between, for
/// experience-store keying.
fn modes_for_experience(
    state: &NavState,
    scene: &Scene,
    config: &NavConfig,
    edge: &crate::planner::PlanEdge,
) -> Result<(crate::planner::FootholdLattice, Mode, Mode), NavError> {
    let swing = edge.swing_foot;
    let mut extra: Vec<(PrimitiveId, [f64; 3])> = state
        .stance
        .iter()
        .map(|c| (c.object, [c.position.x, c.position.y, c.position.z]))
        .collect();
    let land = edge.footholds[swing.index()];
    extra.push((edge.landing_object, land));
    let options = LatticeOptions { object_filter: None, extra_points: extra };
    let lattice = build_lattice(scene, config.lattice_resolution, &options)?;
    let mut src_points = [0u32; 4];
    for foot in FootId::ALL {
        let c = &state.stance[foot.index()];
        src_points[foot.index()] =
            lattice.nearest(&c.position, 1e-6).expect("stance injected");
    }
    let src = Mode::from_full(&FullStance { points: src_points }, swing);
    let mut dst_points = src_points;
    dst_points[swing.index()] = lattice
        .nearest(&Point3::new(land[0], land[1], land[2]), 1e-6)
        .expect("landing injected");
    let dst = Mode::from_full(&FullStance { points: dst_points }, swing.next_in_cycle());
    Ok((lattice, src, dst))
}
