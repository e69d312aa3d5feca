//! Full navigation episodes with scripted disturbances.

use super::{init_nav, replan, tick, NavConfig, NavError, NavEvent};
use crate::geometry::{spawn_obstacle, PrimitiveInstance, Scene};
use crate::render::raycast_frame;
use serde::Serialize;

/// Spawn an obstacle at the start of the given tick.
#[derive(Debug, Clone)]
pub struct SpawnCommand {
    pub tick: usize,
    pub instance: PrimitiveInstance,
}

/// Scripted disturbances, ordered by tick.
#[derive(Debug, Clone, Default)]
pub struct DisturbanceScript {
    pub spawns: Vec<SpawnCommand>,
}

impl DisturbanceScript {
    pub fn validate(&self) -> bool {
        self.spawns.windows(2).all(|w| w[0].tick <= w[1].tick)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EventRecord {
    pub tick: usize,
    pub event: NavEvent,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpisodeReport {
    pub success: bool,
    pub ticks: usize,
    pub replan_count: usize,
    pub events: Vec<EventRecord>,
    /// Per-replan search wall times; printed, never serialized.
    #[serde(skip)]
    pub search_times: Vec<f64>,
    /// Per-transition optimizer wall times; printed, never serialized.
    #[serde(skip)]
    pub to_times: Vec<f64>,
    #[serde(skip)]
    pub executed_queries: Vec<(usize, crate::render::MaskQuery)>,
    #[serde(skip)]
    pub experience_samples: u64,
}

impl EpisodeReport {
    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per event: `tick,event,payload`.
    pub fn events_csv(&self) -> String {
        let mut out = String::from("tick,event,payload\n");
        for r in &self.events {
            let (name, payload) = match &r.event {
                NavEvent::BoundaryReached => ("boundary_reached", String::new()),
                NavEvent::FootholdInvalidated { edge_index, foothold, label } => (
                    "foothold_invalidated",
                    format!(
                        "edge={edge_index};x={:.4};y={:.4};z={:.4};label={label}",
                        foothold[0], foothold[1], foothold[2]
                    ),
                ),
                NavEvent::GoalReached => ("goal_reached", String::new()),
                NavEvent::PlanFailed { edge_index } => {
                    ("plan_failed", format!("edge={edge_index}"))
                }
                NavEvent::Replanned => ("replanned", String::new()),
            };
            out.push_str(&format!("{},{name},{payload}\n", r.tick));
        }
        out
    }
}

/// Run the tick/replan loop until the goal is reached, recovery fails, or
/// the tick budget is exhausted. Deterministic for fixed inputs.
pub fn run_episode(
    scene: &Scene,
    start_center: [f64; 2],
    script: &DisturbanceScript,
    config: &NavConfig,
) -> Result<EpisodeReport, NavError> {
    let mut scene = scene.clone();
    let mut events: Vec<EventRecord> = Vec::new();
    let mut replan_count = 0usize;

    if config.tick_budget == 0 {
        return Ok(EpisodeReport {
            success: false,
            ticks: 0,
            replan_count: 0,
            events,
            search_times: Vec::new(),
            to_times: Vec::new(),
            executed_queries: Vec::new(),
            experience_samples: 0,
        });
    }

    let (mut state, _) = init_nav(&scene, start_center, config)?;
    let mut success = false;
    let mut spawn_cursor = 0usize;

    while state.tick < config.tick_budget {
        // Scripted disturbances arrive at the start of their tick.
        while spawn_cursor < script.spawns.len()
            && script.spawns[spawn_cursor].tick <= state.tick + 1
        {
            let mut inst = script.spawns[spawn_cursor].instance.clone();
            inst.id = crate::geometry::PrimitiveId(scene.next_id());
            scene = spawn_obstacle(&scene, inst).map_err(|e| {
                NavError::Render(crate::render::RenderError::BadConfig(format!(
                    "scripted spawn rejected: {e}"
                )))
            })?;
            spawn_cursor += 1;
        }

        let tick_events = tick(&mut state, &scene, config)?;
        let tick_now = state.tick;
        let mut needs_replan = false;
        for e in tick_events {
            match &e {
                NavEvent::GoalReached => success = true,
                NavEvent::BoundaryReached
                | NavEvent::FootholdInvalidated { .. }
                | NavEvent::PlanFailed { .. } => needs_replan = true,
                NavEvent::Replanned => {}
            }
            events.push(EventRecord { tick: tick_now, event: e });
        }
        if success {
            break;
        }
        if needs_replan {
            let pose = state.camera(&scene.goal, state.tick);
            let frame = raycast_frame(&scene, &config.intrinsics, &pose, &config.render)?;
            state.perceived.observe(&frame);
            for e in replan(&mut state, &scene, &frame, config)? {
                match e {
                    NavEvent::Replanned => replan_count += 1,
                    NavEvent::GoalReached => success = true,
                    _ => {}
                }
                events.push(EventRecord { tick: tick_now, event: e });
            }
            if success {
                break;
            }
        } else if state.plan.is_none() && !success {
            // No plan and nothing triggered: stuck.
            break;
        }
    }

    Ok(EpisodeReport {
        success,
        ticks: state.tick,
        replan_count,
        events,
        search_times: state.search_times.clone(),
        to_times: state.to_times.clone(),
        executed_queries: state.executed_queries.clone(),
        experience_samples: state.experience.total_samples(),
    })
}
