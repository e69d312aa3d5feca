//! End-to-end navigation behavior on the benchmark scenes.

use steppa_core::geometry::{
    assemble_scene, preset_scene, preset_start, LabelPolicyConfig, ManualEntry, PlacementMode,
    Pose6D, PresetKind, PrimitiveInstance, PrimitiveParams, SceneConfig, ShapeClass,
};
use steppa_core::nav::{
    run_episode, run_offline_trials, DisturbanceScript, NavConfig, NavEvent, SpawnCommand,
};
use steppa_core::render::MaskQuery;

fn fast_config() -> NavConfig {
    NavConfig::default()
}

fn flat_walkway_scene() -> steppa_core::geometry::Scene {
    let mut scene = assemble_scene(
        &SceneConfig {
            mode: PlacementMode::Manual(vec![ManualEntry {
                class: ShapeClass::Cuboid,
                params: PrimitiveParams::Box { l: 3.0, w: 0.8, h: 0.04 },
                pose: Pose6D::at(0.0, 0.0, 0.0),
                known_to_planner: true,
            }]),
            goal: Some(steppa_core::geometry::GoalRegion::new([1.1, 0.0, 0.34], 0.40)),
            ..SceneConfig::default()
        },
        &LabelPolicyConfig::default(),
    )
    .unwrap();
    scene.primitives[0].known_to_planner = false;
    scene
}

#[test]
fn flat_walkway_episode_reaches_goal() {
    let scene = flat_walkway_scene();
    let report =
        run_episode(&scene, [-1.1, 0.0], &DisturbanceScript::default(), &fast_config()).unwrap();
    assert!(report.success, "events: {}", report.events_csv());
    assert!(report
        .events
        .iter()
        .any(|r| matches!(r.event, NavEvent::GoalReached)));
    assert!(!report
        .events
        .iter()
        .any(|r| matches!(r.event, NavEvent::FootholdInvalidated { .. })));
    // Audited landings never queried non-passable at execution time.
    assert!(report
        .executed_queries
        .iter()
        .all(|(_, q)| *q != MaskQuery::NonPassable));
}

#[test]
fn zero_tick_budget_is_an_empty_failure() {
    let scene = flat_walkway_scene();
    let config = NavConfig { tick_budget: 0, ..fast_config() };
    let report =
        run_episode(&scene, [-1.1, 0.0], &DisturbanceScript::default(), &config).unwrap();
    assert!(!report.success);
    assert!(report.events.is_empty());
    assert_eq!(report.ticks, 0);
}

#[test]
fn staircase_episode_reaches_goal_after_boundary_replans() {
    let scene = preset_scene(PresetKind::Staircase);
    let start = preset_start(PresetKind::Staircase);
    let report =
        run_episode(&scene, [start[0], start[1]], &DisturbanceScript::default(), &fast_config())
            .unwrap();
    let boundaries = report
        .events
        .iter()
        .filter(|r| matches!(r.event, NavEvent::BoundaryReached))
        .count();
    assert!(report.success, "no goal; events:\n{}", report.events_csv());
    assert!(boundaries >= 1, "expected a boundary replan; events:\n{}", report.events_csv());
    // Every replan followed a boundary or an invalidation.
    assert_replans_are_triggered(&report.events);
}

fn assert_replans_are_triggered(events: &[steppa_core::nav::EventRecord]) {
    let mut armed = false;
    for r in events {
        match r.event {
            NavEvent::BoundaryReached | NavEvent::FootholdInvalidated { .. } => armed = true,
            NavEvent::Replanned => {
                assert!(armed, "replanned without a trigger");
                armed = false;
            }
            _ => {}
        }
    }
}

fn sloped_spawn_script(tick: usize) -> DisturbanceScript {
    // A blocking sphere dropped onto the ramp centerline; its diameter
    // exceeds the swing height so it labels non-passable.
    DisturbanceScript {
        spawns: vec![SpawnCommand {
            tick,
            instance: PrimitiveInstance::new(
                999,
                ShapeClass::Sphere,
                PrimitiveParams::Round { r: 0.06 },
                // Ramp surface height at x=0.28 (mid-ramp) is 0.08.
                Pose6D::at(0.28, 0.0, 0.08),
                false,
            ),
        }],
    }
}

#[test]
fn sloped_disturbance_triggers_invalidation_halt_and_recovery() {
    let scene = preset_scene(PresetKind::SlopedWithObstacle);
    let start = preset_start(PresetKind::SlopedWithObstacle);
    let config = fast_config();

    // Probe run without disturbances: find the tick at which the robot
    // approaches mid-ramp, then spawn right before it gets there.
    let clean = run_episode(&scene, [start[0], start[1]], &DisturbanceScript::default(), &config)
        .unwrap();
    assert!(clean.success, "clean run failed:\n{}", clean.events_csv());

    let script = sloped_spawn_script(6);
    let report = run_episode(&scene, [start[0], start[1]], &script, &config).unwrap();
    let invalidations: Vec<usize> = report
        .events
        .iter()
        .filter(|r| matches!(r.event, NavEvent::FootholdInvalidated { .. }))
        .map(|r| r.tick)
        .collect();
    assert_eq!(
        invalidations.len(),
        1,
        "expected exactly one invalidation; events:\n{}",
        report.events_csv()
    );
    let replans = report
        .events
        .iter()
        .filter(|r| matches!(r.event, NavEvent::Replanned))
        .count();
    assert!(replans >= 1);
    assert!(report.success, "no recovery; events:\n{}", report.events_csv());
    assert_replans_are_triggered(&report.events);
    // The executed landings never stood on a non-passable label.
    assert!(report
        .executed_queries
        .iter()
        .all(|(_, q)| *q != MaskQuery::NonPassable));
}

#[test]
fn zero_lookahead_never_invalidates() {
    let scene = preset_scene(PresetKind::SlopedWithObstacle);
    let start = preset_start(PresetKind::SlopedWithObstacle);
    let config = NavConfig { lookahead: 0, ..fast_config() };
    let report = run_episode(&scene, [start[0], start[1]], &sloped_spawn_script(6), &config)
        .unwrap();
    assert!(!report
        .events
        .iter()
        .any(|r| matches!(r.event, NavEvent::FootholdInvalidated { .. })));
}

#[test]
fn episodes_replay_deterministically() {
    let scene = preset_scene(PresetKind::SlopedWithObstacle);
    let start = preset_start(PresetKind::SlopedWithObstacle);
    let config = fast_config();
    let script = sloped_spawn_script(6);
    let a = run_episode(&scene, [start[0], start[1]], &script, &config).unwrap();
    let b = run_episode(&scene, [start[0], start[1]], &script, &config).unwrap();
    assert_eq!(a.to_json_pretty(), b.to_json_pretty());
    assert_eq!(a.events_csv(), b.events_csv());
}

#[test]
fn stepping_stones_heuristic_effect_on_offline_trials() {
    let scene = preset_scene(PresetKind::SteppingStonesWithSpheres);
    let start = preset_start(PresetKind::SteppingStonesWithSpheres);
    let config = fast_config();

    // With the steppability term the very first trial succeeds and plans
    // no foothold whose center reads non-passable.
    let with = run_offline_trials(&scene, [start[0], start[1]], 40, true, &config).unwrap();
    assert_eq!(with.len(), 1, "expected success on trial 1: {with:?}");
    assert!(with[0].success);
    assert_eq!(with[0].non_passable_landings, 0);

    // Without it the short route through the capped bridge stone gets
    // tried first: at least one failed trial precedes the first success.
    let without = run_offline_trials(&scene, [start[0], start[1]], 40, false, &config).unwrap();
    let first_success = without.iter().position(|t| t.success);
    assert!(
        first_success.is_some(),
        "no successful trial within the budget: {without:?}"
    );
    let failures_before = first_success.unwrap();
    assert!(
        failures_before >= 1,
        "heuristic-off run succeeded immediately: {without:?}"
    );
    // The first failed trial stepped somewhere the mask forbids.
    assert!(without[0].non_passable_landings >= 1);
    // Experience accumulates: trial reports exist for every attempt.
    assert_eq!(without.len(), failures_before + 1);
}
