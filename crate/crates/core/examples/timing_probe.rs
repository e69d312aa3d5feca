use std::time::Instant;
use steppa_core::camera::default_rig;
use steppa_core::geometry::*;
use steppa_core::nav::{run_episode, DisturbanceScript, NavConfig};
use steppa_core::planner::*;
use steppa_core::render::{raycast_frame, RenderConfig};

fn main() {
    let mut scene = assemble_scene(
        &SceneConfig {
            mode: PlacementMode::Manual(vec![ManualEntry {
                class: ShapeClass::Cuboid,
                params: PrimitiveParams::Box { l: 3.0, w: 0.8, h: 0.04 },
                pose: Pose6D::at(0.0, 0.0, 0.0),
                known_to_planner: true,
            }]),
            goal: Some(GoalRegion::new([1.1, 0.0, 0.34], 0.40)),
            ..SceneConfig::default()
        },
        &LabelPolicyConfig::default(),
    )
    .unwrap();
    scene.primitives[0].known_to_planner = false;

    let (k, pose) = default_rig();
    let t = Instant::now();
    let frame = raycast_frame(&scene, &k, &pose, &RenderConfig::near_field()).unwrap();
    println!("render: {:.3} s", t.elapsed().as_secs_f64());

    let t = Instant::now();
    let lattice = build_lattice(&scene, 0.05, &LatticeOptions::default()).unwrap();
    println!("lattice ({} pts): {:.3} s", lattice.len(), t.elapsed().as_secs_f64());

    let start = snap_stance(&lattice, [-1.1, 0.0], 0.25).unwrap();
    let graph = build_graph(&lattice, GraphConfig::default(), start, FootId::LF, scene.goal).unwrap();
    let exp = ExperienceStore::default();
    let path = TorsoPath::line(nalgebra::Point3::new(-1.1, 0.0, 0.34), scene.goal.center_point());
    let mask_ctx = MaskContext { mask: &frame.mask, intrinsics: &k, pose: &pose, foot_radius: 0.02 };
    let wctx = WeightContext { mask: Some(mask_ctx), experience: &exp, torso_path: &path, lambda: Lambda::default() };
    let t = Instant::now();
    let plan = search(&graph, &wctx).unwrap();
    println!(
        "search: {:.3} s ({} expanded, {} edges, {} plan edges)",
        t.elapsed().as_secs_f64(),
        plan.stats.nodes_expanded,
        plan.stats.edges_evaluated,
        plan.edges.len()
    );

    let t = Instant::now();
    let stance: Vec<(FootId, nalgebra::Point3<f64>)> = vec![
        (FootId::RF, nalgebra::Point3::new(-0.93, -0.13, 0.04)),
        (FootId::LH, nalgebra::Point3::new(-1.27, 0.13, 0.04)),
        (FootId::RH, nalgebra::Point3::new(-1.27, -0.13, 0.04)),
    ];
    let p = steppa_core::trajopt::build_problem(
        stance,
        FootId::LF,
        nalgebra::Point3::new(-0.93, 0.13, 0.04),
        nalgebra::Point3::new(-0.73, 0.13, 0.04),
        &scene,
        steppa_core::trajopt::TransitionConfig::default(),
    )
    .unwrap();
    let sol = steppa_core::trajopt::solve(&p);
    println!("to solve: {:.3} s ({} iters, {:?})", t.elapsed().as_secs_f64(), sol.iterations, sol.status);

    let t = Instant::now();
    let report = run_episode(&scene, [-1.1, 0.0], &DisturbanceScript::default(), &NavConfig::default()).unwrap();
    println!(
        "episode: {:.3} s ({} ticks, {} replans, search times {:?}, to times sum {:.3})",
        t.elapsed().as_secs_f64(),
        report.ticks,
        report.replan_count,
        report.search_times,
        report.to_times.iter().sum::<f64>()
    );
}
