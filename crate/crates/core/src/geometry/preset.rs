//! Built-in benchmark scenes.
//!
//! All presets keep the floor out of the planner's known-object set: the
//! walkable surfaces are explicit platforms, stones, steps, and ramps, which
//! keeps foothold lattices small. Obstacles are marked unknown so they
//! influence planning only through the rendered steppability mask.

use super::scene::{assemble_scene, ManualEntry, PlacementMode, Scene, SceneConfig};
use super::{
    Environment, GeometryError, GoalRegion, LabelPolicyConfig, Pose6D, PrimitiveParams, ShapeClass,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetKind {
    /// Irregular stepping stones with spherical obstacles on the short route.
    SteppingStonesWithSpheres,
    /// A flight of stairs rising to a platform with a tall pillar on top.
    Staircase,
    /// A gentle ramp up to a plateau; obstacles arrive only via spawning.
    SlopedWithObstacle,
}

impl PresetKind {
    pub const ALL: [PresetKind; 3] = [
        PresetKind::SteppingStonesWithSpheres,
        PresetKind::Staircase,
        PresetKind::SlopedWithObstacle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PresetKind::SteppingStonesWithSpheres => "stepping-stones",
            PresetKind::Staircase => "staircase",
            PresetKind::SlopedWithObstacle => "sloped",
        }
    }
}

impl std::str::FromStr for PresetKind {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PresetKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GeometryError::UnknownClass(format!("preset `{s}`")))
    }
}

fn cuboid(x: f64, y: f64, z: f64, l: f64, w: f64, h: f64, known: bool) -> ManualEntry {
    ManualEntry {
        class: ShapeClass::Cuboid,
        params: PrimitiveParams::Box { l, w, h },
        pose: Pose6D::at(x, y, z),
        known_to_planner: known,
    }
}

fn sphere(x: f64, y: f64, z: f64, r: f64) -> ManualEntry {
    ManualEntry {
        class: ShapeClass::Sphere,
        params: PrimitiveParams::Round { r },
        pose: Pose6D::at(x, y, z),
        known_to_planner: false,
    }
}

/// Recommended torso start position (x, y, ground z) for each preset.
pub fn preset_start(kind: PresetKind) -> [f64; 3] {
    match kind {
        PresetKind::SteppingStonesWithSpheres => [-1.10, 0.0, 0.04],
        PresetKind::Staircase => [-0.90, 0.0, 0.04],
        PresetKind::SlopedWithObstacle => [-0.82, 0.0, 0.03],
    }
}

/// Build one of the benchmark scenes. Deterministic; the scene seed only
/// feeds downstream consumers (rendering jitter, dataset splits).
pub fn preset_scene(kind: PresetKind) -> Scene {
    let (entries, goal) = match kind {
        PresetKind::SteppingStonesWithSpheres => stepping_stones(),
        PresetKind::Staircase => staircase(),
        PresetKind::SlopedWithObstacle => sloped(),
    };
    let mut config = SceneConfig {
        mode: PlacementMode::Manual(entries),
        environment: Environment::Outdoor,
        seed: 0,
        goal: Some(goal),
        ..SceneConfig::default()
    };
    config.counts.clear();
    let mut scene =
        assemble_scene(&config, &LabelPolicyConfig::default()).expect("preset scenes are valid");
    // The floor renders and labels normally but holds no planned footholds.
    scene.primitives[0].known_to_planner = false;
    scene
}

fn stepping_stones() -> (Vec<ManualEntry>, GoalRegion) {
    let mut e = Vec::new();
    // Start and goal platforms.
    e.push(cuboid(-1.10, 0.0, 0.0, 0.80, 0.80, 0.04, true));
    e.push(cuboid(1.80, 0.0, 0.0, 0.80, 0.80, 0.04, true));
    // Short route: irregular stones straight toward the goal. The gap between
    // the second stone and the far stone is too wide to cross directly; the
    // tiny middle stone is the only bridge, and a sphere sits on it.
    e.push(cuboid(-0.35, 0.00, 0.0, 0.34, 0.34, 0.05, true));
    e.push(cuboid(0.07, 0.02, 0.0, 0.34, 0.34, 0.07, true));
    e.push(cuboid(0.41, -0.01, 0.0, 0.10, 0.10, 0.06, true)); // bridge stone
    e.push(cuboid(0.78, 0.01, 0.0, 0.34, 0.34, 0.05, true));
    e.push(cuboid(1.16, -0.02, 0.0, 0.34, 0.34, 0.06, true));
    // Detour chain around the bridge, clean but longer.
    e.push(cuboid(-0.15, 0.45, 0.0, 0.34, 0.34, 0.05, true));
    e.push(cuboid(0.23, 0.47, 0.0, 0.34, 0.34, 0.06, true));
    e.push(cuboid(0.61, 0.45, 0.0, 0.34, 0.34, 0.05, true));
    e.push(cuboid(0.99, 0.46, 0.0, 0.34, 0.34, 0.06, true));
    // Spherical obstacle capping the bridge stone (diameter 0.12 > h_max).
    e.push(sphere(0.41, -0.01, 0.06, 0.06));
    let goal = GoalRegion::new([1.80, 0.0, 0.34], 0.40);
    (e, goal)
}

fn staircase() -> (Vec<ManualEntry>, GoalRegion) {
    let mut e = Vec::new();
    e.push(cuboid(-0.90, 0.0, 0.0, 0.80, 1.00, 0.04, true));
    // Five steps, 0.08 m risers, 0.30 m treads, rising to a landing platform.
    for k in 0..5 {
        let h = 0.12 + 0.08 * k as f64;
        e.push(cuboid(-0.35 + 0.30 * k as f64, 0.0, 0.0, 0.30, 1.00, h, true));
    }
    e.push(cuboid(1.50, 0.0, 0.0, 1.00, 1.00, 0.44, true));
    // Tall pillar on the landing, revealed only near the top of the stairs.
    e.push(ManualEntry {
        class: ShapeClass::Cuboid,
        params: PrimitiveParams::Box { l: 0.22, w: 0.22, h: 0.80 },
        pose: Pose6D::at(1.35, 0.22, 0.44),
        known_to_planner: false,
    });
    let goal = GoalRegion::new([1.80, -0.10, 0.74], 0.40);
    (e, goal)
}

fn sloped() -> (Vec<ManualEntry>, GoalRegion) {
    let mut e = Vec::new();
    e.push(cuboid(-0.82, 0.0, 0.0, 0.80, 1.00, 0.03, true));
    // Ramp rising toward +x onto a flush plateau.
    e.push(ManualEntry {
        class: ShapeClass::Ramp,
        params: PrimitiveParams::Box { l: 1.40, w: 1.20, h: 0.16 },
        pose: Pose6D::at(0.28, 0.0, 0.0),
        known_to_planner: true,
    });
    e.push(cuboid(1.48, 0.0, 0.0, 1.00, 1.20, 0.16, true));
    let goal = GoalRegion::new([1.70, 0.0, 0.46], 0.40);
    (e, goal)
}

#[cfg(test)]
mod tests {
    use super::super::{validate_scene, SteppabilityLabel};
    use super::*;

    #[test]
    fn presets_validate() {
        for kind in PresetKind::ALL {
            let scene = preset_scene(kind);
            validate_scene(&scene).unwrap();
            assert!(!scene.primitives[0].known_to_planner);
        }
    }

    #[test]
    fn stepping_stones_spheres_rest_on_stone_tops() {
        let scene = preset_scene(PresetKind::SteppingStonesWithSpheres);
        for (p, m) in scene.primitives.iter().zip(&scene.meshes) {
            if p.class != ShapeClass::Sphere {
                continue;
            }
            // Some stone's top surface carries the sphere's lowest point.
            let stone = scene
                .primitives
                .iter()
                .zip(&scene.meshes)
                .find(|(q, qm)| {
                    q.class == ShapeClass::Cuboid && {
                        let ([lx, ly], [hx, hy]) = qm.footprint();
                        let top = match q.params {
                            PrimitiveParams::Box { h, .. } => q.pose.z + h,
                            _ => return false,
                        };
                        p.pose.x >= lx
                            && p.pose.x <= hx
                            && p.pose.y >= ly
                            && p.pose.y <= hy
                            && (m.min_z() - top).abs() < 1e-9
                    }
                });
            assert!(stone.is_some(), "sphere {} not on a stone top", p.id);
            assert!(m
                .face_labels
                .iter()
                .all(|l| *l == SteppabilityLabel::NonPassable));
        }
    }

    #[test]
    fn staircase_risers_within_swing_height() {
        let scene = preset_scene(PresetKind::Staircase);
        let h_max = scene.policy.h_max;
        let mut tops: Vec<f64> = scene.primitives[1..]
            .iter()
            .filter(|p| p.known_to_planner)
            .filter_map(|p| match p.params {
                PrimitiveParams::Box { h, .. } => Some(p.pose.z + h),
                _ => None,
            })
            .collect();
        tops.sort_by(f64::total_cmp);
        for w in tops.windows(2) {
            assert!(w[1] - w[0] <= h_max + 1e-12, "riser {} too tall", w[1] - w[0]);
        }
    }

    #[test]
    fn sloped_ramp_top_is_steppable() {
        let scene = preset_scene(PresetKind::SlopedWithObstacle);
        for (p, m) in scene.primitives.iter().zip(&scene.meshes) {
            if p.class != ShapeClass::Ramp {
                continue;
            }
            for (kind, label) in m.face_kinds.iter().zip(&m.face_labels) {
                if *kind == super::super::FaceKind::Top {
                    assert_eq!(*label, SteppabilityLabel::Steppable);
                }
            }
        }
    }
}
