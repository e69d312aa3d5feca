//! Scene assembly, support snapping, serialization, and obstacle spawning.

use super::labels::assign_labels;
use super::mesh::{contains_point, env_box, tessellate, LabeledMesh};
use super::{
    Environment, GeometryError, GoalRegion, LabelPolicyConfig, Pose6D, PrimitiveId,
    PrimitiveInstance, PrimitiveParams, ShapeClass, SteppabilityLabel, DEFAULT_RESOLUTION,
    FLOOR_EXTENT,
};
use nalgebra::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const WALL_HEIGHT: f64 = 2.0;
const WALL_THICKNESS: f64 = 0.05;
/// Shapes are shrunk by this much in interpenetration tests, so tangent
/// contacts (e.g. a sphere resting on an incline) do not register.
const CONTACT_EPS: f64 = 2e-3;

/// Serializable scene document. Meshes are derived geometry and are never
/// serialized; rebuild them with [`Scene::from_doc`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDoc {
    pub seed: u64,
    pub environment: Environment,
    pub goal: GoalRegion,
    pub primitives: Vec<PrimitiveInstance>,
}

impl SceneDoc {
    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scene serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<SceneDoc, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// A fully built scene: placed primitives plus their labeled meshes.
///
/// Scenes are immutable once built; [`spawn_obstacle`] returns a new version.
#[derive(Debug, Clone)]
pub struct Scene {
    pub seed: u64,
    pub environment: Environment,
    pub goal: GoalRegion,
    pub primitives: Vec<PrimitiveInstance>,
    /// One labeled mesh per primitive, same order.
    pub meshes: Vec<LabeledMesh>,
    /// Walls and ceiling for indoor scenes; empty outdoors.
    pub env_meshes: Vec<LabeledMesh>,
    pub policy: LabelPolicyConfig,
    pub resolution: u32,
}

impl Scene {
    /// All renderable meshes: primitives first, then environment geometry.
    pub fn all_meshes(&self) -> impl Iterator<Item = &LabeledMesh> {
        self.meshes.iter().chain(self.env_meshes.iter())
    }

    pub fn primitive(&self, id: PrimitiveId) -> Option<&PrimitiveInstance> {
        self.primitives.iter().find(|p| p.id == id)
    }

    pub fn mesh_of(&self, id: PrimitiveId) -> Option<&LabeledMesh> {
        self.meshes.iter().find(|m| m.owner == Some(id))
    }

    pub fn next_id(&self) -> u64 {
        self.primitives.iter().map(|p| p.id.0).max().map_or(0, |m| m + 1)
    }

    pub fn doc(&self) -> SceneDoc {
        SceneDoc {
            seed: self.seed,
            environment: self.environment,
            goal: self.goal,
            primitives: self.primitives.clone(),
        }
    }

    /// Rebuild a scene from its document: tessellate, label, validate.
    pub fn from_doc(
        doc: SceneDoc,
        policy: LabelPolicyConfig,
        resolution: u32,
    ) -> Result<Scene, GeometryError> {
        policy.validate()?;
        let mut scene = Scene {
            seed: doc.seed,
            environment: doc.environment,
            goal: doc.goal,
            primitives: Vec::new(),
            meshes: Vec::new(),
            env_meshes: Vec::new(),
            policy,
            resolution,
        };
        for p in doc.primitives {
            let mesh = tessellate(&p, resolution)?;
            scene.meshes.push(assign_labels(mesh, &p, &policy));
            scene.primitives.push(p);
        }
        if scene.environment == Environment::Indoor {
            scene.env_meshes = indoor_shell();
        }
        validate_scene(&scene)?;
        Ok(scene)
    }
}

fn indoor_shell() -> Vec<LabeledMesh> {
    let half = FLOOR_EXTENT / 2.0;
    let t = WALL_THICKNESS;
    let span = FLOOR_EXTENT + 2.0 * t;
    let nb = SteppabilityLabel::NonPassable;
    vec![
        env_box([half + t / 2.0, 0.0, 0.0], [t, span, WALL_HEIGHT], nb),
        env_box([-half - t / 2.0, 0.0, 0.0], [t, span, WALL_HEIGHT], nb),
        env_box([0.0, half + t / 2.0, 0.0], [span, t, WALL_HEIGHT], nb),
        env_box([0.0, -half - t / 2.0, 0.0], [span, t, WALL_HEIGHT], nb),
        env_box([0.0, 0.0, WALL_HEIGHT], [span, span, t], nb),
    ]
}

/// Placement strategy for generated scenes.
#[derive(Debug, Clone)]
pub enum PlacementMode {
    /// Primitives concentrated around a sampled cluster center.
    Cluster,
    /// Primitives spread uniformly over the floor.
    Scatter,
    /// Explicit entries; poses are validated, never corrected.
    Manual(Vec<ManualEntry>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManualEntry {
    pub class: ShapeClass,
    pub params: PrimitiveParams,
    pub pose: Pose6D,
    pub known_to_planner: bool,
}

#[derive(Debug, Clone)]
pub struct SceneConfig {
    pub mode: PlacementMode,
    /// Number of instances to generate per class (ignored in manual mode).
    pub counts: Vec<(ShapeClass, u32)>,
    pub environment: Environment,
    pub seed: u64,
    pub goal: Option<GoalRegion>,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            mode: PlacementMode::Scatter,
            counts: Vec::new(),
            environment: Environment::Outdoor,
            seed: 0,
            goal: None,
        }
    }
}

/// Highest support surface under the footprint rectangle: the floor where it
/// overlaps, flat tops of other primitives, and any up-facing triangle hit
/// by a vertical ray through the rectangle center (catches inclines).
fn support_candidates(
    primitives: &[PrimitiveInstance],
    meshes: &[LabeledMesh],
    rect: ([f64; 2], [f64; 2]),
    exclude: Option<usize>,
) -> Vec<f64> {
    const MARGIN: f64 = 1e-9;
    let ([minx, miny], [maxx, maxy]) = rect;
    let half = FLOOR_EXTENT / 2.0;
    let mut out = Vec::new();
    for (k, (p, m)) in primitives.iter().zip(meshes).enumerate() {
        if exclude == Some(k) {
            continue;
        }
        match p.class {
            ShapeClass::Floor => {
                let (flo, fhi) = (p.pose.x - half, p.pose.x + half);
                let (glo, ghi) = (p.pose.y - half, p.pose.y + half);
                if maxx > flo + MARGIN && minx < fhi - MARGIN && maxy > glo + MARGIN && miny < ghi - MARGIN {
                    out.push(p.pose.z);
                }
            }
            ShapeClass::Cuboid | ShapeClass::Cylinder => {
                let ([tlo_x, tlo_y], [thi_x, thi_y]) = m.footprint();
                let top = match p.params {
                    PrimitiveParams::Box { h, .. } | PrimitiveParams::Elliptic { h, .. } => {
                        p.pose.z + h
                    }
                    _ => continue,
                };
                if maxx > tlo_x + MARGIN
                    && minx < thi_x - MARGIN
                    && maxy > tlo_y + MARGIN
                    && miny < thi_y - MARGIN
                {
                    out.push(top);
                }
            }
            _ => {}
        }
    }
    let cx = (minx + maxx) / 2.0;
    let cy = (miny + maxy) / 2.0;
    if let Some(z) = raycast_support(meshes, cx, cy, exclude) {
        out.push(z);
    }
    out
}

/// Highest support surface under the rectangle; placement snaps to this.
fn support_under(
    primitives: &[PrimitiveInstance],
    meshes: &[LabeledMesh],
    rect: ([f64; 2], [f64; 2]),
    exclude: Option<usize>,
) -> Option<f64> {
    support_candidates(primitives, meshes, rect, exclude)
        .into_iter()
        .reduce(f64::max)
}

/// z of the highest up-facing surface under the point, across all meshes.
pub fn support_height_at(scene: &Scene, x: f64, y: f64) -> Option<f64> {
    raycast_support(&scene.meshes, x, y, None)
}

fn raycast_support(meshes: &[LabeledMesh], x: f64, y: f64, exclude: Option<usize>) -> Option<f64> {
    let mut best: Option<f64> = None;
    for (k, m) in meshes.iter().enumerate() {
        if exclude == Some(k) {
            continue;
        }
        for f in 0..m.triangles.len() {
            if m.face_normal(f).z <= 1e-9 {
                continue;
            }
            let [a, b, c] = m.triangle_vertices(f);
            if let Some(z) = vertical_hit(&a, &b, &c, x, y) {
                best = Some(best.map_or(z, |v: f64| v.max(z)));
            }
        }
    }
    best
}

fn vertical_hit(a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>, x: f64, y: f64) -> Option<f64> {
    let sign = |p: &Point3<f64>, q: &Point3<f64>| (x - q.x) * (p.y - q.y) - (p.x - q.x) * (y - q.y);
    let (d1, d2, d3) = (sign(a, b), sign(b, c), sign(c, a));
    let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    if has_neg && has_pos {
        return None;
    }
    // Barycentric interpolation of z at (x, y).
    let det = (b.y - c.y) * (a.x - c.x) + (c.x - b.x) * (a.y - c.y);
    if det.abs() < 1e-15 {
        return None;
    }
    let l1 = ((b.y - c.y) * (x - c.x) + (c.x - b.x) * (y - c.y)) / det;
    let l2 = ((c.y - a.y) * (x - c.x) + (a.x - c.x) * (y - c.y)) / det;
    let l3 = 1.0 - l1 - l2;
    Some(l1 * a.z + l2 * b.z + l3 * c.z)
}

fn aabb_volume_overlap(a: &LabeledMesh, b: &LabeledMesh, eps: f64) -> bool {
    let (alo, ahi) = a.aabb();
    let (blo, bhi) = b.aabb();
    (0..3).all(|k| ahi[k].min(bhi[k]) - alo[k].max(blo[k]) > eps)
}

fn vertices_inside(host: &PrimitiveInstance, mesh: &LabeledMesh, eps: f64) -> bool {
    mesh.vertices.iter().any(|v| contains_point(host, v, eps))
}

/// Assemble a complete scene: floor first, then primitives placed per mode
/// with z snapped to support surfaces. Deterministic for a given config.
pub fn assemble_scene(
    config: &SceneConfig,
    policy: &LabelPolicyConfig,
) -> Result<Scene, GeometryError> {
    policy.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut scene = Scene {
        seed: config.seed,
        environment: config.environment,
        goal: config
            .goal
            .unwrap_or(GoalRegion::new([1.5, 0.0, 0.30], 0.4)),
        primitives: Vec::new(),
        meshes: Vec::new(),
        env_meshes: Vec::new(),
        policy: *policy,
        resolution: DEFAULT_RESOLUTION,
    };

    let floor = PrimitiveInstance::new(
        0,
        ShapeClass::Floor,
        PrimitiveParams::Floor {},
        Pose6D::origin(),
        true,
    );
    push_labeled(&mut scene, floor, policy)?;

    match &config.mode {
        PlacementMode::Manual(entries) => {
            for (k, entry) in entries.iter().enumerate() {
                let id = PrimitiveId(k as u64 + 1);
                place_manual(&mut scene, id, entry, policy)?;
            }
        }
        mode @ (PlacementMode::Scatter | PlacementMode::Cluster) => {
            let cluster_center: Option<[f64; 2]> = match mode {
                PlacementMode::Cluster => Some([
                    rng.random_range(-1.0..=1.0),
                    rng.random_range(-1.0..=1.0),
                ]),
                _ => None,
            };
            let mut next_id = 1u64;
            for &(class, count) in &config.counts {
                if class == ShapeClass::Floor {
                    continue;
                }
                for _ in 0..count {
                    let mut inst = super::sample_primitive(class, next_id, &mut rng)?;
                    let (x, y) = match cluster_center {
                        Some([cx, cy]) => {
                            let dx: f64 = sample_normal(&mut rng, 0.35);
                            let dy: f64 = sample_normal(&mut rng, 0.35);
                            ((cx + dx).clamp(-1.7, 1.7), (cy + dy).clamp(-1.7, 1.7))
                        }
                        None => (
                            rng.random_range(-1.7..=1.7),
                            rng.random_range(-1.7..=1.7),
                        ),
                    };
                    let yaw = rng.random_range(-std::f64::consts::PI..=std::f64::consts::PI);
                    inst.pose = Pose6D::new(x, y, 0.0, 0.0, 0.0, yaw);
                    // Probe footprint at z = 0, then snap onto the support.
                    let probe = tessellate(&inst, scene.resolution)?;
                    let support =
                        support_under(&scene.primitives, &scene.meshes, probe.footprint(), None)
                            .unwrap_or(0.0);
                    inst.pose.z = support;
                    push_labeled(&mut scene, inst, policy)?;
                    next_id += 1;
                }
            }
        }
    }

    if config.environment == Environment::Indoor {
        scene.env_meshes = indoor_shell();
    }
    Ok(scene)
}

fn sample_normal(rng: &mut impl Rng, sigma: f64) -> f64 {
    use rand_distr::Distribution;
    rand_distr::Normal::new(0.0, sigma).unwrap().sample(rng)
}

fn push_labeled(
    scene: &mut Scene,
    instance: PrimitiveInstance,
    policy: &LabelPolicyConfig,
) -> Result<(), GeometryError> {
    let mesh = tessellate(&instance, scene.resolution)?;
    scene.meshes.push(assign_labels(mesh, &instance, policy));
    scene.primitives.push(instance);
    Ok(())
}

fn place_manual(
    scene: &mut Scene,
    id: PrimitiveId,
    entry: &ManualEntry,
    policy: &LabelPolicyConfig,
) -> Result<(), GeometryError> {
    let inst = PrimitiveInstance {
        id,
        class: entry.class,
        params: entry.params,
        pose: entry.pose,
        known_to_planner: entry.known_to_planner,
    };
    if inst.class.is_flat_topped() && (inst.pose.roll != 0.0 || inst.pose.pitch != 0.0) {
        return Err(GeometryError::TiltedFlatTop { id, class: inst.class });
    }
    let mesh = tessellate(&inst, scene.resolution)?;
    let candidates = support_candidates(&scene.primitives, &scene.meshes, mesh.footprint(), None);
    let min_z = mesh.min_z();
    if !candidates.iter().any(|s| (min_z - s).abs() <= 1e-6) {
        return Err(GeometryError::SupportViolation {
            id,
            detail: format!("lowest point at z={min_z:.6}, supports at {candidates:?}"),
        });
    }
    for (other, other_mesh) in scene.primitives.iter().zip(&scene.meshes) {
        if other.class == ShapeClass::Floor {
            continue;
        }
        if aabb_volume_overlap(&mesh, other_mesh, 1e-9)
            && (vertices_inside(&inst, other_mesh, CONTACT_EPS)
                || vertices_inside(other, &mesh, CONTACT_EPS))
        {
            return Err(GeometryError::Interpenetration { id, other: other.id });
        }
    }
    scene.meshes.push(assign_labels(mesh, &inst, policy));
    scene.primitives.push(inst);
    Ok(())
}

/// Extend the scene with a new obstacle. The instance is forced to
/// `known_to_planner = false`, must rest on a support surface, and must not
/// interpenetrate existing primitives. Returns a new scene version.
pub fn spawn_obstacle(
    scene: &Scene,
    mut instance: PrimitiveInstance,
) -> Result<Scene, GeometryError> {
    instance.known_to_planner = false;
    if scene.primitives.iter().any(|p| p.id == instance.id) {
        return Err(GeometryError::DuplicateId(instance.id));
    }
    let mesh = tessellate(&instance, scene.resolution)?;
    let candidates = support_candidates(&scene.primitives, &scene.meshes, mesh.footprint(), None);
    let min_z = mesh.min_z();
    if !candidates.iter().any(|s| (min_z - s).abs() <= 1e-6) {
        return Err(GeometryError::SupportViolation {
            id: instance.id,
            detail: format!("lowest point at z={min_z:.6}, supports at {candidates:?}"),
        });
    }
    for (other, other_mesh) in scene.primitives.iter().zip(&scene.meshes) {
        if other.class == ShapeClass::Floor {
            continue;
        }
        if aabb_volume_overlap(&mesh, other_mesh, 1e-9)
            && (vertices_inside(&instance, other_mesh, CONTACT_EPS)
                || vertices_inside(other, &mesh, CONTACT_EPS))
        {
            return Err(GeometryError::Interpenetration {
                id: instance.id,
                other: other.id,
            });
        }
    }
    let mut next = scene.clone();
    next.meshes.push(assign_labels(mesh, &instance, &scene.policy));
    next.primitives.push(instance);
    Ok(next)
}

/// Structural invariants: unique ids, one labeled mesh per primitive, indoor
/// shell present, support property, flat tops level.
pub fn validate_scene(scene: &Scene) -> Result<(), GeometryError> {
    let mut ids = std::collections::HashSet::new();
    for p in &scene.primitives {
        if !ids.insert(p.id) {
            return Err(GeometryError::DuplicateId(p.id));
        }
        if !p.pose.is_normalized() {
            return Err(GeometryError::Invalid(format!(
                "primitive {} orientation not normalized",
                p.id
            )));
        }
        if p.class.is_flat_topped() && (p.pose.roll != 0.0 || p.pose.pitch != 0.0) {
            return Err(GeometryError::TiltedFlatTop { id: p.id, class: p.class });
        }
    }
    if scene.meshes.len() != scene.primitives.len() {
        return Err(GeometryError::Invalid(format!(
            "{} primitives but {} meshes",
            scene.primitives.len(),
            scene.meshes.len()
        )));
    }
    for (p, m) in scene.primitives.iter().zip(&scene.meshes) {
        if m.owner != Some(p.id) {
            return Err(GeometryError::Invalid(format!(
                "mesh owner mismatch for primitive {}",
                p.id
            )));
        }
        if !m.is_labeled() {
            return Err(GeometryError::Invalid(format!("mesh of {} unlabeled", p.id)));
        }
        if p.class != ShapeClass::Floor {
            let k = scene.primitives.iter().position(|q| q.id == p.id);
            let candidates = support_candidates(&scene.primitives, &scene.meshes, m.footprint(), k);
            let min_z = m.min_z();
            if !candidates.iter().any(|s| (min_z - s).abs() <= 1e-6) {
                return Err(GeometryError::SupportViolation {
                    id: p.id,
                    detail: format!("base at z={min_z:.6} does not rest on a support surface"),
                });
            }
        }
    }
    if scene.environment == Environment::Indoor && scene.env_meshes.len() != 5 {
        return Err(GeometryError::Invalid("indoor scene missing wall meshes".into()));
    }
    for m in &scene.env_meshes {
        if !m
            .face_labels
            .iter()
            .all(|l| *l == SteppabilityLabel::NonPassable)
        {
            return Err(GeometryError::Invalid("environment mesh not non-passable".into()));
        }
    }
    Ok(())
}
