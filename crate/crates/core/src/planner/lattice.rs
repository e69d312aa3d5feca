//! Candidate foothold lattices over steppable faces.

use super::PlannerError;
use crate::geometry::{LabeledMesh, PrimitiveId, Scene, SteppabilityLabel};
use nalgebra::Point3;
use std::collections::{HashMap, HashSet};

/// One candidate foothold: a point on a steppable face of a known object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePoint {
    pub position: Point3<f64>,
    pub object: PrimitiveId,
}

/// Uniform grid of candidate footholds per steppable face.
#[derive(Debug, Clone)]
pub struct FootholdLattice {
    pub points: Vec<LatticePoint>,
    pub resolution: f64,
    /// 2D spatial hash for window queries; cell size = `cell`.
    cell: f64,
    grid: HashMap<(i32, i32), Vec<u32>>,
}

#[derive(Debug, Clone, Default)]
pub struct LatticeOptions {
    /// Restrict to these object ids (the perceived region during
    /// navigation); `None` admits every known object.
    pub object_filter: Option<HashSet<PrimitiveId>>,
    /// Extra footholds to inject verbatim (e.g. the current stance during a
    /// re-plan), given as (object, position).
    pub extra_points: Vec<(PrimitiveId, [f64; 3])>,
}

/// Sample a uniform grid on every steppable face of every known object.
///
/// The grid is centered on the face centroid with spacing `resolution`;
/// points closer than `resolution / 2` to the face edge are dropped. A face
/// too small to hold any grid point contributes its centroid instead.
pub fn build_lattice(
    scene: &Scene,
    resolution: f64,
    options: &LatticeOptions,
) -> Result<FootholdLattice, PlannerError> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(PlannerError::BadResolution(resolution));
    }
    let mut points = Vec::new();
    for (p, mesh) in scene.primitives.iter().zip(&scene.meshes) {
        if !p.known_to_planner {
            continue;
        }
        if let Some(filter) = &options.object_filter {
            if !filter.contains(&p.id) {
                continue;
            }
        }
        let faces: Vec<usize> = (0..mesh.triangles.len())
            .filter(|f| mesh.face_labels[*f] == SteppabilityLabel::Steppable)
            .collect();
        if faces.is_empty() {
            continue;
        }
        sample_face(mesh, &faces, resolution, p.id, &mut points);
    }
    for (object, pos) in &options.extra_points {
        points.push(LatticePoint { position: Point3::new(pos[0], pos[1], pos[2]), object: *object });
    }
    if points.is_empty() {
        return Err(PlannerError::NoSteppableFaces);
    }
    Ok(FootholdLattice::index(points, resolution))
}

fn sample_face(
    mesh: &LabeledMesh,
    faces: &[usize],
    resolution: f64,
    object: PrimitiveId,
    out: &mut Vec<LatticePoint>,
) {
    // Face centroid and bounds in the ground plane.
    let (mut cx, mut cy, mut area) = (0.0, 0.0, 0.0);
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for &f in faces {
        let [a, b, c] = mesh.triangle_vertices(f);
        let w = 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)).abs();
        cx += w * (a.x + b.x + c.x) / 3.0;
        cy += w * (a.y + b.y + c.y) / 3.0;
        area += w;
        for v in [a, b, c] {
            lo[0] = lo[0].min(v.x);
            lo[1] = lo[1].min(v.y);
            hi[0] = hi[0].max(v.x);
            hi[1] = hi[1].max(v.y);
        }
    }
    if area < 1e-12 {
        return;
    }
    cx /= area;
    cy /= area;

    let hits_face = |x: f64, y: f64| -> Option<f64> {
        let mut best: Option<f64> = None;
        for &f in faces {
            let [a, b, c] = mesh.triangle_vertices(f);
            if let Some(z) = vertical_face_hit(&a, &b, &c, x, y) {
                best = Some(best.map_or(z, |v: f64| v.max(z)));
            }
        }
        best
    };
    // Margin probe: the point plus a ring at half resolution must all land
    // on the face.
    let margin = resolution / 2.0;
    let clear_of_edges = |x: f64, y: f64| -> bool {
        let diag = margin * std::f64::consts::FRAC_1_SQRT_2;
        [
            (margin, 0.0),
            (-margin, 0.0),
            (0.0, margin),
            (0.0, -margin),
            (diag, diag),
            (diag, -diag),
            (-diag, diag),
            (-diag, -diag),
        ]
        .iter()
        .all(|(dx, dy)| hits_face(x + dx, y + dy).is_some())
    };

    let kx_max = ((hi[0] - lo[0]) / resolution).ceil() as i64 + 1;
    let ky_max = ((hi[1] - lo[1]) / resolution).ceil() as i64 + 1;
    let before = out.len();
    for ky in -ky_max..=ky_max {
        for kx in -kx_max..=kx_max {
            let x = cx + kx as f64 * resolution;
            let y = cy + ky as f64 * resolution;
            if let Some(z) = hits_face(x, y) {
                if clear_of_edges(x, y) {
                    out.push(LatticePoint { position: Point3::new(x, y, z), object });
                }
            }
        }
    }
    if out.len() == before {
        if let Some(z) = hits_face(cx, cy) {
            out.push(LatticePoint { position: Point3::new(cx, cy, z), object });
        }
    }
}

fn vertical_face_hit(
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
    x: f64,
    y: f64,
) -> Option<f64> {
    let sign = |p: &Point3<f64>, q: &Point3<f64>| (x - q.x) * (p.y - q.y) - (p.x - q.x) * (y - q.y);
    let (d1, d2, d3) = (sign(a, b), sign(b, c), sign(c, a));
    let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    if has_neg && has_pos {
        return None;
    }
    let det = (b.y - c.y) * (a.x - c.x) + (c.x - b.x) * (a.y - c.y);
    if det.abs() < 1e-15 {
        return None;
    }
    let l1 = ((b.y - c.y) * (x - c.x) + (c.x - b.x) * (y - c.y)) / det;
    let l2 = ((c.y - a.y) * (x - c.x) + (a.x - c.x) * (y - c.y)) / det;
    Some(l1 * a.z + l2 * b.z + (1.0 - l1 - l2) * c.z)
}

impl FootholdLattice {
    fn index(points: Vec<LatticePoint>, resolution: f64) -> FootholdLattice {
        let cell = 0.30f64;
        let mut grid: HashMap<(i32, i32), Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            let key = (
                (p.position.x / cell).floor() as i32,
                (p.position.y / cell).floor() as i32,
            );
            grid.entry(key).or_default().push(i as u32);
        }
        FootholdLattice { points, resolution, cell, grid }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, idx: u32) -> &LatticePoint {
        &self.points[idx as usize]
    }

    /// Indices of points whose (x, y) lies within the axis-aligned window,
    /// ascending for deterministic iteration.
    pub fn in_window(&self, center: [f64; 2], half_x: f64, half_y: f64) -> Vec<u32> {
        let mut out = Vec::new();
        let (x0, x1) = (center[0] - half_x, center[0] + half_x);
        let (y0, y1) = (center[1] - half_y, center[1] + half_y);
        let (cx0, cx1) = (
            (x0 / self.cell).floor() as i32,
            (x1 / self.cell).floor() as i32,
        );
        let (cy0, cy1) = (
            (y0 / self.cell).floor() as i32,
            (y1 / self.cell).floor() as i32,
        );
        for cx in cx0..=cx1 {
            for cy in cy0..=cy1 {
                if let Some(ids) = self.grid.get(&(cx, cy)) {
                    for &i in ids {
                        let p = self.points[i as usize].position;
                        if p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1 {
                            out.push(i);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Nearest point to a 3D position, or `None` beyond `max_dist`.
    pub fn nearest(&self, p: &Point3<f64>, max_dist: f64) -> Option<u32> {
        let candidates = self.in_window([p.x, p.y], max_dist, max_dist);
        candidates
            .into_iter()
            .map(|i| (i, (self.points[i as usize].position - p).norm()))
            .filter(|(_, d)| *d <= max_dist)
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(i, _)| i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        assemble_scene, LabelPolicyConfig, ManualEntry, PlacementMode, Pose6D, PrimitiveParams,
        SceneConfig, ShapeClass,
    };

    fn stone_scene(l: f64, w: f64) -> Scene {
        let mut scene = assemble_scene(
            &SceneConfig {
                mode: PlacementMode::Manual(vec![ManualEntry {
                    class: ShapeClass::Cuboid,
                    params: PrimitiveParams::Box { l, w, h: 0.05 },
                    pose: Pose6D::at(0.0, 0.0, 0.0),
                    known_to_planner: true,
                }]),
                ..SceneConfig::default()
            },
            &LabelPolicyConfig::default(),
        )
        .unwrap();
        scene.primitives[0].known_to_planner = false; // ignore the floor
        scene
    }

    #[test]
    fn unit_face_grid_matches_enumeration_oracle() {
        let scene = stone_scene(1.0, 1.0);
        let lattice = build_lattice(&scene, 0.25, &LatticeOptions::default()).unwrap();
        // Oracle: grid centered on the face center, points kept when at
        // least resolution/2 from every edge of the 1x1 top face.
        let mut expected = Vec::new();
        for ky in -10i32..=10 {
            for kx in -10i32..=10 {
                let (x, y) = (0.25 * kx as f64, 0.25 * ky as f64);
                if x.abs() <= 0.5 - 0.125 + 1e-12 && y.abs() <= 0.5 - 0.125 + 1e-12 {
                    expected.push((x, y));
                }
            }
        }
        assert_eq!(lattice.len(), expected.len());
        assert_eq!(lattice.len(), 9);
        for p in &lattice.points {
            assert!((p.position.z - 0.05).abs() < 1e-12);
            assert!(
                expected
                    .iter()
                    .any(|(x, y)| (p.position.x - x).abs() < 1e-9
                        && (p.position.y - y).abs() < 1e-9),
                "unexpected point {:?}",
                p.position
            );
        }
    }

    #[test]
    fn tiny_face_falls_back_to_centroid() {
        let scene = stone_scene(0.08, 0.08);
        let lattice = build_lattice(&scene, 0.25, &LatticeOptions::default()).unwrap();
        assert_eq!(lattice.len(), 1);
        let p = lattice.point(0);
        assert!(p.position.x.abs() < 1e-9 && p.position.y.abs() < 1e-9);
    }

    #[test]
    fn unknown_objects_contribute_nothing() {
        let mut scene = stone_scene(1.0, 1.0);
        scene.primitives[1].known_to_planner = false;
        assert!(matches!(
            build_lattice(&scene, 0.25, &LatticeOptions::default()),
            Err(PlannerError::NoSteppableFaces)
        ));
    }

    #[test]
    fn ramp_points_lie_on_the_incline() {
        let scene = assemble_scene(
            &SceneConfig {
                mode: PlacementMode::Manual(vec![ManualEntry {
                    class: ShapeClass::Ramp,
                    params: PrimitiveParams::Box { l: 1.0, w: 0.8, h: 0.2 },
                    pose: Pose6D::at(0.0, 0.0, 0.0),
                    known_to_planner: true,
                }]),
                ..SceneConfig::default()
            },
            &LabelPolicyConfig::default(),
        )
        .unwrap();
        let mut scene = scene;
        scene.primitives[0].known_to_planner = false;
        let lattice = build_lattice(&scene, 0.1, &LatticeOptions::default()).unwrap();
        assert!(!lattice.is_empty());
        for p in &lattice.points {
            let expect_z = (p.position.x + 0.5) / 1.0 * 0.2;
            assert!((p.position.z - expect_z).abs() < 1e-9);
        }
    }

    #[test]
    fn window_queries_match_linear_scan() {
        let scene = stone_scene(1.2, 0.9);
        let lattice = build_lattice(&scene, 0.1, &LatticeOptions::default()).unwrap();
        let windows = [([0.0, 0.0], 0.3, 0.15), ([0.4, -0.2], 0.25, 0.25), ([2.0, 2.0], 0.3, 0.3)];
        for (c, hx, hy) in windows {
            let got = lattice.in_window(c, hx, hy);
            let expected: Vec<u32> = (0..lattice.len() as u32)
                .filter(|i| {
                    let p = lattice.point(*i).position;
                    (p.x - c[0]).abs() <= hx && (p.y - c[1]).abs() <= hy
                })
                .collect();
            assert_eq!(got, expected);
        }
    }
}
