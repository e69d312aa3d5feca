//! Watertight triangle meshes for the primitive shape classes.
//!
//! All shapes are tessellated in a local frame whose z = 0 plane touches the
//! lowest point of the shape, so `pose.z` is exactly the height of the
//! supporting surface underneath. Curved surfaces are approximated with a
//! configurable number of facets per full revolution.

use super::{GeometryError, PrimitiveId, PrimitiveInstance, PrimitiveParams, ShapeClass};
use super::{Pose6D, SteppabilityLabel};
use nalgebra::{Point3, Vector3};

/// Logical face role of a triangle, used by the label policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    /// The steppable candidate face (flat or inclined top).
    Top,
    /// Side faces of flat-topped shapes.
    Vertical,
    /// Bottom faces of flat-topped shapes.
    Bottom,
    /// Whole-body surface of shapes labeled as a unit.
    Body,
}

/// Triangle mesh in world coordinates with per-face labels.
#[derive(Debug, Clone)]
pub struct LabeledMesh {
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[u32; 3]>,
    pub face_kinds: Vec<FaceKind>,
    /// One label per triangle; empty until assigned by the label policy.
    pub face_labels: Vec<SteppabilityLabel>,
    /// Owning primitive, or `None` for environment geometry (walls, ceiling).
    pub owner: Option<PrimitiveId>,
}

impl LabeledMesh {
    pub fn triangle_vertices(&self, face: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.triangles[face];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn face_normal(&self, face: usize) -> Vector3<f64> {
        let [a, b, c] = self.triangle_vertices(face);
        (b - a).cross(&(c - a))
    }

    pub fn min_z(&self) -> f64 {
        self.vertices.iter().map(|v| v.z).fold(f64::INFINITY, f64::min)
    }

    pub fn aabb(&self) -> (Point3<f64>, Point3<f64>) {
        let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Axis-aligned footprint `[min_x, min_y] .. [max_x, max_y]`.
    pub fn footprint(&self) -> ([f64; 2], [f64; 2]) {
        let (lo, hi) = self.aabb();
        ([lo.x, lo.y], [hi.x, hi.y])
    }

    pub fn is_labeled(&self) -> bool {
        self.face_labels.len() == self.triangles.len()
    }

    /// Every undirected edge shared by exactly two triangles, with opposite
    /// direction in each (consistent orientation).
    pub fn is_watertight(&self) -> bool {
        use std::collections::HashMap;
        let mut directed: HashMap<(u32, u32), u32> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let e = (t[k], t[(k + 1) % 3]);
                *directed.entry(e).or_insert(0) += 1;
            }
        }
        directed.iter().all(|(&(a, b), &n)| {
            n == 1 && directed.get(&(b, a)).copied() == Some(1)
        })
    }

    /// V - E + F over unique vertices and undirected edges.
    pub fn euler_characteristic(&self) -> i64 {
        use std::collections::HashSet;
        let mut edges: HashSet<(u32, u32)> = HashSet::new();
        let mut used: HashSet<u32> = HashSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
                used.insert(a);
            }
        }
        used.len() as i64 - edges.len() as i64 + self.triangles.len() as i64
    }
}

struct MeshBuilder {
    vertices: Vec<Point3<f64>>,
    triangles: Vec<[u32; 3]>,
    kinds: Vec<FaceKind>,
}

impl MeshBuilder {
    fn new() -> Self {
        MeshBuilder {
            vertices: Vec::new(),
            triangles: Vec::new(),
            kinds: Vec::new(),
        }
    }

    fn vertex(&mut self, x: f64, y: f64, z: f64) -> u32 {
        self.vertices.push(Point3::new(x, y, z));
        (self.vertices.len() - 1) as u32
    }

    fn tri(&mut self, a: u32, b: u32, c: u32, kind: FaceKind) {
        self.triangles.push([a, b, c]);
        self.kinds.push(kind);
    }

    fn quad(&mut self, a: u32, b: u32, c: u32, d: u32, kind: FaceKind) {
        self.tri(a, b, c, kind);
        self.tri(a, c, d, kind);
    }

    /// Merge duplicate vertices (welds seams so the mesh closes up).
    fn weld(&mut self) {
        use std::collections::HashMap;
        let quantize = |v: &Point3<f64>| {
            (
                (v.x * 1e9).round() as i64,
                (v.y * 1e9).round() as i64,
                (v.z * 1e9).round() as i64,
            )
        };
        let mut remap = vec![0u32; self.vertices.len()];
        let mut seen: HashMap<(i64, i64, i64), u32> = HashMap::new();
        let mut merged = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            let key = quantize(v);
            match seen.get(&key) {
                Some(&j) => remap[i] = j,
                None => {
                    let j = merged.len() as u32;
                    merged.push(*v);
                    seen.insert(key, j);
                    remap[i] = j;
                }
            }
        }
        self.vertices = merged;
        for t in &mut self.triangles {
            for idx in t.iter_mut() {
                *idx = remap[*idx as usize];
            }
        }
    }

    fn finish(mut self, pose: &Pose6D, owner: Option<PrimitiveId>) -> LabeledMesh {
        self.weld();
        let rot = pose.rotation();
        let t = pose.translation();
        for v in &mut self.vertices {
            *v = rot * *v + t;
        }
        LabeledMesh {
            vertices: self.vertices,
            triangles: self.triangles,
            face_kinds: self.kinds,
            face_labels: Vec::new(),
            owner,
        }
    }
}

fn box_into(b: &mut MeshBuilder, l: f64, w: f64, h: f64) {
    let (hx, hy) = (l / 2.0, w / 2.0);
    // Top, z = h.
    let t0 = b.vertex(-hx, -hy, h);
    let t1 = b.vertex(hx, -hy, h);
    let t2 = b.vertex(hx, hy, h);
    let t3 = b.vertex(-hx, hy, h);
    b.quad(t0, t1, t2, t3, FaceKind::Top);
    // Bottom, z = 0.
    let b0 = b.vertex(-hx, -hy, 0.0);
    let b1 = b.vertex(hx, -hy, 0.0);
    let b2 = b.vertex(hx, hy, 0.0);
    let b3 = b.vertex(-hx, hy, 0.0);
    b.quad(b0, b3, b2, b1, FaceKind::Bottom);
    // Sides.
    b.quad(b1, b2, t2, t1, FaceKind::Vertical); // +x
    b.quad(b3, b0, t0, t3, FaceKind::Vertical); // -x
    b.quad(b2, b3, t3, t2, FaceKind::Vertical); // +y
    b.quad(b0, b1, t1, t0, FaceKind::Vertical); // -y
}

fn ramp_into(b: &mut MeshBuilder, l: f64, w: f64, h: f64) {
    let (hx, hy) = (l / 2.0, w / 2.0);
    let a0 = b.vertex(-hx, -hy, 0.0); // low edge
    let a1 = b.vertex(-hx, hy, 0.0);
    let c0 = b.vertex(hx, -hy, 0.0); // below the high edge
    let c1 = b.vertex(hx, hy, 0.0);
    let d0 = b.vertex(hx, -hy, h); // high edge
    let d1 = b.vertex(hx, hy, h);
    // Inclined face is the steppable top.
    b.quad(a0, d0, d1, a1, FaceKind::Top);
    b.quad(a0, a1, c1, c0, FaceKind::Bottom);
    b.quad(c0, c1, d1, d0, FaceKind::Vertical); // back wall, x = +l/2
    b.tri(a0, c0, d0, FaceKind::Vertical); // -y side
    b.tri(a1, d1, c1, FaceKind::Vertical); // +y side
}

fn cylinder_into(b: &mut MeshBuilder, rx: f64, ry: f64, h: f64, n: u32) {
    let tc = b.vertex(0.0, 0.0, h);
    let bc = b.vertex(0.0, 0.0, 0.0);
    let mut top = Vec::with_capacity(n as usize);
    let mut bot = Vec::with_capacity(n as usize);
    for i in 0..n {
        let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let (x, y) = (rx * th.cos(), ry * th.sin());
        top.push(b.vertex(x, y, h));
        bot.push(b.vertex(x, y, 0.0));
    }
    for i in 0..n as usize {
        let j = (i + 1) % n as usize;
        b.tri(tc, top[i], top[j], FaceKind::Top);
        b.tri(bc, bot[j], bot[i], FaceKind::Bottom);
        b.quad(bot[i], bot[j], top[j], top[i], FaceKind::Vertical);
    }
}

fn sphere_into(b: &mut MeshBuilder, r: f64, cz: f64, n: u32) {
    let stacks = (n / 2).max(2);
    let north = b.vertex(0.0, 0.0, cz + r);
    let south = b.vertex(0.0, 0.0, cz - r);
    let mut rings: Vec<Vec<u32>> = Vec::new();
    for j in 1..stacks {
        let phi = std::f64::consts::PI * j as f64 / stacks as f64;
        let mut ring = Vec::with_capacity(n as usize);
        for i in 0..n {
            let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            ring.push(b.vertex(
                r * phi.sin() * th.cos(),
                r * phi.sin() * th.sin(),
                cz + r * phi.cos(),
            ));
        }
        rings.push(ring);
    }
    let nn = n as usize;
    for i in 0..nn {
        let j = (i + 1) % nn;
        b.tri(north, rings[0][i], rings[0][j], FaceKind::Body);
        let last = rings.len() - 1;
        b.tri(south, rings[last][j], rings[last][i], FaceKind::Body);
    }
    for k in 0..rings.len() - 1 {
        for i in 0..nn {
            let j = (i + 1) % nn;
            b.quad(rings[k][i], rings[k + 1][i], rings[k + 1][j], rings[k][j], FaceKind::Body);
        }
    }
}

fn semisphere_into(b: &mut MeshBuilder, r: f64, n: u32) {
    let stacks = (n / 4).max(2);
    let pole = b.vertex(0.0, 0.0, r);
    let center = b.vertex(0.0, 0.0, 0.0);
    let mut rings: Vec<Vec<u32>> = Vec::new();
    for j in 1..=stacks {
        let phi = 0.5 * std::f64::consts::PI * j as f64 / stacks as f64;
        let mut ring = Vec::with_capacity(n as usize);
        for i in 0..n {
            let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            ring.push(b.vertex(
                r * phi.sin() * th.cos(),
                r * phi.sin() * th.sin(),
                r * phi.cos(),
            ));
        }
        rings.push(ring);
    }
    let nn = n as usize;
    for i in 0..nn {
        let j = (i + 1) % nn;
        b.tri(pole, rings[0][i], rings[0][j], FaceKind::Body);
        let rim = rings.len() - 1;
        b.tri(center, rings[rim][j], rings[rim][i], FaceKind::Body);
    }
    for k in 0..rings.len() - 1 {
        for i in 0..nn {
            let j = (i + 1) % nn;
            b.quad(rings[k][i], rings[k + 1][i], rings[k + 1][j], rings[k][j], FaceKind::Body);
        }
    }
}

fn rod_into(b: &mut MeshBuilder, l: f64, r: f64, n: u32) {
    let hx = l / 2.0;
    let cpos = b.vertex(hx, 0.0, r);
    let cneg = b.vertex(-hx, 0.0, r);
    let mut pos = Vec::with_capacity(n as usize);
    let mut neg = Vec::with_capacity(n as usize);
    for i in 0..n {
        let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let (y, z) = (r * th.cos(), r + r * th.sin());
        pos.push(b.vertex(hx, y, z));
        neg.push(b.vertex(-hx, y, z));
    }
    for i in 0..n as usize {
        let j = (i + 1) % n as usize;
        b.tri(cpos, pos[i], pos[j], FaceKind::Body);
        b.tri(cneg, neg[j], neg[i], FaceKind::Body);
        b.quad(neg[i], neg[j], pos[j], pos[i], FaceKind::Body);
    }
}

/// Thickness of the floor slab and of environment walls, meters.
pub(crate) const SLAB_THICKNESS: f64 = 0.02;

/// Tessellate an instance into a world-frame mesh with labels unset.
///
/// `resolution` is the facet count per full revolution for curved classes
/// (minimum 8; ignored for boxes and ramps).
pub fn tessellate(
    instance: &PrimitiveInstance,
    resolution: u32,
) -> Result<LabeledMesh, GeometryError> {
    instance.params.validate(instance.class)?;
    let curved = matches!(
        instance.class,
        ShapeClass::Cylinder
            | ShapeClass::Sphere
            | ShapeClass::Semisphere
            | ShapeClass::Pipe
            | ShapeClass::Pole
            | ShapeClass::Tube
    );
    if curved && resolution < 8 {
        return Err(GeometryError::ResolutionTooLow(resolution));
    }
    let mut b = MeshBuilder::new();
    match (instance.class, instance.params) {
        (ShapeClass::Cuboid, PrimitiveParams::Box { l, w, h }) => box_into(&mut b, l, w, h),
        (ShapeClass::Ramp, PrimitiveParams::Box { l, w, h }) => ramp_into(&mut b, l, w, h),
        (ShapeClass::Cylinder, PrimitiveParams::Elliptic { rx, ry, h }) => {
            cylinder_into(&mut b, rx, ry, h, resolution)
        }
        (ShapeClass::Sphere, PrimitiveParams::Round { r }) => {
            sphere_into(&mut b, r, r, resolution)
        }
        (ShapeClass::Semisphere, PrimitiveParams::Round { r }) => semisphere_into(&mut b, r, resolution),
        (
            ShapeClass::Pipe | ShapeClass::Pole | ShapeClass::Tube,
            PrimitiveParams::Rod { l, r },
        ) => rod_into(&mut b, l, r, resolution),
        (ShapeClass::Floor, PrimitiveParams::Floor {}) => {
            // Thin slab whose top surface sits at local z = 0.
            let mut fb = MeshBuilder::new();
            box_into(&mut fb, super::FLOOR_EXTENT, super::FLOOR_EXTENT, SLAB_THICKNESS);
            for v in &mut fb.vertices {
                v.z -= SLAB_THICKNESS;
            }
            b = fb;
        }
        _ => return Err(GeometryError::ParamClassMismatch(instance.class)),
    }
    Ok(b.finish(&instance.pose, Some(instance.id)))
}

/// Fully labeled axis-aligned box mesh for environment geometry.
pub(crate) fn env_box(
    center: [f64; 3],
    dims: [f64; 3],
    label: SteppabilityLabel,
) -> LabeledMesh {
    let mut b = MeshBuilder::new();
    box_into(&mut b, dims[0], dims[1], dims[2]);
    let pose = Pose6D::at(center[0], center[1], center[2]);
    let mut mesh = b.finish(&pose, None);
    mesh.face_labels = vec![label; mesh.triangles.len()];
    mesh
}

/// True when `p` lies strictly inside the solid shape, shrunk by `eps`.
pub(crate) fn contains_point(instance: &PrimitiveInstance, p: &Point3<f64>, eps: f64) -> bool {
    let rot = instance.pose.rotation();
    let local = rot.inverse() * (p - instance.pose.translation());
    let (x, y, z) = (local.x, local.y, local.z);
    match (instance.class, instance.params) {
        (ShapeClass::Cuboid, PrimitiveParams::Box { l, w, h }) => {
            x.abs() < l / 2.0 - eps && y.abs() < w / 2.0 - eps && z > eps && z < h - eps
        }
        (ShapeClass::Ramp, PrimitiveParams::Box { l, w, h }) => {
            x.abs() < l / 2.0 - eps
                && y.abs() < w / 2.0 - eps
                && z > eps
                && z < (x + l / 2.0) / l * h - eps
        }
        (ShapeClass::Cylinder, PrimitiveParams::Elliptic { rx, ry, h }) => {
            z > eps && z < h - eps && (x / rx).powi(2) + (y / ry).powi(2) < (1.0 - eps).powi(2)
        }
        (ShapeClass::Sphere, PrimitiveParams::Round { r }) => {
            (x * x + y * y + (z - r).powi(2)).sqrt() < r - eps
        }
        (ShapeClass::Semisphere, PrimitiveParams::Round { r }) => {
            z > eps && (x * x + y * y + z * z).sqrt() < r - eps
        }
        (ShapeClass::Pipe | ShapeClass::Pole | ShapeClass::Tube, PrimitiveParams::Rod { l, r }) => {
            x.abs() < l / 2.0 - eps && (y * y + (z - r).powi(2)).sqrt() < r - eps
        }
        (ShapeClass::Floor, PrimitiveParams::Floor {}) => {
            let half = super::FLOOR_EXTENT / 2.0;
            x.abs() < half - eps && y.abs() < half - eps && z < -eps && z > -SLAB_THICKNESS + eps
        }
        _ => false,
    }
}
