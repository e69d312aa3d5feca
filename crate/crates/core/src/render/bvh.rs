//! Axis-aligned bounding-volume hierarchy over scene triangles.
//!
//! Rebuilt per scene version. Median split on the widest axis of centroid
//! bounds, leaves of up to four triangles. Construction and traversal are
//! deterministic: ties sort by triangle index.

use crate::geometry::{LabeledMesh, SteppabilityLabel};
use nalgebra::{Point3, Vector3};

#[derive(Debug, Clone, Copy)]
pub struct Triangle {
    pub a: Point3<f64>,
    pub b: Point3<f64>,
    pub c: Point3<f64>,
    pub label: SteppabilityLabel,
    pub mesh: u32,
    pub face: u32,
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Point3<f64>,
    hi: Point3<f64>,
}

impl Aabb {
    fn empty() -> Aabb {
        Aabb {
            lo: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            hi: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Point3<f64>) {
        for k in 0..3 {
            self.lo[k] = self.lo[k].min(p[k]);
            self.hi[k] = self.hi[k].max(p[k]);
        }
    }

    fn union(mut self, other: &Aabb) -> Aabb {
        self.grow(&other.lo);
        self.grow(&other.hi);
        self
    }

    fn of_triangle(t: &Triangle) -> Aabb {
        let mut b = Aabb::empty();
        b.grow(&t.a);
        b.grow(&t.b);
        b.grow(&t.c);
        b
    }

    /// Slab test; returns entry distance if the ray intersects within
    /// `(t_min, t_max)`.
    fn hit(&self, origin: &Point3<f64>, inv_dir: &Vector3<f64>, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for k in 0..3 {
            let (mut near, mut far) = (
                (self.lo[k] - origin[k]) * inv_dir[k],
                (self.hi[k] - origin[k]) * inv_dir[k],
            );
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

enum Node {
    Leaf { start: u32, count: u32 },
    Inner { left: u32, right: u32, left_box: Aabb, right_box: Aabb },
}

pub struct Bvh {
    triangles: Vec<Triangle>,
    nodes: Vec<Node>,
    root_box: Aabb,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    /// Ray parameter of the nearest intersection (camera-frame depth when the
    /// ray direction is depth-scaled).
    pub t: f64,
    pub label: SteppabilityLabel,
    pub mesh: u32,
    pub face: u32,
}

const LEAF_SIZE: usize = 4;

impl Bvh {
    /// Gather all labeled triangles of the scene meshes and build the tree.
    pub fn from_meshes<'a>(meshes: impl Iterator<Item = &'a LabeledMesh>) -> Bvh {
        let mut triangles = Vec::new();
        for (mi, mesh) in meshes.enumerate() {
            for f in 0..mesh.triangles.len() {
                let [a, b, c] = mesh.triangle_vertices(f);
                triangles.push(Triangle {
                    a,
                    b,
                    c,
                    label: mesh.face_labels[f],
                    mesh: mi as u32,
                    face: f as u32,
                });
            }
        }
        Bvh::build(triangles)
    }

    pub fn build(mut triangles: Vec<Triangle>) -> Bvh {
        let mut nodes = Vec::new();
        let mut root_box = Aabb::empty();
        for t in &triangles {
            root_box = root_box.union(&Aabb::of_triangle(t));
        }
        if triangles.is_empty() {
            nodes.push(Node::Leaf { start: 0, count: 0 });
            return Bvh { triangles, nodes, root_box };
        }
        let n = triangles.len();
        build_node(&mut triangles, 0, n, &mut nodes);
        Bvh { triangles, nodes, root_box }
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Nearest intersection with `t` in `(t_min, t_max)`.
    pub fn intersect(
        &self,
        origin: &Point3<f64>,
        dir: &Vector3<f64>,
        t_min: f64,
        t_max: f64,
    ) -> Option<Hit> {
        if self.triangles.is_empty() {
            return None;
        }
        let inv_dir = Vector3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<Hit> = None;
        let mut limit = t_max;
        let mut stack = vec![0u32];
        while let Some(idx) = stack.pop() {
            if idx == 0 && self.root_box.hit(origin, &inv_dir, limit).is_none() {
                continue;
            }
            match &self.nodes[idx as usize] {
                Node::Leaf { start, count } => {
                    for t in &self.triangles[*start as usize..(*start + *count) as usize] {
                        if let Some(hit_t) = ray_triangle(origin, dir, t) {
                            if hit_t > t_min && hit_t < limit {
                                limit = hit_t;
                                best = Some(Hit {
                                    t: hit_t,
                                    label: t.label,
                                    mesh: t.mesh,
                                    face: t.face,
                                });
                            }
                        }
                    }
                }
                Node::Inner { left, right, left_box, right_box } => {
                    let lh = left_box.hit(origin, &inv_dir, limit);
                    let rh = right_box.hit(origin, &inv_dir, limit);
                    // Visit the nearer child first.
                    match (lh, rh) {
                        (Some(lt), Some(rt)) => {
                            if lt <= rt {
                                stack.push(*right);
                                stack.push(*left);
                            } else {
                                stack.push(*left);
                                stack.push(*right);
                            }
                        }
                        (Some(_), None) => stack.push(*left),
                        (None, Some(_)) => stack.push(*right),
                        (None, None) => {}
                    }
                }
            }
        }
        best
    }
}

fn build_node(tris: &mut [Triangle], start: usize, end: usize, nodes: &mut Vec<Node>) -> u32 {
    let idx = nodes.len() as u32;
    let count = end - start;
    if count <= LEAF_SIZE {
        nodes.push(Node::Leaf { start: start as u32, count: count as u32 });
        return idx;
    }
    // Widest axis of the centroid bounds.
    let mut cb = Aabb::empty();
    for t in &tris[start..end] {
        cb.grow(&centroid(t));
    }
    let extents = cb.hi - cb.lo;
    let axis = if extents.x >= extents.y && extents.x >= extents.z {
        0
    } else if extents.y >= extents.z {
        1
    } else {
        2
    };
    let mid = start + count / 2;
    tris[start..end].sort_by(|p, q| {
        centroid(p)[axis]
            .total_cmp(&centroid(q)[axis])
            .then_with(|| (p.mesh, p.face).cmp(&(q.mesh, q.face)))
    });
    nodes.push(Node::Leaf { start: 0, count: 0 }); // placeholder
    let left = build_node(tris, start, mid, nodes);
    let right = build_node(tris, mid, end, nodes);
    let boxed = |s: usize, e: usize| {
        let mut b = Aabb::empty();
        for t in &tris[s..e] {
            b = b.union(&Aabb::of_triangle(t));
        }
        b
    };
    nodes[idx as usize] = Node::Inner {
        left,
        right,
        left_box: boxed(start, mid),
        right_box: boxed(mid, end),
    };
    idx
}

fn centroid(t: &Triangle) -> Point3<f64> {
    Point3::from((t.a.coords + t.b.coords + t.c.coords) / 3.0)
}

/// Moeller-Trumbore intersection; returns the ray parameter.
pub fn ray_triangle(origin: &Point3<f64>, dir: &Vector3<f64>, tri: &Triangle) -> Option<f64> {
    const EPS: f64 = 1e-12;
    let e1 = tri.b - tri.a;
    let e2 = tri.c - tri.a;
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < EPS {
        return None;
    }
    let inv_det = 1.0 / det;
    let s = origin - tri.a;
    let u = s.dot(&p) * inv_det;
    if !(-EPS..=1.0 + EPS).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv_det;
    if v < -EPS || u + v > 1.0 + EPS {
        return None;
    }
    let t = e2.dot(&q) * inv_det;
    (t > 0.0).then_some(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tri(a: [f64; 3], b: [f64; 3], c: [f64; 3], id: u32) -> Triangle {
        Triangle {
            a: Point3::from(a),
            b: Point3::from(b),
            c: Point3::from(c),
            label: SteppabilityLabel::Steppable,
            mesh: 0,
            face: id,
        }
    }

    #[test]
    fn bvh_matches_linear_scan_on_random_soup() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut tris = Vec::new();
        for i in 0..200 {
            let base = [
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-1.0..1.0),
            ];
            let jitter = |rng: &mut ChaCha8Rng, b: [f64; 3]| {
                [
                    b[0] + rng.random_range(-0.3..0.3),
                    b[1] + rng.random_range(-0.3..0.3),
                    b[2] + rng.random_range(-0.3..0.3),
                ]
            };
            let b = jitter(&mut rng, base);
            let c = jitter(&mut rng, base);
            tris.push(tri(base, b, c, i));
        }
        let bvh = Bvh::build(tris.clone());
        for _ in 0..500 {
            let origin = Point3::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-2.0..2.0),
            );
            let dir = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if dir.norm() < 1e-6 {
                continue;
            }
            let brute = tris
                .iter()
                .filter_map(|t| ray_triangle(&origin, &dir, t).map(|d| (d, t.face)))
                .filter(|(d, _)| *d > 1e-9 && *d < 100.0)
                .min_by(|x, y| x.0.total_cmp(&y.0));
            let fast = bvh.intersect(&origin, &dir, 1e-9, 100.0);
            match (brute, fast) {
                (None, None) => {}
                (Some((bd, _)), Some(h)) => assert!((bd - h.t).abs() < 1e-9),
                (b, f) => panic!("brute {b:?} vs bvh {f:?}"),
            }
        }
    }

    #[test]
    fn empty_bvh_misses() {
        let bvh = Bvh::build(Vec::new());
        assert!(bvh
            .intersect(&Point3::origin(), &Vector3::new(1.0, 0.0, 0.0), 0.0, 10.0)
            .is_none());
    }
}
