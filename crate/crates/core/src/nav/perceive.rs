//! Accumulated ground coverage of past depth frames.

use crate::geometry::{PrimitiveId, Scene};
use crate::render::Frame;
use std::collections::HashSet;

/// Union of valid-depth pixel footprints projected to the ground plane,
/// kept as occupied cells of a coarse 2D grid.
#[derive(Debug, Clone, Default)]
pub struct PerceivedRegion {
    cells: HashSet<(i32, i32)>,
}

/// Grid pitch of the perceived-region raster, meters.
const CELL: f64 = 0.10;

impl PerceivedRegion {
    pub fn new() -> PerceivedRegion {
        PerceivedRegion::default()
    }

    fn key(x: f64, y: f64) -> (i32, i32) {
        ((x / CELL).floor() as i32, (y / CELL).floor() as i32)
    }

    /// Mark every pixel with a finite depth: the hit point's ground cell.
    pub fn observe(&mut self, frame: &Frame) {
        let k = &frame.intrinsics;
        for v in 0..k.height {
            for u in 0..k.width {
                let d = frame.depth.at(u, v);
                if !d.is_finite() {
                    continue;
                }
                let (origin, dir) = frame.pose.pixel_ray(u as f64 + 0.5, v as f64 + 0.5, k);
                let p = origin + dir * d as f64;
                self.cells.insert(Self::key(p.x, p.y));
            }
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.cells.contains(&Self::key(x, y))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Known objects whose footprint touches the perceived region.
    pub fn object_filter(&self, scene: &Scene) -> HashSet<PrimitiveId> {
        let mut out = HashSet::new();
        for (p, mesh) in scene.primitives.iter().zip(&scene.meshes) {
            if !p.known_to_planner {
                continue;
            }
            let ([lx, ly], [hx, hy]) = mesh.footprint();
            let (c0, c1) = (Self::key(lx, ly), Self::key(hx, hy));
            'cells: for cx in c0.0..=c1.0 {
                for cy in c0.1..=c1.1 {
                    if self.cells.contains(&(cx, cy)) {
                        out.insert(p.id);
                        break 'cells;
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::{default_rig, CameraPose};
    use crate::geometry::{assemble_scene, LabelPolicyConfig, Pose6D, SceneConfig};
    use crate::render::{raycast_frame, RenderConfig};

    #[test]
    fn forward_view_covers_ground_ahead_only() {
        let scene =
            assemble_scene(&SceneConfig::default(), &LabelPolicyConfig::default()).unwrap();
        let (k, pose) = default_rig();
        let frame = raycast_frame(&scene, &k, &pose, &RenderConfig::near_field()).unwrap();
        let mut region = PerceivedRegion::new();
        region.observe(&frame);
        assert!(!region.is_empty());
        assert!(region.contains(1.0, 0.0));
        // Behind the camera stays unknown.
        assert!(!region.contains(-1.0, 0.0));
        let filter = region.object_filter(&scene);
        assert!(filter.contains(&scene.primitives[0].id));
    }

    #[test]
    fn region_grows_monotonically() {
        let scene =
            assemble_scene(&SceneConfig::default(), &LabelPolicyConfig::default()).unwrap();
        let (k, _) = default_rig();
        let mut region = PerceivedRegion::new();
        let mut last = 0;
        for step in 0..3 {
            let pose = CameraPose::from_world_pose(
                &Pose6D::new(-1.0 + 0.5 * step as f64, 0.0, 0.325, 0.0, 30f64.to_radians(), 0.0),
                step as f64,
            );
            let frame = raycast_frame(&scene, &k, &pose, &RenderConfig::near_field()).unwrap();
            region.observe(&frame);
            assert!(region.len() >= last);
            last = region.len();
        }
    }
}
