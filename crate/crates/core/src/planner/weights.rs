//! Edge weight terms: experience, CoM travel, path deviation, steppability.

use super::experience::ExperienceStore;
use super::graph::{EdgeInfo, Mode};
use super::lattice::FootholdLattice;
use super::FootId;
use crate::camera::{project, CameraPose, Intrinsics};
use crate::render::{mask_query, LabelMask, MaskQuery};
use nalgebra::Point3;
use serde::{Deserialize, Serialize};

/// Positive scalar weights for the four edge-cost terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambda {
    pub d: f64,
    pub com: f64,
    pub tau: f64,
    pub step: f64,
}

impl Default for Lambda {
    fn default() -> Self {
        Lambda { d: 1.0, com: 1.0, tau: 1.0, step: 1.0 }
    }
}

/// Per-edge weight breakdown. The total is the lambda-weighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeWeightTerms {
    #[serde(rename = "D")]
    pub experience: f64,
    pub d_com: f64,
    pub d_tau: f64,
    pub d_step: f64,
}

impl EdgeWeightTerms {
    pub fn total(&self, lambda: &Lambda) -> f64 {
        lambda.d * self.experience
            + lambda.com * self.d_com
            + lambda.tau * self.d_tau
            + lambda.step * self.d_step
    }
}

/// The current steppability mask with the camera that captured it.
#[derive(Clone, Copy)]
pub struct MaskContext<'a> {
    pub mask: &'a LabelMask,
    pub intrinsics: &'a Intrinsics,
    pub pose: &'a CameraPose,
    /// Foot radius for the inflation offsets, meters; 0 checks centers only.
    pub foot_radius: f64,
}

/// Everything edge evaluation needs.
pub struct WeightContext<'a> {
    pub mask: Option<MaskContext<'a>>,
    pub experience: &'a ExperienceStore,
    pub torso_path: &'a TorsoPath,
    pub lambda: Lambda,
}

/// Polyline guiding the torso; `d_tau` measures deviation from it.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsoPath {
    pub waypoints: Vec<Point3<f64>>,
}

impl TorsoPath {
    pub fn line(a: Point3<f64>, b: Point3<f64>) -> TorsoPath {
        TorsoPath { waypoints: vec![a, b] }
    }

    /// Distance from `p` to the nearest point on the polyline.
    pub fn distance_to(&self, p: &Point3<f64>) -> f64 {
        assert!(self.waypoints.len() >= 2, "torso path needs at least two waypoints");
        let mut best = f64::INFINITY;
        for seg in self.waypoints.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let ab = b - a;
            let denom = ab.norm_squared();
            let t = if denom < 1e-18 { 0.0 } else { ((p - a).dot(&ab) / denom).clamp(0.0, 1.0) };
            best = best.min((p - (a + ab * t)).norm());
        }
        best
    }
}

/// Score one queried point by its mask label.
pub fn point_weight(q: MaskQuery) -> f64 {
    match q {
        MaskQuery::NonPassable => 1000.0,
        MaskQuery::Passable => 100.0,
        // Unseen regions score like out-of-frame points: mildly discouraged.
        MaskQuery::OutOfFrame | MaskQuery::Background => 5.0,
        MaskQuery::Steppable => 1.0,
    }
}

/// Mask evaluation of one foothold: the center plus, for a finite foot
/// radius, four axis offsets, each projected and scored.
pub fn foothold_weight(center: &Point3<f64>, ctx: &MaskContext) -> f64 {
    let mut points = vec![*center];
    if ctx.foot_radius > 0.0 {
        let r = ctx.foot_radius;
        points.push(center + nalgebra::Vector3::new(r, 0.0, 0.0));
        points.push(center + nalgebra::Vector3::new(-r, 0.0, 0.0));
        points.push(center + nalgebra::Vector3::new(0.0, r, 0.0));
        points.push(center + nalgebra::Vector3::new(0.0, -r, 0.0));
    }
    points
        .iter()
        .map(|p| {
            let px = project(p, ctx.intrinsics, ctx.pose);
            point_weight(mask_query(ctx.mask, &px))
        })
        .sum()
}

/// Steppability term of a transition: the sum of [`foothold_weight`] over
/// all four stance footholds of the full stance.
pub fn steppability_weight(footholds: &[Point3<f64>; 4], ctx: &MaskContext) -> f64 {
    footholds.iter().map(|p| foothold_weight(p, ctx)).sum()
}

/// Positions of the transition's full stance, ordered LF, RF, LH, RH.
pub fn edge_footholds(lattice: &FootholdLattice, edge: &EdgeInfo) -> [Point3<f64>; 4] {
    let mut out = [Point3::origin(); 4];
    for foot in FootId::ALL {
        out[foot.index()] = lattice.point(edge.full.point_of(foot)).position;
    }
    out
}

/// Evaluate all four weight terms for one edge.
pub fn edge_weight(
    lattice: &FootholdLattice,
    source: &Mode,
    edge: &EdgeInfo,
    ctx: &WeightContext,
) -> EdgeWeightTerms {
    let dest = &edge.dest;
    let src_com = source.com(lattice);
    let dst_com = dest.com(lattice);
    let d_step = match &ctx.mask {
        Some(m) => steppability_weight(&edge_footholds(lattice, edge), m),
        None => 0.0,
    };
    EdgeWeightTerms {
        experience: ctx.experience.lookup(lattice, source, dest),
        d_com: (dst_com - src_com).norm(),
        d_tau: ctx.torso_path.distance_to(&dst_com),
        d_step,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::default_rig;
    use crate::render::MaskValue;

    fn uniform_mask(value: MaskValue, w: u32, h: u32) -> LabelMask {
        LabelMask { width: w, height: h, data: vec![value; (w * h) as usize] }
    }

    #[test]
    fn all_steppable_centers_score_four() {
        let (k, pose) = default_rig();
        let mask = uniform_mask(MaskValue::Steppable, k.width, k.height);
        let ctx = MaskContext { mask: &mask, intrinsics: &k, pose: &pose, foot_radius: 0.0 };
        // Four footholds on the ground ahead of the camera.
        let feet = [
            Point3::new(0.8, 0.1, 0.0),
            Point3::new(0.8, -0.1, 0.0),
            Point3::new(0.6, 0.1, 0.0),
            Point3::new(0.6, -0.1, 0.0),
        ];
        assert_eq!(steppability_weight(&feet, &ctx), 4.0);
    }

    #[test]
    fn one_non_passable_center_scores_1003() {
        let (k, pose) = default_rig();
        let mut mask = uniform_mask(MaskValue::Steppable, k.width, k.height);
        let feet = [
            Point3::new(0.8, 0.1, 0.0),
            Point3::new(0.8, -0.1, 0.0),
            Point3::new(0.6, 0.1, 0.0),
            Point3::new(0.6, -0.1, 0.0),
        ];
        // Paint the pixel under the first foothold non-passable.
        match project(&feet[0], &k, &pose) {
            crate::camera::PixelResult::InFrame { u, v } => {
                let idx = (v.floor() as u32 * mask.width + u.floor() as u32) as usize;
                mask.data[idx] = MaskValue::NonPassable;
            }
            other => panic!("expected in-frame, got {other:?}"),
        }
        let ctx = MaskContext { mask: &mask, intrinsics: &k, pose: &pose, foot_radius: 0.0 };
        assert_eq!(steppability_weight(&feet, &ctx), 1003.0);
    }

    #[test]
    fn behind_camera_foothold_scores_five() {
        let (k, pose) = default_rig();
        let mask = uniform_mask(MaskValue::Steppable, k.width, k.height);
        let ctx = MaskContext { mask: &mask, intrinsics: &k, pose: &pose, foot_radius: 0.0 };
        let feet = [
            Point3::new(-1.0, 0.0, 0.0), // behind the camera
            Point3::new(0.8, -0.1, 0.0),
            Point3::new(0.6, 0.1, 0.0),
            Point3::new(0.6, -0.1, 0.0),
        ];
        assert_eq!(steppability_weight(&feet, &ctx), 8.0);
    }

    #[test]
    fn inflation_adds_four_offsets() {
        let (k, pose) = default_rig();
        let mask = uniform_mask(MaskValue::Steppable, k.width, k.height);
        let ctx = MaskContext { mask: &mask, intrinsics: &k, pose: &pose, foot_radius: 0.02 };
        let p = Point3::new(0.8, 0.0, 0.0);
        assert_eq!(foothold_weight(&p, &ctx), 5.0);
    }

    #[test]
    fn worsening_a_label_never_decreases_d_step() {
        let (k, pose) = default_rig();
        let feet = [
            Point3::new(0.8, 0.1, 0.0),
            Point3::new(0.8, -0.1, 0.0),
            Point3::new(0.6, 0.1, 0.0),
            Point3::new(0.6, -0.1, 0.0),
        ];
        let ladder = [MaskValue::Steppable, MaskValue::Passable, MaskValue::NonPassable];
        for foot in 0..4 {
            let mut prev = None;
            for value in ladder {
                let mut mask = uniform_mask(MaskValue::Steppable, k.width, k.height);
                if let crate::camera::PixelResult::InFrame { u, v } = project(&feet[foot], &k, &pose)
                {
                    let idx = (v.floor() as u32 * mask.width + u.floor() as u32) as usize;
                    mask.data[idx] = value;
                }
                let ctx =
                    MaskContext { mask: &mask, intrinsics: &k, pose: &pose, foot_radius: 0.0 };
                let w = steppability_weight(&feet, &ctx);
                if let Some(p) = prev {
                    assert!(w >= p, "foot {foot}: {w} < {p}");
                }
                prev = Some(w);
            }
        }
    }

    #[test]
    fn torso_path_distance() {
        let path = TorsoPath::line(Point3::new(0.0, 0.0, 0.3), Point3::new(2.0, 0.0, 0.3));
        assert!((path.distance_to(&Point3::new(1.0, 0.0, 0.3)) - 0.0).abs() < 1e-12);
        assert!((path.distance_to(&Point3::new(1.0, 0.5, 0.3)) - 0.5).abs() < 1e-12);
        assert!((path.distance_to(&Point3::new(-1.0, 0.0, 0.3)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_scales_terms() {
        let terms = EdgeWeightTerms { experience: 2.0, d_com: 3.0, d_tau: 0.5, d_step: 4.0 };
        assert!((terms.total(&Lambda::default()) - 9.5).abs() < 1e-12);
        let no_step = Lambda { step: 0.0, ..Lambda::default() };
        assert!((terms.total(&no_step) - 5.5).abs() < 1e-12);
        let tripled = Lambda { d: 3.0, com: 3.0, tau: 3.0, step: 3.0 };
        assert!((terms.total(&tripled) - 28.5).abs() < 1e-12);
    }
}
