//! The mode-transition graph: partial-stance vertices, full-stance edges.

use super::lattice::FootholdLattice;
use super::{FootId, ModeFamily, PlannerError, NOMINAL_COM_HEIGHT};
use crate::geometry::GoalRegion;
use nalgebra::Point3;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Kinematic limits and gait rules for edge generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    /// Longitudinal half-extent of the landing window around the nominal
    /// stance position, meters.
    pub reach_long: f64,
    /// Lateral half-extent, meters.
    pub reach_lat: f64,
    /// Maximum landing height change relative to the mean stance height.
    pub max_rise: f64,
    /// Minimum ground-plane distance between simultaneous footholds.
    pub min_foot_separation: f64,
    /// Expansion budget for searches over this graph.
    pub max_expansions: usize,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            reach_long: 0.30,
            reach_lat: 0.15,
            max_rise: 0.20,
            min_foot_separation: 0.08,
            max_expansions: 200_000,
        }
    }
}

/// All four feet planted, indexed by [`FootId::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FullStance {
    pub points: [u32; 4],
}

impl FullStance {
    pub fn point_of(&self, foot: FootId) -> u32 {
        self.points[foot.index()]
    }

    pub fn com(&self, lattice: &FootholdLattice) -> Point3<f64> {
        let mut c = nalgebra::Vector3::zeros();
        for &p in &self.points {
            c += lattice.point(p).position.coords;
        }
        Point3::from(c / 4.0) + nalgebra::Vector3::new(0.0, 0.0, NOMINAL_COM_HEIGHT)
    }
}

/// A partial stance: three feet in contact, `swing` in the air.
///
/// `stance` holds the lattice point of each contact foot, ordered by
/// [`FootId::ALL`] with the swing foot skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub swing: FootId,
    pub stance: [u32; 3],
}

impl Mode {
    pub fn from_full(full: &FullStance, swing: FootId) -> Mode {
        let mut stance = [0u32; 3];
        let mut k = 0;
        for foot in FootId::ALL {
            if foot != swing {
                stance[k] = full.point_of(foot);
                k += 1;
            }
        }
        Mode { swing, stance }
    }

    /// Contact feet in canonical order.
    pub fn stance_feet(&self) -> [FootId; 3] {
        let mut feet = [FootId::LF; 3];
        let mut k = 0;
        for foot in FootId::ALL {
            if foot != self.swing {
                feet[k] = foot;
                k += 1;
            }
        }
        feet
    }

    pub fn contact_of(&self, foot: FootId) -> Option<u32> {
        self.stance_feet()
            .iter()
            .position(|f| *f == foot)
            .map(|k| self.stance[k])
    }

    /// Nominal CoM: stance centroid raised to the nominal torso height.
    pub fn com(&self, lattice: &FootholdLattice) -> Point3<f64> {
        let mut c = nalgebra::Vector3::zeros();
        for &p in &self.stance {
            c += lattice.point(p).position.coords;
        }
        Point3::from(c / 3.0) + nalgebra::Vector3::new(0.0, 0.0, NOMINAL_COM_HEIGHT)
    }

    /// Which foot stands on which object.
    pub fn family(&self, lattice: &FootholdLattice) -> ModeFamily {
        let feet = self.stance_feet();
        [
            (feet[0], lattice.point(self.stance[0]).object),
            (feet[1], lattice.point(self.stance[1]).object),
            (feet[2], lattice.point(self.stance[2]).object),
        ]
    }
}

/// One landing choice: the full stance it realizes and the successor mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeInfo {
    pub swing: FootId,
    pub landing: u32,
    pub full: FullStance,
    pub dest: Mode,
}

/// Finite transition graph over a foothold lattice, expanded on demand.
///
/// The vertex set is bounded by the lattice combinatorics; callers walk it
/// through [`ModeGraph::successors`], which returns candidates in
/// deterministic ascending-landing order.
#[derive(Debug)]
pub struct ModeGraph<'a> {
    pub lattice: &'a FootholdLattice,
    pub config: GraphConfig,
    pub start: Mode,
    pub goal: GoalRegion,
}

/// Vertex and edge counts from an explicit enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphStats {
    pub vertices: usize,
    pub edges: usize,
    /// True when enumeration stopped at the vertex cap.
    pub truncated: bool,
}

impl<'a> ModeGraph<'a> {
    /// Landing candidates for the airborne foot of `mode`.
    pub fn successors(&self, mode: &Mode) -> Vec<EdgeInfo> {
        let lattice = self.lattice;
        let feet = mode.stance_feet();
        let mut torso = nalgebra::Vector3::zeros();
        for &p in &mode.stance {
            torso += lattice.point(p).position.coords;
        }
        torso /= 3.0;
        let offset = mode.swing.nominal_offset();
        let window = [torso.x + offset[0], torso.y + offset[1]];
        let mut out = Vec::new();
        for cand in lattice.in_window(window, self.config.reach_long, self.config.reach_lat) {
            let p = lattice.point(cand).position;
            if (p.z - torso.z).abs() > self.config.max_rise {
                continue;
            }
            let separated = mode.stance.iter().all(|&s| {
                let q = lattice.point(s).position;
                let dx = p.x - q.x;
                let dy = p.y - q.y;
                (dx * dx + dy * dy).sqrt() >= self.config.min_foot_separation
            });
            if !separated {
                continue;
            }
            let mut full = FullStance { points: [0; 4] };
            full.points[mode.swing.index()] = cand;
            for (k, foot) in feet.iter().enumerate() {
                full.points[foot.index()] = mode.stance[k];
            }
            let dest = Mode::from_full(&full, mode.swing.next_in_cycle());
            out.push(EdgeInfo { swing: mode.swing, landing: cand, full, dest });
        }
        out
    }

    /// Breadth-first closure from the start vertex, stopping at `cap`
    /// vertices.
    pub fn enumerate(&self, cap: usize) -> GraphStats {
        let mut seen: HashSet<Mode> = HashSet::new();
        let mut queue = std::collections::VecDeque::new();
        seen.insert(self.start);
        queue.push_back(self.start);
        let mut edges = 0usize;
        let mut truncated = false;
        while let Some(m) = queue.pop_front() {
            for e in self.successors(&m) {
                edges += 1;
                if !seen.contains(&e.dest) {
                    if seen.len() >= cap {
                        truncated = true;
                        continue;
                    }
                    seen.insert(e.dest);
                    queue.push_back(e.dest);
                }
            }
        }
        GraphStats { vertices: seen.len(), edges, truncated }
    }
}

/// Snap a nominal stance centered at `center` onto distinct lattice points.
pub fn snap_stance(
    lattice: &FootholdLattice,
    center: [f64; 2],
    max_snap: f64,
) -> Result<FullStance, PlannerError> {
    let mut used: HashSet<u32> = HashSet::new();
    let mut points = [0u32; 4];
    for foot in FootId::ALL {
        let off = foot.nominal_offset();
        let target = [center[0] + off[0], center[1] + off[1]];
        let mut cands: Vec<(u32, f64)> = lattice
            .in_window(target, max_snap, max_snap)
            .into_iter()
            .map(|i| {
                let p = lattice.point(i).position;
                let d = ((p.x - target[0]).powi(2) + (p.y - target[1]).powi(2)).sqrt();
                (i, d)
            })
            .collect();
        cands.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let chosen = cands
            .into_iter()
            .find(|(i, d)| *d <= max_snap && !used.contains(i))
            .map(|(i, _)| i)
            .ok_or_else(|| PlannerError::StanceUnreachable {
                side: "start",
                detail: format!("no lattice point within {max_snap} m of {foot:?} at {target:?}"),
            })?;
        used.insert(chosen);
        points[foot.index()] = chosen;
    }
    Ok(FullStance { points })
}

/// Validate a query and assemble the graph over the lattice.
///
/// Errors name the offending side: a start stance whose points fall off the
/// lattice, or a goal region with no lattice point near it.
pub fn build_graph<'a>(
    lattice: &'a FootholdLattice,
    config: GraphConfig,
    start_stance: FullStance,
    first_swing: FootId,
    goal: GoalRegion,
) -> Result<ModeGraph<'a>, PlannerError> {
    for &p in &start_stance.points {
        if p as usize >= lattice.len() {
            return Err(PlannerError::StanceUnreachable {
                side: "start",
                detail: format!("lattice point {p} out of range"),
            });
        }
    }
    let reachable_goal = lattice.points.iter().any(|p| {
        let dx = p.position.x - goal.center[0];
        let dy = p.position.y - goal.center[1];
        (dx * dx + dy * dy).sqrt() <= goal.radius + 0.40
    });
    if !reachable_goal {
        return Err(PlannerError::StanceUnreachable {
            side: "goal",
            detail: format!(
                "no lattice point within {} m of the goal center",
                goal.radius + 0.40
            ),
        });
    }
    Ok(ModeGraph {
        lattice,
        config,
        start: Mode::from_full(&start_stance, first_swing),
        goal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        assemble_scene, LabelPolicyConfig, ManualEntry, PlacementMode, Pose6D, PrimitiveParams,
        SceneConfig, ShapeClass,
    };
    use crate::planner::{build_lattice, LatticeOptions};

    fn two_stone_scene() -> crate::geometry::Scene {
        let stone = |x: f64| ManualEntry {
            class: ShapeClass::Cuboid,
            params: PrimitiveParams::Box { l: 0.5, w: 0.5, h: 0.05 },
            pose: Pose6D::at(x, 0.0, 0.0),
            known_to_planner: true,
        };
        let mut scene = assemble_scene(
            &SceneConfig {
                mode: PlacementMode::Manual(vec![stone(0.0), stone(0.62)]),
                ..SceneConfig::default()
            },
            &LabelPolicyConfig::default(),
        )
        .unwrap();
        scene.primitives[0].known_to_planner = false;
        scene
    }

    #[test]
    fn crossing_a_gap_is_reachable() {
        let scene = two_stone_scene();
        let lattice = build_lattice(&scene, 0.05, &LatticeOptions::default()).unwrap();
        let start = snap_stance(&lattice, [0.0, 0.0], 0.2).unwrap();
        let goal = GoalRegion::new([0.62, 0.0, 0.35], 0.3);
        let graph = build_graph(&lattice, GraphConfig::default(), start, FootId::LF, goal).unwrap();
        // Breadth-first oracle: some reachable mode has every contact on the
        // far stone.
        let far = scene.primitives[2].id;
        let mut seen = std::collections::HashSet::new();
        let mut queue = std::collections::VecDeque::new();
        seen.insert(graph.start);
        queue.push_back(graph.start);
        let mut crossed = false;
        'outer: while let Some(m) = queue.pop_front() {
            for e in graph.successors(&m) {
                if seen.insert(e.dest) {
                    if e.dest.stance.iter().all(|&p| lattice.point(p).object == far) {
                        crossed = true;
                        break 'outer;
                    }
                    queue.push_back(e.dest);
                }
            }
        }
        assert!(crossed, "no mode fully on the far stone");
    }

    #[test]
    fn zero_reach_means_zero_edges() {
        let scene = two_stone_scene();
        let lattice = build_lattice(&scene, 0.05, &LatticeOptions::default()).unwrap();
        let start = snap_stance(&lattice, [0.0, 0.0], 0.2).unwrap();
        let goal = GoalRegion::new([0.62, 0.0, 0.35], 0.3);
        let config = GraphConfig { reach_long: 0.0, reach_lat: 0.0, ..GraphConfig::default() };
        let graph = build_graph(&lattice, config, start, FootId::LF, goal).unwrap();
        let stats = graph.enumerate(10_000);
        assert_eq!(stats.edges, 0);
        assert_eq!(stats.vertices, 1);
    }

    #[test]
    fn every_edge_swaps_exactly_one_foot() {
        let scene = two_stone_scene();
        let lattice = build_lattice(&scene, 0.1, &LatticeOptions::default()).unwrap();
        let start = snap_stance(&lattice, [0.0, 0.0], 0.2).unwrap();
        let goal = GoalRegion::new([0.62, 0.0, 0.35], 0.3);
        let graph = build_graph(&lattice, GraphConfig::default(), start, FootId::LF, goal).unwrap();
        let mut seen = std::collections::HashSet::new();
        let mut queue = std::collections::VecDeque::new();
        seen.insert(graph.start);
        queue.push_back(graph.start);
        let mut edges = 0;
        while let Some(m) = queue.pop_front() {
            for e in graph.successors(&m) {
                edges += 1;
                // The landing foot is the source's swing foot; the two feet
                // shared by source and dest stances keep their points.
                assert_eq!(e.dest.contact_of(e.swing), Some(e.landing));
                assert_shared_contacts(&m, &e.dest);
                // The landing point respects separation from all stance feet.
                for &s in &m.stance {
                    let p = lattice.point(e.landing).position;
                    let q = lattice.point(s).position;
                    let d = ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt();
                    assert!(d >= 0.08 - 1e-12);
                }
                if seen.insert(e.dest) {
                    queue.push_back(e.dest);
                }
                if edges > 50_000 {
                    return; // bounded exhaustive check
                }
            }
        }
    }

    fn assert_shared_contacts(src: &Mode, dest: &Mode) {
        for foot in FootId::ALL {
            if foot == src.swing || foot == dest.swing {
                continue;
            }
            assert_eq!(src.contact_of(foot), dest.contact_of(foot));
        }
    }

    #[test]
    fn snap_assigns_distinct_points() {
        let scene = two_stone_scene();
        let lattice = build_lattice(&scene, 0.1, &LatticeOptions::default()).unwrap();
        let stance = snap_stance(&lattice, [0.0, 0.0], 0.25).unwrap();
        let mut pts = stance.points.to_vec();
        pts.sort_unstable();
        pts.dedup();
        assert_eq!(pts.len(), 4);
        assert!(snap_stance(&lattice, [3.0, 3.0], 0.2).is_err());
    }

    #[test]
    fn goal_off_lattice_rejected() {
        let scene = two_stone_scene();
        let lattice = build_lattice(&scene, 0.1, &LatticeOptions::default()).unwrap();
        let start = snap_stance(&lattice, [0.0, 0.0], 0.25).unwrap();
        let err = build_graph(
            &lattice,
            GraphConfig::default(),
            start,
            FootId::LF,
            GoalRegion::new([3.0, 3.0, 0.3], 0.2),
        )
        .unwrap_err();
        match err {
            PlannerError::StanceUnreachable { side, .. } => assert_eq!(side, "goal"),
            other => panic!("unexpected {other}"),
        }
    }
}
