//! Reduced transition trajectory optimization.
//!
//! A point-mass centroidal model carries the CoM under stance contact
//! forces and gravity while the swing foot travels from takeoff to landing.
//! The transition is transcribed over N knots with trapezoidal defects,
//! friction pyramids on stance forces, pinned stance feet, a terminal
//! landing constraint, and clearance from nearby obstacles. The resulting
//! nonlinear program is solved by an iterative quadratic-penalty method
//! with analytic gradients.

mod lbfgs;
mod solver;

pub use solver::{objective_and_gradient, quadratic_objective, solve};

use crate::geometry::{
    PrimitiveId, PrimitiveInstance, PrimitiveParams, Scene, ShapeClass, SteppabilityLabel,
};
use crate::planner::{FootId, NOMINAL_COM_HEIGHT};
use nalgebra::{Point3, Vector3};
use serde::Serialize;
use thiserror::Error;

/// Reduced robot state at one knot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedState {
    pub com: [f64; 3],
    pub com_vel: [f64; 3],
    /// Foot positions ordered LF, RF, LH, RH.
    pub feet: [[f64; 3]; 4],
}

/// Input at one knot: contact forces for stance feet, velocity for the
/// swing foot. Stance feet carry zero velocity and the swing foot zero
/// force by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlInput {
    pub forces: [[f64; 3]; 4],
    pub foot_vel: [[f64; 3]; 4],
}

/// Diagonal objective weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Weights {
    pub q_com: f64,
    pub q_vel: f64,
    pub q_swing: f64,
    pub qf_com: f64,
    pub qf_vel: f64,
    pub qf_swing: f64,
    pub r_force: f64,
    pub r_swing_vel: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            q_com: 10.0,
            q_vel: 1.0,
            q_swing: 5.0,
            qf_com: 2000.0,
            qf_vel: 1000.0,
            qf_swing: 10.0,
            r_force: 1e-7,
            r_swing_vel: 1e-2,
        }
    }
}

/// Residual tolerances for declaring convergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub dynamics: f64,
    pub mode: f64,
    pub friction: f64,
    pub collision: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { dynamics: 1e-3, mode: 1e-3, friction: 1e-6, collision: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionConfig {
    /// Number of intervals; states live on knots 0..=n.
    pub n_knots: usize,
    pub dt: f64,
    pub mass: f64,
    pub gravity: f64,
    pub mu: f64,
    pub friction_facets: usize,
    /// Obstacles activate when their centroid is within this distance of
    /// the straight CoM path.
    pub activation_radius: f64,
    pub clearance: f64,
    /// Peak height of the nominal swing arc.
    pub swing_lift: f64,
    pub weights: Weights,
    pub tolerances: Tolerances,
    /// Total inner-iteration budget across all penalty rounds.
    pub max_iterations: usize,
    pub penalty_rounds: usize,
    pub initial_penalty: f64,
}

impl Default for TransitionConfig {
    fn default() -> Self {
        TransitionConfig {
            n_knots: 20,
            dt: 0.05,
            mass: 12.0,
            gravity: 9.81,
            mu: 0.7,
            friction_facets: 4,
            activation_radius: 0.5,
            clearance: 0.01,
            swing_lift: 0.06,
            weights: Weights::default(),
            tolerances: Tolerances::default(),
            max_iterations: 500,
            penalty_rounds: 5,
            initial_penalty: 100.0,
        }
    }
}

/// An obstacle activated for collision checking: solid primitive geometry
/// queried through a signed-distance function.
#[derive(Debug, Clone)]
pub struct Obstacle {
    pub id: PrimitiveId,
    instance: PrimitiveInstance,
}

impl Obstacle {
    /// Signed distance from `p` to the obstacle surface (negative inside).
    /// Spheres are exact; other classes use their oriented bounding box.
    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        self.sdf(p).0
    }

    /// Signed distance and its gradient.
    pub fn sdf(&self, p: &Point3<f64>) -> (f64, Vector3<f64>) {
        let inst = &self.instance;
        let rot = inst.pose.rotation();
        let local = rot.inverse() * (p - inst.pose.translation());
        match (inst.class, inst.params) {
            (ShapeClass::Sphere, PrimitiveParams::Round { r }) => {
                let c = Vector3::new(0.0, 0.0, r);
                let d = local.coords - c;
                let n = d.norm();
                if n < 1e-12 {
                    (-r, Vector3::new(0.0, 0.0, 1.0))
                } else {
                    (n - r, rot * (d / n))
                }
            }
            _ => {
                let (center, half) = bounding_box(inst);
                let q = local - center;
                let a = Vector3::new(q.x.abs() - half.x, q.y.abs() - half.y, q.z.abs() - half.z);
                let outside = Vector3::new(a.x.max(0.0), a.y.max(0.0), a.z.max(0.0));
                let out_n = outside.norm();
                let inner = a.x.max(a.y).max(a.z).min(0.0);
                let sd = out_n + inner;
                let local_grad = if out_n > 1e-12 {
                    Vector3::new(
                        outside.x * q.x.signum(),
                        outside.y * q.y.signum(),
                        outside.z * q.z.signum(),
                    ) / out_n
                } else {
                    // Inside: push along the axis of least penetration.
                    if a.x >= a.y && a.x >= a.z {
                        Vector3::new(q.x.signum(), 0.0, 0.0)
                    } else if a.y >= a.z {
                        Vector3::new(0.0, q.y.signum(), 0.0)
                    } else {
                        Vector3::new(0.0, 0.0, q.z.signum())
                    }
                };
                (sd, rot * local_grad)
            }
        }
    }

    fn centroid(&self) -> Point3<f64> {
        let inst = &self.instance;
        let rot = inst.pose.rotation();
        let (center, _) = bounding_box(inst);
        Point3::from(rot * center + inst.pose.translation())
    }
}

/// Local-frame center and half extents of the primitive's bounding box.
fn bounding_box(inst: &PrimitiveInstance) -> (Vector3<f64>, Vector3<f64>) {
    match (inst.class, inst.params) {
        (_, PrimitiveParams::Box { l, w, h }) => {
            (Vector3::new(0.0, 0.0, h / 2.0), Vector3::new(l / 2.0, w / 2.0, h / 2.0))
        }
        (_, PrimitiveParams::Elliptic { rx, ry, h }) => {
            (Vector3::new(0.0, 0.0, h / 2.0), Vector3::new(rx, ry, h / 2.0))
        }
        (_, PrimitiveParams::Rod { l, r }) => {
            (Vector3::new(0.0, 0.0, r), Vector3::new(l / 2.0, r, r))
        }
        (ShapeClass::Semisphere, PrimitiveParams::Round { r }) => {
            (Vector3::new(0.0, 0.0, r / 2.0), Vector3::new(r, r, r / 2.0))
        }
        (_, PrimitiveParams::Round { r }) => {
            (Vector3::new(0.0, 0.0, r), Vector3::new(r, r, r))
        }
        (_, PrimitiveParams::Floor {}) => (Vector3::zeros(), Vector3::new(2.0, 2.0, 0.01)),
    }
}

/// A fully specified transition optimization instance.
#[derive(Debug, Clone)]
pub struct TransitionProblem {
    pub config: TransitionConfig,
    /// The three pinned stance feet.
    pub stance: Vec<(FootId, Point3<f64>)>,
    pub swing_foot: FootId,
    pub takeoff: Point3<f64>,
    pub landing: Point3<f64>,
    pub com0: Point3<f64>,
    /// Desired CoM per knot (linear interpolation at nominal height).
    pub com_des: Vec<Point3<f64>>,
    pub vel_des: Vector3<f64>,
    /// Desired swing-foot position per knot (line plus a vertical arc).
    pub swing_des: Vec<Point3<f64>>,
    pub obstacles: Vec<Obstacle>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    Infeasible,
}

/// Worst residual per constraint family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    pub dynamics: f64,
    pub mode: f64,
    pub friction: f64,
    pub collision: f64,
}

impl Residuals {
    pub fn within(&self, tol: &Tolerances) -> bool {
        self.dynamics <= tol.dynamics
            && self.mode <= tol.mode
            && self.friction <= tol.friction
            && self.collision <= tol.collision
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    pub status: SolveStatus,
    /// Quadratic tracking + input cost of the returned iterate.
    pub objective: f64,
    pub residuals: Residuals,
    /// Realized destination coparameters: the landed swing-foot position.
    pub realized_landing: [f64; 3],
    pub states: Vec<ReducedState>,
    pub inputs: Vec<ControlInput>,
    #[serde(skip)]
    pub iterations: usize,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl Solution {
    pub fn to_json_pretty(&self) -> String {
        #[derive(Serialize)]
        struct Knot {
            t: f64,
            com: [f64; 3],
            com_vel: [f64; 3],
            feet: [[f64; 3]; 4],
            forces: [[f64; 3]; 4],
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            status: &'a SolveStatus,
            objective: f64,
            residuals: &'a Residuals,
            knots: Vec<Knot>,
        }
        let dt = self.states.len();
        let _ = dt;
        let knots = self
            .states
            .iter()
            .enumerate()
            .map(|(k, s)| Knot {
                t: k as f64,
                com: s.com,
                com_vel: s.com_vel,
                feet: s.feet,
                forces: self
                    .inputs
                    .get(k.min(self.inputs.len().saturating_sub(1)))
                    .map(|u| u.forces)
                    .unwrap_or([[0.0; 3]; 4]),
            })
            .collect();
        let doc = Doc {
            status: &self.status,
            objective: self.objective,
            residuals: &self.residuals,
            knots,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("solution serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Error)]
pub enum TrajOptError {
    #[error("modes are not adjacent: {0}")]
    NotAdjacent(String),
    #[error("invalid problem: {0}")]
    BadProblem(String),
}

/// Assemble the optimization instance for one transition.
///
/// Stance feet are pinned for the whole horizon; the swing foot must reach
/// `landing` at the final knot. Obstacles are the unknown primitives with
/// non-passable faces whose centroid lies within the activation radius of
/// the straight CoM path.
pub fn build_problem(
    stance: Vec<(FootId, Point3<f64>)>,
    swing_foot: FootId,
    takeoff: Point3<f64>,
    landing: Point3<f64>,
    scene: &Scene,
    config: TransitionConfig,
) -> Result<TransitionProblem, TrajOptError> {
    if stance.len() != 3 {
        return Err(TrajOptError::NotAdjacent(format!(
            "expected 3 stance feet, got {}",
            stance.len()
        )));
    }
    if stance.iter().any(|(f, _)| *f == swing_foot) {
        return Err(TrajOptError::NotAdjacent(format!(
            "swing foot {swing_foot:?} also appears in the stance set"
        )));
    }
    if config.n_knots < 2 || config.dt <= 0.0 || config.mu <= 0.0 || config.mass <= 0.0 {
        return Err(TrajOptError::BadProblem(
            "need n_knots >= 2, dt > 0, mu > 0, mass > 0".into(),
        ));
    }
    let n = config.n_knots;
    let stance_sum: Vector3<f64> = stance.iter().map(|(_, p)| p.coords).sum();
    let lift = Vector3::new(0.0, 0.0, NOMINAL_COM_HEIGHT);
    let com0 = Point3::from((stance_sum + takeoff.coords) / 4.0) + lift;
    let com_n = Point3::from((stance_sum + landing.coords) / 4.0) + lift;
    let com_des: Vec<Point3<f64>> = (0..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            Point3::from(com0.coords + (com_n.coords - com0.coords) * s)
        })
        .collect();
    let vel_des = (com_n - com0) / (n as f64 * config.dt);
    let swing_des: Vec<Point3<f64>> = (0..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            let mut p = Point3::from(takeoff.coords + (landing.coords - takeoff.coords) * s);
            p.z += config.swing_lift * (std::f64::consts::PI * s).sin();
            p
        })
        .collect();

    let obstacles: Vec<Obstacle> = scene
        .primitives
        .iter()
        .zip(&scene.meshes)
        .filter(|(p, mesh)| {
            !p.known_to_planner
                && p.class != ShapeClass::Floor
                && mesh
                    .face_labels
                    .iter()
                    .any(|l| *l == SteppabilityLabel::NonPassable)
        })
        .map(|(p, _)| Obstacle { id: p.id, instance: p.clone() })
        .filter(|o| {
            let c = o.centroid();
            segment_distance(&com0, &com_n, &c) <= config.activation_radius
        })
        .collect();

    Ok(TransitionProblem {
        config,
        stance,
        swing_foot,
        takeoff,
        landing,
        com0,
        com_des,
        vel_des,
        swing_des,
        obstacles,
    })
}

fn segment_distance(a: &Point3<f64>, b: &Point3<f64>, p: &Point3<f64>) -> f64 {
    let ab = b - a;
    let denom = ab.norm_squared();
    let t = if denom < 1e-18 { 0.0 } else { ((p - a).dot(&ab) / denom).clamp(0.0, 1.0) };
    (p - (a + ab * t)).norm()
}
