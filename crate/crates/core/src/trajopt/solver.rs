//! Direct transcription and the penalty-method solve loop.
//!
//! Decision vector layout, with `N = n_knots` and states fixed at knot 0:
//!
//! ```text
//! z = [ com[1], vel[1], swing[1], ..., com[N], vel[N], swing[N],   9 per knot
//!       f1[0], f2[0], f3[0], w[0], ..., f*[N-1], w[N-1] ]          12 per knot
//! ```
//!
//! Stance-foot positions never enter the vector (pinned by construction)
//! and the swing foot carries no force variables, so those two mode
//! constraint families hold exactly on every iterate.

use super::lbfgs;
use super::{ControlInput, ReducedState, Residuals, Solution, SolveStatus, TransitionProblem};

use nalgebra::{Point3, Vector3};
use std::time::Instant;

struct Layout {
    n: usize,
    base_u: usize,
    /// Newtons per unit of a stored force variable; chosen so force entries
    /// see the same penalty curvature as the state entries.
    force_scale: f64,
    /// Meters-per-second per unit of a stored swing-velocity variable.
    swing_vel_scale: f64,
}

impl Layout {
    fn of(p: &TransitionProblem) -> Layout {
        let n = p.config.n_knots;
        Layout {
            n,
            base_u: 9 * n,
            force_scale: p.config.mass / (p.config.dt * 3f64.sqrt()),
            swing_vel_scale: 1.0 / p.config.dt,
        }
    }

    fn len(&self) -> usize {
        self.base_u + 12 * self.n
    }

    /// Index of com[k] (k >= 1).
    fn com(&self, k: usize) -> usize {
        (k - 1) * 9
    }

    fn vel(&self, k: usize) -> usize {
        (k - 1) * 9 + 3
    }

    fn swing(&self, k: usize) -> usize {
        (k - 1) * 9 + 6
    }

    /// Index of stance force j at input knot k.
    fn force(&self, k: usize, j: usize) -> usize {
        self.base_u + k * 12 + 3 * j
    }

    fn swing_vel(&self, k: usize) -> usize {
        self.base_u + k * 12 + 9
    }
}

fn vec3(z: &[f64], at: usize) -> Vector3<f64> {
    Vector3::new(z[at], z[at + 1], z[at + 2])
}

fn add3(g: &mut [f64], at: usize, v: Vector3<f64>) {
    g[at] += v.x;
    g[at + 1] += v.y;
    g[at + 2] += v.z;
}

struct View<'a> {
    p: &'a TransitionProblem,
    l: &'a Layout,
    z: &'a [f64],
}

impl View<'_> {
    fn com(&self, k: usize) -> Vector3<f64> {
        if k == 0 {
            self.p.com0.coords
        } else {
            vec3(self.z, self.l.com(k))
        }
    }

    fn vel(&self, k: usize) -> Vector3<f64> {
        if k == 0 {
            Vector3::zeros()
        } else {
            vec3(self.z, self.l.vel(k))
        }
    }

    fn swing(&self, k: usize) -> Vector3<f64> {
        if k == 0 {
            self.p.takeoff.coords
        } else {
            vec3(self.z, self.l.swing(k))
        }
    }

    /// Physical force in Newtons (the vector stores it scaled).
    fn force(&self, k: usize, j: usize) -> Vector3<f64> {
        vec3(self.z, self.l.force(k, j)) * self.l.force_scale
    }

    /// Physical swing velocity in m/s.
    fn swing_vel(&self, k: usize) -> Vector3<f64> {
        vec3(self.z, self.l.swing_vel(k)) * self.l.swing_vel_scale
    }
}

fn facet_directions(m: usize) -> Vec<(f64, f64)> {
    (0..m)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            (th.cos(), th.sin())
        })
        .collect()
}

/// Quadratic tracking and input cost of a candidate (no penalty terms).
pub fn quadratic_objective(p: &TransitionProblem, z: &[f64]) -> f64 {
    objective_parts(p, z).0 + objective_parts(p, z).1
}

/// (state tracking cost, input cost).
pub fn objective_parts(p: &TransitionProblem, z: &[f64]) -> (f64, f64) {
    let l = Layout::of(p);
    let v = View { p, l: &l, z };
    let w = &p.config.weights;
    let n = l.n;
    let mut state_cost = 0.0;
    for k in 1..=n {
        let (qc, qv, qs) = if k == n {
            (w.qf_com, w.qf_vel, w.qf_swing)
        } else {
            (w.q_com, w.q_vel, w.q_swing)
        };
        state_cost += qc * (v.com(k) - p.com_des[k].coords).norm_squared();
        state_cost += qv * (v.vel(k) - p.vel_des).norm_squared();
        state_cost += qs * (v.swing(k) - p.swing_des[k].coords).norm_squared();
    }
    let mut input_cost = 0.0;
    for k in 0..n {
        for j in 0..3 {
            input_cost += w.r_force * v.force(k, j).norm_squared();
        }
        input_cost += w.r_swing_vel * v.swing_vel(k).norm_squared();
    }
    (state_cost, input_cost)
}

/// Penalty-augmented objective and its analytic gradient.
pub fn objective_and_gradient(p: &TransitionProblem, z: &[f64], rho: f64) -> (f64, Vec<f64>) {
    let l = Layout::of(p);
    let v = View { p, l: &l, z };
    let w = &p.config.weights;
    let n = l.n;
    let dt = p.config.dt;
    let mass = p.config.mass;
    let gravity = Vector3::new(0.0, 0.0, -p.config.gravity);
    let mu = p.config.mu;
    let facets = facet_directions(p.config.friction_facets);

    let mut f = 0.0;
    let mut g = vec![0.0; l.len()];

    // Quadratic tracking and input costs.
    for k in 1..=n {
        let (qc, qv, qs) = if k == n {
            (w.qf_com, w.qf_vel, w.qf_swing)
        } else {
            (w.q_com, w.q_vel, w.q_swing)
        };
        let dc = v.com(k) - p.com_des[k].coords;
        let dv = v.vel(k) - p.vel_des;
        let ds = v.swing(k) - p.swing_des[k].coords;
        f += qc * dc.norm_squared() + qv * dv.norm_squared() + qs * ds.norm_squared();
        add3(&mut g, l.com(k), 2.0 * qc * dc);
        add3(&mut g, l.vel(k), 2.0 * qv * dv);
        add3(&mut g, l.swing(k), 2.0 * qs * ds);
    }
    for k in 0..n {
        for j in 0..3 {
            let fj = v.force(k, j);
            f += w.r_force * fj.norm_squared();
            add3(&mut g, l.force(k, j), 2.0 * w.r_force * l.force_scale * fj);
        }
        let sv = v.swing_vel(k);
        f += w.r_swing_vel * sv.norm_squared();
        add3(&mut g, l.swing_vel(k), 2.0 * w.r_swing_vel * l.swing_vel_scale * sv);
    }

    // Dynamics defects: trapezoidal CoM, zero-order-hold inputs.
    for k in 0..n {
        let d_com = v.com(k + 1) - v.com(k) - (dt / 2.0) * (v.vel(k) + v.vel(k + 1));
        f += rho * d_com.norm_squared();
        add3(&mut g, l.com(k + 1), 2.0 * rho * d_com);
        add3(&mut g, l.vel(k + 1), -rho * dt * d_com);
        if k >= 1 {
            add3(&mut g, l.com(k), -2.0 * rho * d_com);
            add3(&mut g, l.vel(k), -rho * dt * d_com);
        }

        let mut accel = gravity;
        for j in 0..3 {
            accel += v.force(k, j) / mass;
        }
        let d_vel = v.vel(k + 1) - v.vel(k) - dt * accel;
        f += rho * d_vel.norm_squared();
        add3(&mut g, l.vel(k + 1), 2.0 * rho * d_vel);
        if k >= 1 {
            add3(&mut g, l.vel(k), -2.0 * rho * d_vel);
        }
        for j in 0..3 {
            add3(&mut g, l.force(k, j), -2.0 * rho * (dt * l.force_scale / mass) * d_vel);
        }

        let d_swing = v.swing(k + 1) - v.swing(k) - dt * v.swing_vel(k);
        f += rho * d_swing.norm_squared();
        add3(&mut g, l.swing(k + 1), 2.0 * rho * d_swing);
        if k >= 1 {
            add3(&mut g, l.swing(k), -2.0 * rho * d_swing);
        }
        add3(&mut g, l.swing_vel(k), -2.0 * rho * dt * l.swing_vel_scale * d_swing);
    }

    // Terminal landing constraint.
    let d_land = v.swing(n) - p.landing.coords;
    f += rho * d_land.norm_squared();
    add3(&mut g, l.swing(n), 2.0 * rho * d_land);

    // Friction pyramid on stance forces.
    for k in 0..n {
        for j in 0..3 {
            let fj = v.force(k, j);
            let lift_violation = (-fj.z).max(0.0);
            if lift_violation > 0.0 {
                f += rho * lift_violation * lift_violation;
                g[l.force(k, j) + 2] += -2.0 * rho * lift_violation * l.force_scale;
            }
            for &(cx, sy) in &facets {
                let viol = (cx * fj.x + sy * fj.y - mu * fj.z).max(0.0);
                if viol > 0.0 {
                    f += rho * viol * viol;
                    g[l.force(k, j)] += 2.0 * rho * viol * cx * l.force_scale;
                    g[l.force(k, j) + 1] += 2.0 * rho * viol * sy * l.force_scale;
                    g[l.force(k, j) + 2] += -2.0 * rho * viol * mu * l.force_scale;
                }
            }
        }
    }

    // Obstacle clearance for the swing foot.
    let margin = p.config.clearance;
    for k in 1..=n {
        let sp = Point3::from(v.swing(k));
        for o in &p.obstacles {
            let (sd, grad_sd) = o.sdf(&sp);
            let viol = (margin - sd).max(0.0);
            if viol > 0.0 {
                f += rho * viol * viol;
                add3(&mut g, l.swing(k), -2.0 * rho * viol * grad_sd);
            }
        }
    }

    (f, g)
}

fn initial_guess(p: &TransitionProblem) -> Vec<f64> {
    let l = Layout::of(p);
    let n = l.n;
    let mut z = vec![0.0; l.len()];
    for k in 1..=n {
        let com = p.com_des[k].coords;
        let swing = p.swing_des[k].coords;
        z[l.com(k)..l.com(k) + 3].copy_from_slice(com.as_slice());
        z[l.vel(k)..l.vel(k) + 3].copy_from_slice(p.vel_des.as_slice());
        z[l.swing(k)..l.swing(k) + 3].copy_from_slice(swing.as_slice());
    }
    let fz = p.config.mass * p.config.gravity / 3.0 / l.force_scale;
    for k in 0..n {
        for j in 0..3 {
            z[l.force(k, j) + 2] = fz;
        }
        let w = (p.swing_des[k + 1] - p.swing_des[k]) / (p.config.dt * l.swing_vel_scale);
        z[l.swing_vel(k)..l.swing_vel(k) + 3].copy_from_slice(w.as_slice());
    }
    z
}

/// Clamp stance forces into the friction pyramid in place.
fn project_forces(p: &TransitionProblem, z: &mut [f64]) {
    let l = Layout::of(p);
    let mu = p.config.mu;
    let facets = facet_directions(p.config.friction_facets);
    for k in 0..l.n {
        for j in 0..3 {
            let at = l.force(k, j);
            let mut fx = z[at] * l.force_scale;
            let mut fy = z[at + 1] * l.force_scale;
            let mut fz = z[at + 2] * l.force_scale;
            if fz < 0.0 {
                fz = 0.0;
            }
            for _ in 0..3 {
                for &(cx, sy) in &facets {
                    let viol = cx * fx + sy * fy - mu * fz;
                    if viol > 0.0 {
                        fx -= viol * cx;
                        fy -= viol * sy;
                    }
                }
            }
            z[at] = fx / l.force_scale;
            z[at + 1] = fy / l.force_scale;
            z[at + 2] = fz / l.force_scale;
        }
    }
}

/// Worst residual per constraint family at a candidate.
pub(crate) fn residuals(p: &TransitionProblem, z: &[f64]) -> Residuals {
    let l = Layout::of(p);
    let v = View { p, l: &l, z };
    let n = l.n;
    let dt = p.config.dt;
    let gravity = Vector3::new(0.0, 0.0, -p.config.gravity);
    let facets = facet_directions(p.config.friction_facets);
    let mut dynamics = 0.0f64;
    for k in 0..n {
        let d_com = v.com(k + 1) - v.com(k) - (dt / 2.0) * (v.vel(k) + v.vel(k + 1));
        let mut accel = gravity;
        for j in 0..3 {
            accel += v.force(k, j) / p.config.mass;
        }
        let d_vel = v.vel(k + 1) - v.vel(k) - dt * accel;
        let d_swing = v.swing(k + 1) - v.swing(k) - dt * v.swing_vel(k);
        let defect = (d_com.norm_squared() + d_vel.norm_squared() + d_swing.norm_squared()).sqrt();
        dynamics = dynamics.max(defect);
    }
    let mode = (v.swing(n) - p.landing.coords).norm();
    let mut friction = 0.0f64;
    for k in 0..n {
        for j in 0..3 {
            let fj = v.force(k, j);
            friction = friction.max(-fj.z);
            for &(cx, sy) in &facets {
                friction = friction.max(cx * fj.x + sy * fj.y - p.config.mu * fj.z);
            }
        }
    }
    let mut collision = 0.0f64;
    for k in 1..=n {
        let sp = Point3::from(v.swing(k));
        for o in &p.obstacles {
            collision = collision.max(p.config.clearance - o.signed_distance(&sp));
        }
    }
    Residuals {
        dynamics,
        mode,
        friction: friction.max(0.0),
        collision: collision.max(0.0),
    }
}

/// Solve the transition problem with the escalating penalty schedule.
pub fn solve(p: &TransitionProblem) -> Solution {
    let t0 = Instant::now();
    let rounds = p.config.penalty_rounds.max(1);
    let iters_per_round = (p.config.max_iterations / rounds).max(1);
    let mut z = initial_guess(p);
    let mut rho = p.config.initial_penalty;
    let mut total_iters = 0;
    let mut stationary = true;
    for _ in 0..rounds {
        let res = lbfgs::minimize(
            |x| objective_and_gradient(p, x, rho),
            std::mem::take(&mut z),
            iters_per_round,
            1e-10,
        );
        z = res.x;
        total_iters += res.iterations;
        stationary = res.stationary;
        rho *= 10.0;
    }
    project_forces(p, &mut z);
    let res = residuals(p, &z);
    let status = if res.within(&p.config.tolerances) {
        SolveStatus::Converged
    } else if stationary {
        SolveStatus::Infeasible
    } else {
        SolveStatus::MaxIter
    };

    let l = Layout::of(p);
    let v = View { p, l: &l, z: &z };
    let n = l.n;
    let mut states = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut feet = [[0.0; 3]; 4];
        for (foot, pos) in &p.stance {
            feet[foot.index()] = [pos.x, pos.y, pos.z];
        }
        let sw = v.swing(k);
        feet[p.swing_foot.index()] = [sw.x, sw.y, sw.z];
        states.push(ReducedState {
            com: v.com(k).into(),
            com_vel: v.vel(k).into(),
            feet,
        });
    }
    let mut inputs = Vec::with_capacity(n);
    for k in 0..n {
        let mut forces = [[0.0; 3]; 4];
        for (j, (foot, _)) in p.stance.iter().enumerate() {
            let fj = v.force(k, j);
            forces[foot.index()] = [fj.x, fj.y, fj.z];
        }
        let mut foot_vel = [[0.0; 3]; 4];
        let w = v.swing_vel(k);
        foot_vel[p.swing_foot.index()] = [w.x, w.y, w.z];
        inputs.push(ControlInput { forces, foot_vel });
    }
    let landing = v.swing(n);
    Solution {
        status,
        objective: quadratic_objective(p, &z),
        residuals: res,
        realized_landing: [landing.x, landing.y, landing.z],
        states,
        inputs,
        iterations: total_iters,
        wall_time_s: t0.elapsed().as_secs_f64(),
    }
}

/// Number of decision variables for a problem.
#[cfg(test)]
pub(crate) fn decision_len(p: &TransitionProblem) -> usize {
    Layout::of(p).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::FootId;
    use crate::geometry::{
        assemble_scene, spawn_obstacle, LabelPolicyConfig, Pose6D, PrimitiveInstance,
        PrimitiveParams, SceneConfig, ShapeClass,
    };
    use crate::trajopt::{build_problem, TransitionConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat_scene() -> crate::geometry::Scene {
        assemble_scene(&SceneConfig::default(), &LabelPolicyConfig::default()).unwrap()
    }

    fn stance_at(cx: f64) -> Vec<(FootId, Point3<f64>)> {
        vec![
            (FootId::RF, Point3::new(cx + 0.17, -0.13, 0.0)),
            (FootId::LH, Point3::new(cx - 0.17, 0.13, 0.0)),
            (FootId::RH, Point3::new(cx - 0.17, -0.13, 0.0)),
        ]
    }

    fn step_problem(step: f64, lift: f64) -> crate::trajopt::TransitionProblem {
        let scene = flat_scene();
        build_problem(
            stance_at(0.0),
            FootId::LF,
            Point3::new(0.17, 0.13, 0.0),
            Point3::new(0.17 + step, 0.13, 0.0),
            &scene,
            TransitionConfig { swing_lift: lift, ..TransitionConfig::default() },
        )
        .unwrap()
    }

    #[test]
    fn static_equilibrium_converges_with_force_balance() {
        let p = step_problem(0.0, 0.0);
        let sol = solve(&p);
        assert_eq!(sol.status, SolveStatus::Converged);
        let weight = p.config.mass * p.config.gravity;
        for u in &sol.inputs {
            let mut total = [0.0f64; 3];
            for f in &u.forces {
                for a in 0..3 {
                    total[a] += f[a];
                }
            }
            assert!(total[0].abs() < 1e-3, "x balance {}", total[0]);
            assert!(total[1].abs() < 1e-3, "y balance {}", total[1]);
            assert!((total[2] - weight).abs() < 1e-3, "z balance {}", total[2] - weight);
        }
        // Objective sits at the input-regularization floor.
        let floor =
            p.config.n_knots as f64 * p.config.weights.r_force * 3.0 * (weight / 3.0).powi(2);
        assert!(
            (sol.objective - floor).abs() < 0.05 * floor,
            "objective {} vs floor {floor}",
            sol.objective
        );
    }

    #[test]
    fn forward_step_reaches_the_landing() {
        let p = step_problem(0.2, 0.06);
        let sol = solve(&p);
        assert_eq!(sol.status, SolveStatus::Converged);
        let land = Point3::new(
            sol.realized_landing[0],
            sol.realized_landing[1],
            sol.realized_landing[2],
        );
        assert!((land - p.landing).norm() < 1e-3, "landing error {}", (land - p.landing).norm());
        assert!(sol.residuals.dynamics < 1e-3);
        assert!(sol.residuals.friction <= 1e-6);
        // Swing feet carry zero force at every knot, by construction.
        for u in &sol.inputs {
            assert_eq!(u.forces[p.swing_foot.index()], [0.0; 3]);
        }
        // Stance feet never move.
        for s in &sol.states {
            for (foot, pos) in &p.stance {
                let fp = s.feet[foot.index()];
                assert_eq!(fp, [pos.x, pos.y, pos.z]);
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let scene = flat_scene();
        let with_obstacle = spawn_obstacle(
            &scene,
            PrimitiveInstance::new(
                9,
                ShapeClass::Sphere,
                PrimitiveParams::Round { r: 0.06 },
                Pose6D::at(0.3, 0.1, 0.0),
                false,
            ),
        )
        .unwrap();
        let p = build_problem(
            stance_at(0.0),
            FootId::LF,
            Point3::new(0.17, 0.13, 0.0),
            Point3::new(0.45, 0.13, 0.0),
            &with_obstacle,
            TransitionConfig { n_knots: 6, ..TransitionConfig::default() },
        )
        .unwrap();
        assert!(!p.obstacles.is_empty());
        let n = decision_len(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let base = initial_guess(&p);
        let h = 1e-6;
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let z: Vec<f64> =
                base.iter().map(|v| v + rng.random_range(-0.05..0.05)).collect();
            assert_eq!(z.len(), n);
            let (_, grad) = objective_and_gradient(&p, &z, 500.0);
            let mut fd_inf = 0.0f64;
            let mut err_inf = 0.0f64;
            let mut zp = z.clone();
            for i in 0..n {
                let orig = zp[i];
                zp[i] = orig + h;
                let fp = objective_and_gradient(&p, &zp, 500.0).0;
                zp[i] = orig - h;
                let fm = objective_and_gradient(&p, &zp, 500.0).0;
                zp[i] = orig;
                let fd = (fp - fm) / (2.0 * h);
                fd_inf = fd_inf.max(fd.abs());
                err_inf = err_inf.max((fd - grad[i]).abs());
            }
            worst = worst.max(err_inf / fd_inf.max(1.0));
        }
        assert!(worst < 1e-4, "max relative gradient error {worst}");
    }

    #[test]
    fn swing_line_through_sphere_clears_or_fails() {
        let scene = flat_scene();
        // Sphere dead on the straight swing line, but not on the landing.
        let blocked = spawn_obstacle(
            &scene,
            PrimitiveInstance::new(
                9,
                ShapeClass::Sphere,
                PrimitiveParams::Round { r: 0.06 },
                Pose6D::at(0.31, 0.13, 0.0),
                false,
            ),
        )
        .unwrap();
        let p = build_problem(
            stance_at(0.0),
            FootId::LF,
            Point3::new(0.17, 0.13, 0.0),
            Point3::new(0.48, 0.13, 0.0),
            &blocked,
            TransitionConfig::default(),
        )
        .unwrap();
        assert_eq!(p.obstacles.len(), 1);
        let sol = solve(&p);
        assert_eq!(sol.status, SolveStatus::Converged);
        // Direct signed-distance audit of every swing knot.
        for (k, s) in sol.states.iter().enumerate().skip(1) {
            let sw = s.feet[p.swing_foot.index()];
            let sd = p.obstacles[0].signed_distance(&Point3::new(sw[0], sw[1], sw[2]));
            assert!(
                sd >= p.config.clearance - 1e-6,
                "knot {k} inside clearance: sd {sd}"
            );
        }
    }

    #[test]
    fn covered_landing_is_infeasible() {
        let scene = flat_scene();
        let covered = spawn_obstacle(
            &scene,
            PrimitiveInstance::new(
                9,
                ShapeClass::Sphere,
                PrimitiveParams::Round { r: 0.06 },
                Pose6D::at(0.37, 0.13, 0.0),
                false,
            ),
        )
        .unwrap();
        let p = build_problem(
            stance_at(0.0),
            FootId::LF,
            Point3::new(0.17, 0.13, 0.0),
            // Landing exactly under the sphere.
            Point3::new(0.37, 0.13, 0.0),
            &covered,
            TransitionConfig::default(),
        )
        .unwrap();
        let sol = solve(&p);
        assert_ne!(sol.status, SolveStatus::Converged);
    }

    #[test]
    fn desired_candidate_with_zero_inputs_costs_nothing() {
        let p = step_problem(0.2, 0.0);
        let l = Layout::of(&p);
        let mut z = vec![0.0; l.len()];
        for k in 1..=l.n {
            z[l.com(k)..l.com(k) + 3].copy_from_slice(p.com_des[k].coords.as_slice());
            z[l.vel(k)..l.vel(k) + 3].copy_from_slice(p.vel_des.as_slice());
            z[l.swing(k)..l.swing(k) + 3].copy_from_slice(p.swing_des[k].coords.as_slice());
        }
        let (f, _) = objective_and_gradient(&p, &z, 0.0);
        assert!(f.abs() < 1e-12);
    }

    #[test]
    fn doubling_r_doubles_input_cost() {
        let p = step_problem(0.2, 0.06);
        let z = initial_guess(&p);
        let (_, input_cost) = objective_parts(&p, &z);
        let mut p2 = p.clone();
        p2.config.weights.r_force *= 2.0;
        p2.config.weights.r_swing_vel *= 2.0;
        let (_, doubled) = objective_parts(&p2, &z);
        assert!((doubled - 2.0 * input_cost).abs() < 1e-9);
    }

    #[test]
    fn objective_never_increases_across_penalty_rounds() {
        let p = step_problem(0.2, 0.06);
        // Within one round at fixed penalty weight, line-searched descent
        // never accepts an increase; verify end-to-end by re-minimizing the
        // final iterate.
        let sol = solve(&p);
        let rho_final =
            p.config.initial_penalty * 10f64.powi(p.config.penalty_rounds as i32 - 1);
        let mut z = Vec::new();
        let l = Layout::of(&p);
        z.resize(l.len(), 0.0);
        for k in 1..=l.n {
            let s = &sol.states[k];
            z[l.com(k)..l.com(k) + 3].copy_from_slice(&s.com);
            z[l.vel(k)..l.vel(k) + 3].copy_from_slice(&s.com_vel);
            z[l.swing(k)..l.swing(k) + 3].copy_from_slice(&s.feet[p.swing_foot.index()]);
        }
        for k in 0..l.n {
            let u = &sol.inputs[k];
            for (j, (foot, _)) in p.stance.iter().enumerate() {
                let at = l.force(k, j);
                for a in 0..3 {
                    z[at + a] = u.forces[foot.index()][a] / l.force_scale;
                }
            }
            let at = l.swing_vel(k);
            for a in 0..3 {
                z[at + a] = u.foot_vel[p.swing_foot.index()][a] / l.swing_vel_scale;
            }
        }
        let before = objective_and_gradient(&p, &z, rho_final).0;
        let res = lbfgs::minimize(
            |x| objective_and_gradient(&p, x, rho_final),
            z,
            50,
            1e-12,
        );
        assert!(res.value <= before + 1e-9);
    }
}
