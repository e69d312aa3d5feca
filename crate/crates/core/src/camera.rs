//! Pinhole camera: intrinsics, extrinsics, jittered trajectories, projection.
//!
//! Conventions: the world frame is x forward, y left, z up. The camera
//! optical frame is x right, y down, z forward (along the optical axis).
//! With zero roll/pitch/yaw the camera looks along world +x; positive pitch
//! tilts the view downward. Pixel coordinates are (u, v) = (column, row)
//! with the origin at the top-left corner and continuous values; floor them
//! for raster lookups.

use crate::geometry::Pose6D;
use nalgebra::{Matrix3, Point3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Pinhole intrinsics; focal lengths and principal point in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Intrinsics {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
    ) -> Result<Self, CameraError> {
        let k = Intrinsics { fx, fy, cx, cy, width, height };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<(), CameraError> {
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(CameraError::BadIntrinsics("focal lengths must be positive".into()));
        }
        if self.cx < 0.0
            || self.cx >= self.width as f64
            || self.cy < 0.0
            || self.cy >= self.height as f64
        {
            return Err(CameraError::BadIntrinsics(
                "principal point must lie inside the image".into(),
            ));
        }
        Ok(())
    }
}

/// World-to-camera rigid transform at a timestamp: `x_cam = R * x_world + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraPose {
    r_cw: Matrix3<f64>,
    t_cw: Vector3<f64>,
    pub timestamp: f64,
}

/// Maps camera-frame axes (x right, y down, z forward) into the world frame
/// of a camera looking along world +x.
fn optical_base() -> Matrix3<f64> {
    Matrix3::new(0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0)
}

impl CameraPose {
    /// Build from an explicit world-to-camera rotation and translation.
    pub fn from_parts(
        r_cw: Matrix3<f64>,
        t_cw: Vector3<f64>,
        timestamp: f64,
    ) -> Result<CameraPose, CameraError> {
        let gram = r_cw.transpose() * r_cw - Matrix3::identity();
        if gram.norm() > 1e-9 {
            return Err(CameraError::NotARotation);
        }
        if (r_cw.determinant() - 1.0).abs() > 1e-9 {
            return Err(CameraError::NotARotation);
        }
        Ok(CameraPose { r_cw, t_cw, timestamp })
    }

    /// Build from the camera body pose in the world (position + yaw-pitch-roll).
    pub fn from_world_pose(pose: &Pose6D, timestamp: f64) -> CameraPose {
        let r_wc = pose.rotation().matrix() * optical_base();
        let r_cw = r_wc.transpose();
        let t_cw = -r_cw * pose.translation();
        CameraPose { r_cw, t_cw, timestamp }
    }

    pub fn rotation_cw(&self) -> &Matrix3<f64> {
        &self.r_cw
    }

    pub fn translation_cw(&self) -> &Vector3<f64> {
        &self.t_cw
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Point3<f64> {
        Point3::from(-self.r_cw.transpose() * self.t_cw)
    }

    pub fn to_camera(&self, p: &Point3<f64>) -> Vector3<f64> {
        self.r_cw * p.coords + self.t_cw
    }

    /// World-frame ray through pixel (u, v), scaled so that advancing the
    /// parameter by 1 advances camera-frame depth by 1 meter.
    pub fn pixel_ray(&self, u: f64, v: f64, k: &Intrinsics) -> (Point3<f64>, Vector3<f64>) {
        let dir_cam = Vector3::new((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
        (self.center(), self.r_cw.transpose() * dir_cam)
    }

    /// Optical axis direction in the world frame.
    pub fn forward(&self) -> Vector3<f64> {
        self.r_cw.transpose() * Vector3::new(0.0, 0.0, 1.0)
    }
}

/// Outcome of projecting a world point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PixelResult {
    /// Inside image bounds: `0 <= u < width`, `0 <= v < height`.
    InFrame { u: f64, v: f64 },
    OutOfFrame,
    BehindCamera,
}

/// Pinhole projection of a world point; total over all inputs.
///
/// Points with non-positive camera depth (including w = 0 exactly) report
/// `BehindCamera`.
pub fn project(p: &Point3<f64>, k: &Intrinsics, pose: &CameraPose) -> PixelResult {
    let cam = pose.to_camera(p);
    let w = cam.z;
    if w <= 0.0 {
        return PixelResult::BehindCamera;
    }
    let u = k.fx * cam.x / w + k.cx;
    let v = k.fy * cam.y / w + k.cy;
    if u >= 0.0 && u < k.width as f64 && v >= 0.0 && v < k.height as f64 {
        PixelResult::InFrame { u, v }
    } else {
        PixelResult::OutOfFrame
    }
}

/// Standard deviations for the six pose dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterConfig {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_z: f64,
    pub sigma_roll: f64,
    pub sigma_pitch: f64,
    pub sigma_yaw: f64,
}

impl JitterConfig {
    pub fn zero() -> JitterConfig {
        JitterConfig {
            sigma_x: 0.0,
            sigma_y: 0.0,
            sigma_z: 0.0,
            sigma_roll: 0.0,
            sigma_pitch: 0.0,
            sigma_yaw: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), CameraError> {
        let all = [
            self.sigma_x,
            self.sigma_y,
            self.sigma_z,
            self.sigma_roll,
            self.sigma_pitch,
            self.sigma_yaw,
        ];
        if all.iter().any(|s| *s < 0.0 || !s.is_finite()) {
            return Err(CameraError::BadJitter);
        }
        Ok(())
    }
}

impl Default for JitterConfig {
    /// 1 cm translation and ~1 degree rotation noise.
    fn default() -> Self {
        JitterConfig {
            sigma_x: 0.01,
            sigma_y: 0.01,
            sigma_z: 0.01,
            sigma_roll: 0.0175,
            sigma_pitch: 0.0175,
            sigma_yaw: 0.0175,
        }
    }
}

/// A timestamped nominal camera body pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraWaypoint {
    pub time: f64,
    pub pose: Pose6D,
}

/// Nominal camera path through a scene plus the number of frames to render.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraTrajectory {
    pub waypoints: Vec<CameraWaypoint>,
    pub frames_per_scene: u32,
}

impl CameraTrajectory {
    pub fn validate(&self) -> Result<(), CameraError> {
        if self.waypoints.is_empty() {
            return Err(CameraError::EmptyTrajectory);
        }
        if self.waypoints.windows(2).any(|w| w[1].time <= w[0].time) {
            return Err(CameraError::NonMonotoneTimestamps);
        }
        Ok(())
    }

    /// Straight forward walk at the default rig height and pitch.
    pub fn forward_walk(from_x: f64, to_x: f64, frames_per_scene: u32) -> CameraTrajectory {
        let rig = default_rig_pose();
        CameraTrajectory {
            waypoints: vec![
                CameraWaypoint { time: 0.0, pose: Pose6D { x: from_x, ..rig } },
                CameraWaypoint { time: 1.0, pose: Pose6D { x: to_x, ..rig } },
            ],
            frames_per_scene,
        }
    }

    fn nominal_at(&self, t: f64) -> Pose6D {
        let wps = &self.waypoints;
        if t <= wps[0].time {
            return wps[0].pose;
        }
        for w in wps.windows(2) {
            let (a, b) = (w[0], w[1]);
            if t <= b.time {
                let s = (t - a.time) / (b.time - a.time);
                return lerp_pose(&a.pose, &b.pose, s);
            }
        }
        wps[wps.len() - 1].pose
    }
}

fn lerp_pose(a: &Pose6D, b: &Pose6D, s: f64) -> Pose6D {
    let angle = |x: f64, y: f64| x + s * crate::geometry::normalize_angle(y - x);
    Pose6D::new(
        a.x + s * (b.x - a.x),
        a.y + s * (b.y - a.y),
        a.z + s * (b.z - a.z),
        angle(a.roll, b.roll),
        angle(a.pitch, b.pitch),
        angle(a.yaw, b.yaw),
    )
}

/// One camera pose per frame: nominal poses sampled evenly in time along the
/// waypoint polyline, each perturbed by independent zero-mean Gaussian draws.
pub fn trajectory_poses(
    traj: &CameraTrajectory,
    jitter: &JitterConfig,
    rng: &mut impl Rng,
) -> Result<Vec<CameraPose>, CameraError> {
    traj.validate()?;
    jitter.validate()?;
    let n = traj.frames_per_scene.max(1);
    let t0 = traj.waypoints[0].time;
    let t1 = traj.waypoints[traj.waypoints.len() - 1].time;
    let mut out = Vec::with_capacity(n as usize);
    for k in 0..n {
        let t = if n == 1 || t1 <= t0 {
            t0 + 0.1 * k as f64
        } else {
            t0 + (t1 - t0) * k as f64 / (n - 1) as f64
        };
        let nominal = traj.nominal_at(t);
        let mut draw = |sigma: f64| -> f64 {
            if sigma == 0.0 {
                // Keep the stream aligned across configs.
                let _ = rng.random::<f64>();
                0.0
            } else {
                Normal::new(0.0, sigma).unwrap().sample(rng)
            }
        };
        let jittered = Pose6D::new(
            nominal.x + draw(jitter.sigma_x),
            nominal.y + draw(jitter.sigma_y),
            nominal.z + draw(jitter.sigma_z),
            nominal.roll + draw(jitter.sigma_roll),
            nominal.pitch + draw(jitter.sigma_pitch),
            nominal.yaw + draw(jitter.sigma_yaw),
        );
        out.push(CameraPose::from_world_pose(&jittered, t));
    }
    Ok(out)
}

/// Camera body pose of the default rig: 0.325 m off the ground, pitched
/// 30 degrees downward.
pub fn default_rig_pose() -> Pose6D {
    Pose6D::new(0.0, 0.0, 0.325, 0.0, 30f64.to_radians(), 0.0)
}

/// Default sensor model: 424x240 at ~90 degree horizontal field of view,
/// mounted per [`default_rig_pose`].
pub fn default_rig() -> (Intrinsics, CameraPose) {
    let k = Intrinsics::new(212.0, 212.0, 212.0, 120.0, 424, 240).expect("default intrinsics");
    (k, CameraPose::from_world_pose(&default_rig_pose(), 0.0))
}

/// Serialized camera metadata attached to every rendered frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMeta {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    /// World-to-camera rotation, row-major.
    pub r: [f64; 9],
    /// World-to-camera translation.
    pub t: [f64; 3],
    pub timestamp: f64,
}

impl FrameMeta {
    pub fn new(k: &Intrinsics, pose: &CameraPose) -> FrameMeta {
        let m = pose.rotation_cw();
        let mut r = [0.0; 9];
        for row in 0..3 {
            for col in 0..3 {
                r[row * 3 + col] = m[(row, col)];
            }
        }
        FrameMeta {
            fx: k.fx,
            fy: k.fy,
            cx: k.cx,
            cy: k.cy,
            width: k.width,
            height: k.height,
            r,
            t: [
                pose.translation_cw().x,
                pose.translation_cw().y,
                pose.translation_cw().z,
            ],
            timestamp: pose.timestamp,
        }
    }

    pub fn intrinsics(&self) -> Result<Intrinsics, CameraError> {
        Intrinsics::new(self.fx, self.fy, self.cx, self.cy, self.width, self.height)
    }

    pub fn pose(&self) -> Result<CameraPose, CameraError> {
        let r = Matrix3::from_row_slice(&self.r);
        CameraPose::from_parts(r, Vector3::new(self.t[0], self.t[1], self.t[2]), self.timestamp)
    }
}

#[derive(Debug, Error)]
pub enum CameraError {
    #[error("invalid intrinsics: {0}")]
    BadIntrinsics(String),
    #[error("rotation is not orthonormal with unit determinant")]
    NotARotation,
    #[error("jitter standard deviations must be finite and non-negative")]
    BadJitter,
    #[error("trajectory needs at least one waypoint")]
    EmptyTrajectory,
    #[error("waypoint timestamps must be strictly increasing")]
    NonMonotoneTimestamps,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_rig_matches_mount() {
        let (k, pose) = default_rig();
        assert_eq!((k.width, k.height), (424, 240));
        assert_eq!((k.fx, k.fy, k.cx, k.cy), (212.0, 212.0, 212.0, 120.0));
        assert_relative_eq!(pose.center().z, 0.325, epsilon = 1e-12);
        // Optical axis points forward and 30 degrees down.
        let f = pose.forward();
        assert_relative_eq!(f.x, 30f64.to_radians().cos(), epsilon = 1e-12);
        assert_relative_eq!(f.y, 0.0, epsilon = 1e-12);
        assert_relative_eq!(f.z, -30f64.to_radians().sin(), epsilon = 1e-12);
        // Orthonormality of the constructed rotation.
        let g = pose.rotation_cw().transpose() * pose.rotation_cw() - Matrix3::identity();
        assert!(g.norm() < 1e-12);
        assert!((pose.rotation_cw().determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn principal_point_projection() {
        let (k, pose) = default_rig();
        let p = pose.center() + pose.forward();
        match project(&p, &k, &pose) {
            PixelResult::InFrame { u, v } => {
                assert_relative_eq!(u, k.cx, epsilon = 1e-9);
                assert_relative_eq!(v, k.cy, epsilon = 1e-9);
            }
            other => panic!("expected principal point, got {other:?}"),
        }
    }

    #[test]
    fn point_behind_camera() {
        let (k, pose) = default_rig();
        let p = pose.center() - pose.forward();
        assert_eq!(project(&p, &k, &pose), PixelResult::BehindCamera);
        let on_plane =
            pose.center() + pose.rotation_cw().transpose() * Vector3::new(1.0, 0.0, 0.0);
        assert_eq!(project(&on_plane, &k, &pose), PixelResult::BehindCamera);
    }

    /// Independent oracle: explicit K * [R | t] homogeneous multiply.
    fn oracle_project(p: &Point3<f64>, k: &Intrinsics, pose: &CameraPose) -> (f64, f64, f64) {
        let km = [[k.fx, 0.0, k.cx], [0.0, k.fy, k.cy], [0.0, 0.0, 1.0]];
        let r = pose.rotation_cw();
        let t = pose.translation_cw();
        let rt = [
            [r[(0, 0)], r[(0, 1)], r[(0, 2)], t.x],
            [r[(1, 0)], r[(1, 1)], r[(1, 2)], t.y],
            [r[(2, 0)], r[(2, 1)], r[(2, 2)], t.z],
        ];
        let hp = [p.x, p.y, p.z, 1.0];
        let mut cam = [0.0f64; 3];
        for (i, row) in rt.iter().enumerate() {
            for (j, h) in hp.iter().enumerate() {
                cam[i] += row[j] * h;
            }
        }
        let mut img = [0.0f64; 3];
        for (i, row) in km.iter().enumerate() {
            for (j, c) in cam.iter().enumerate() {
                img[i] += row[j] * c;
            }
        }
        (img[0] / img[2], img[1] / img[2], img[2])
    }

    #[test]
    fn projection_matches_homogeneous_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let k = Intrinsics::new(
                rng.random_range(100.0..400.0),
                rng.random_range(100.0..400.0),
                rng.random_range(10.0..400.0),
                rng.random_range(10.0..200.0),
                480,
                270,
            )
            .unwrap();
            let body = Pose6D::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.1..1.0),
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                rng.random_range(-3.0..3.0),
            );
            let pose = CameraPose::from_world_pose(&body, 0.0);
            let p = Point3::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-1.0..2.0),
            );
            let (ou, ov, ow) = oracle_project(&p, &k, &pose);
            match project(&p, &k, &pose) {
                PixelResult::BehindCamera => assert!(ow <= 0.0),
                PixelResult::InFrame { u, v } => {
                    assert!((u - ou).abs() < 1e-9 && (v - ov).abs() < 1e-9);
                }
                PixelResult::OutOfFrame => {
                    assert!(ow > 0.0);
                    assert!(ou < 0.0 || ou >= k.width as f64 || ov < 0.0 || ov >= k.height as f64);
                }
            }
        }
    }

    #[test]
    fn w_equals_camera_depth() {
        let (k, pose) = default_rig();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p = Point3::new(
                rng.random_range(-2.0..3.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-1.0..1.0),
            );
            let depth = pose.to_camera(&p).z;
            let (_, _, ow) = oracle_project(&p, &k, &pose);
            assert_relative_eq!(depth, ow, epsilon = 1e-12);
            if depth <= 0.0 {
                assert_eq!(project(&p, &k, &pose), PixelResult::BehindCamera);
            }
        }
    }

    #[test]
    fn rigid_transform_invariance() {
        let (k, pose) = default_rig();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let p = Point3::new(
                rng.random_range(0.5..3.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-0.5..0.5),
            );
            // Apply the same rigid transform to both the point and the camera.
            let g = Pose6D::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let gp = g.transform_point(&p);
            let r_wc2 = g.rotation().matrix() * pose.rotation_cw().transpose();
            let moved_center = g.transform_point(&pose.center());
            let r_cw2 = r_wc2.transpose();
            let pose2 =
                CameraPose::from_parts(r_cw2, -r_cw2 * moved_center.coords, 0.0).unwrap();
            let a = project(&p, &k, &pose);
            let b = project(&gp, &k, &pose2);
            match (a, b) {
                (
                    PixelResult::InFrame { u: u1, v: v1 },
                    PixelResult::InFrame { u: u2, v: v2 },
                ) => {
                    assert!((u1 - u2).abs() < 1e-9 && (v1 - v2).abs() < 1e-9);
                }
                (x, y) => assert_eq!(x, y),
            }
        }
    }

    #[test]
    fn zero_jitter_returns_nominals() {
        let traj = CameraTrajectory::forward_walk(-1.0, 1.0, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let poses = trajectory_poses(&traj, &JitterConfig::zero(), &mut rng).unwrap();
        assert_eq!(poses.len(), 5);
        for (i, p) in poses.iter().enumerate() {
            let x = -1.0 + 2.0 * i as f64 / 4.0;
            assert_relative_eq!(p.center().x, x, epsilon = 1e-12);
            assert_relative_eq!(p.center().z, 0.325, epsilon = 1e-12);
        }
    }

    #[test]
    fn jitter_determinism_and_mean() {
        let traj = CameraTrajectory::forward_walk(0.0, 0.0, 1);
        let jitter = JitterConfig::default();
        let one = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            trajectory_poses(&traj, &jitter, &mut rng).unwrap()[0].center()
        };
        assert_eq!(one(9), one(9));
        // Law of large numbers: the mean of 10,000 jittered z samples stays
        // within 3 sigma / 100 of the nominal height.
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let mut sum = 0.0;
        let n = 10_000;
        for _ in 0..n {
            sum += trajectory_poses(&traj, &jitter, &mut rng).unwrap()[0].center().z;
        }
        let mean = sum / n as f64;
        assert!((mean - 0.325).abs() < 3.0 * jitter.sigma_z / 100.0);
    }

    #[test]
    fn frame_meta_round_trip() {
        let (k, pose) = default_rig();
        let meta = FrameMeta::new(&k, &pose);
        let k2 = meta.intrinsics().unwrap();
        let p2 = meta.pose().unwrap();
        assert_eq!(k, k2);
        assert!((p2.rotation_cw() - pose.rotation_cw()).norm() < 1e-15);
        assert!((p2.translation_cw() - pose.translation_cw()).norm() < 1e-15);
    }

    #[test]
    fn trajectory_validation() {
        let mut traj = CameraTrajectory::forward_walk(0.0, 1.0, 5);
        traj.waypoints[1].time = 0.0;
        assert!(matches!(
            trajectory_poses(&traj, &JitterConfig::zero(), &mut ChaCha8Rng::seed_from_u64(0)),
            Err(CameraError::NonMonotoneTimestamps)
        ));
    }
}
