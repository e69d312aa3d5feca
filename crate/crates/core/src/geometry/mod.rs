//! Primitive shapes, steppability labels, and scene assembly.
//!
//! Scenes are built from nine primitive shape classes placed on support
//! surfaces (the floor or the flat top of another primitive). Every triangle
//! of every tessellated primitive carries one of three steppability labels,
//! assigned by a per-class policy parameterized on the maximum leg swing
//! height `h_max`.

mod labels;
mod mesh;
mod preset;
mod scene;

pub use labels::assign_labels;
pub use mesh::{tessellate, FaceKind, LabeledMesh};
pub use preset::{preset_scene, preset_start, PresetKind};
pub use scene::{
    assemble_scene, spawn_obstacle, support_height_at, validate_scene, ManualEntry, PlacementMode,
    Scene, SceneConfig, SceneDoc,
};

use nalgebra::{Point3, Rotation3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Default tessellation resolution: facets per full revolution for curved
/// shapes.
pub const DEFAULT_RESOLUTION: u32 = 16;

/// Fixed floor extent, meters (square, centered on the origin).
pub const FLOOR_EXTENT: f64 = 4.0;

/// Per-face terrain label.
///
/// `Steppable` supports a stable foothold, `Passable` cannot but a swing
/// trajectory may cross it, `NonPassable` is neither.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteppabilityLabel {
    Steppable,
    Passable,
    NonPassable,
}

/// The nine primitive shape classes scenes are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeClass {
    Cuboid,
    Cylinder,
    Ramp,
    Sphere,
    Semisphere,
    Pipe,
    Pole,
    Tube,
    Floor,
}

impl ShapeClass {
    pub const ALL: [ShapeClass; 9] = [
        ShapeClass::Cuboid,
        ShapeClass::Cylinder,
        ShapeClass::Ramp,
        ShapeClass::Sphere,
        ShapeClass::Semisphere,
        ShapeClass::Pipe,
        ShapeClass::Pole,
        ShapeClass::Tube,
        ShapeClass::Floor,
    ];

    /// Classes whose label policy keeps the top face steppable; their
    /// placement must keep roll = pitch = 0.
    pub fn is_flat_topped(self) -> bool {
        matches!(
            self,
            ShapeClass::Cuboid | ShapeClass::Cylinder | ShapeClass::Ramp | ShapeClass::Floor
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ShapeClass::Cuboid => "cuboid",
            ShapeClass::Cylinder => "cylinder",
            ShapeClass::Ramp => "ramp",
            ShapeClass::Sphere => "sphere",
            ShapeClass::Semisphere => "semisphere",
            ShapeClass::Pipe => "pipe",
            ShapeClass::Pole => "pole",
            ShapeClass::Tube => "tube",
            ShapeClass::Floor => "floor",
        }
    }
}

impl std::str::FromStr for ShapeClass {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ShapeClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| GeometryError::UnknownClass(s.to_string()))
    }
}

/// Class-dependent shape parameters, meters.
///
/// Variants are shared across classes with identical parameterizations
/// (Cuboid/Ramp, Pipe/Pole/Tube, Sphere/Semisphere); the owning
/// [`PrimitiveInstance`] carries the class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrimitiveParams {
    /// Cuboid and Ramp: length (x), width (y), height (z).
    Box {
        l: f64,
        w: f64,
        h: f64,
    },
    /// Cylinder: elliptic cross-section radii and height.
    Elliptic {
        rx: f64,
        ry: f64,
        h: f64,
    },
    /// Pipe, Pole, Tube: rod of length `l` lying along its local x axis.
    Rod {
        l: f64,
        r: f64,
    },
    /// Sphere and Semisphere.
    Round {
        r: f64,
    },
    /// Floor: fixed 4 m x 4 m, no parameters.
    Floor {},
}

/// Inclusive parameter ranges per class; `None` for Floor.
pub fn param_ranges(class: ShapeClass) -> Option<&'static [(&'static str, f64, f64)]> {
    match class {
        ShapeClass::Cuboid | ShapeClass::Ramp => {
            Some(&[("l", 0.2, 1.0), ("w", 0.1, 0.5), ("h", 0.05, 0.25)])
        }
        ShapeClass::Cylinder => Some(&[("rx", 0.10, 0.50), ("ry", 0.10, 0.50), ("h", 0.05, 0.25)]),
        ShapeClass::Sphere | ShapeClass::Semisphere => Some(&[("r", 0.025, 0.05)]),
        ShapeClass::Pipe | ShapeClass::Pole => Some(&[("l", 0.10, 0.50), ("r", 0.025, 0.05)]),
        ShapeClass::Tube => Some(&[("l", 0.50, 1.0), ("r", 0.025, 0.05)]),
        ShapeClass::Floor => None,
    }
}

impl PrimitiveParams {
    /// Draw parameters uniformly from the class ranges.
    pub fn sample(class: ShapeClass, rng: &mut impl Rng) -> PrimitiveParams {
        let mut draw = |lo: f64, hi: f64| rng.random_range(lo..=hi);
        match class {
            ShapeClass::Cuboid | ShapeClass::Ramp => PrimitiveParams::Box {
                l: draw(0.2, 1.0),
                w: draw(0.1, 0.5),
                h: draw(0.05, 0.25),
            },
            ShapeClass::Cylinder => PrimitiveParams::Elliptic {
                rx: draw(0.10, 0.50),
                ry: draw(0.10, 0.50),
                h: draw(0.05, 0.25),
            },
            ShapeClass::Sphere | ShapeClass::Semisphere => PrimitiveParams::Round {
                r: draw(0.025, 0.05),
            },
            ShapeClass::Pipe | ShapeClass::Pole => PrimitiveParams::Rod {
                l: draw(0.10, 0.50),
                r: draw(0.025, 0.05),
            },
            ShapeClass::Tube => PrimitiveParams::Rod {
                l: draw(0.50, 1.0),
                r: draw(0.025, 0.05),
            },
            ShapeClass::Floor => PrimitiveParams::Floor {},
        }
    }

    /// All dimensions strictly positive and the variant matches the class.
    pub fn validate(&self, class: ShapeClass) -> Result<(), GeometryError> {
        let ok = match (class, self) {
            (ShapeClass::Cuboid | ShapeClass::Ramp, PrimitiveParams::Box { l, w, h }) => {
                *l > 0.0 && *w > 0.0 && *h > 0.0
            }
            (ShapeClass::Cylinder, PrimitiveParams::Elliptic { rx, ry, h }) => {
                *rx > 0.0 && *ry > 0.0 && *h > 0.0
            }
            (ShapeClass::Sphere | ShapeClass::Semisphere, PrimitiveParams::Round { r }) => *r > 0.0,
            (
                ShapeClass::Pipe | ShapeClass::Pole | ShapeClass::Tube,
                PrimitiveParams::Rod { l, r },
            ) => *l > 0.0 && *r > 0.0,
            (ShapeClass::Floor, PrimitiveParams::Floor {}) => true,
            _ => {
                return Err(GeometryError::ParamClassMismatch(class));
            }
        };
        if ok {
            Ok(())
        } else {
            Err(GeometryError::DegenerateParams(class))
        }
    }
}

/// Wrap an angle into `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    let t = a.rem_euclid(TAU);
    if t > PI {
        t - TAU
    } else {
        t
    }
}

/// A six-dimensional pose: position in meters, orientation as intrinsic
/// yaw-pitch-roll (rotations about the world z, then y, then x axes).
///
/// The world frame is x forward, y left, z up; positive pitch tilts the
/// body's forward axis downward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose6D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl Pose6D {
    pub fn new(x: f64, y: f64, z: f64, roll: f64, pitch: f64, yaw: f64) -> Pose6D {
        Pose6D {
            x,
            y,
            z,
            roll: normalize_angle(roll),
            pitch: normalize_angle(pitch),
            yaw: normalize_angle(yaw),
        }
    }

    pub fn at(x: f64, y: f64, z: f64) -> Pose6D {
        Pose6D::new(x, y, z, 0.0, 0.0, 0.0)
    }

    pub fn origin() -> Pose6D {
        Pose6D::at(0.0, 0.0, 0.0)
    }

    pub fn translation(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_euler_angles(self.roll, self.pitch, self.yaw)
    }

    pub fn transform_point(&self, p: &Point3<f64>) -> Point3<f64> {
        self.rotation() * p + self.translation()
    }

    /// Angles already normalized to `(-pi, pi]`.
    pub fn is_normalized(&self) -> bool {
        [self.roll, self.pitch, self.yaw]
            .iter()
            .all(|a| *a > -PI - 1e-12 && *a <= PI + 1e-12)
    }
}

/// Identifier of a primitive within a scene.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct PrimitiveId(pub u64);

impl std::fmt::Display for PrimitiveId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One placed shape: the atomic scene element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveInstance {
    pub id: PrimitiveId,
    pub class: ShapeClass,
    pub params: PrimitiveParams,
    pub pose: Pose6D,
    /// True for intended support objects the planner may enumerate footholds
    /// on; false for obstacles, whose poses the planner never sees.
    pub known_to_planner: bool,
}

impl PrimitiveInstance {
    pub fn new(
        id: u64,
        class: ShapeClass,
        params: PrimitiveParams,
        pose: Pose6D,
        known_to_planner: bool,
    ) -> PrimitiveInstance {
        PrimitiveInstance {
            id: PrimitiveId(id),
            class,
            params,
            pose,
            known_to_planner,
        }
    }
}

/// Label policy configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelPolicyConfig {
    /// Maximum leg swing height, meters. Obstacles taller than this cannot be
    /// stepped over.
    pub h_max: f64,
}

impl Default for LabelPolicyConfig {
    fn default() -> Self {
        LabelPolicyConfig { h_max: 0.10 }
    }
}

impl LabelPolicyConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.h_max > 0.0 {
            Ok(())
        } else {
            Err(GeometryError::InvalidPolicy(self.h_max))
        }
    }
}

/// Spherical goal region for planning and navigation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalRegion {
    pub center: [f64; 3],
    pub radius: f64,
}

impl GoalRegion {
    pub fn new(center: [f64; 3], radius: f64) -> GoalRegion {
        GoalRegion { center, radius }
    }

    pub fn center_point(&self) -> Point3<f64> {
        Point3::new(self.center[0], self.center[1], self.center[2])
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        (p - self.center_point()).norm() <= self.radius
    }
}

/// Scene environment kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Environment {
    /// Four walls and a ceiling enclose the floor.
    Indoor,
    /// Open horizon: rays that miss geometry hit nothing.
    Outdoor,
}

/// Sample a primitive of the given class with uniformly drawn parameters.
///
/// The pose is left at the origin for later placement. `Floor` is created by
/// scene assembly, never sampled.
pub fn sample_primitive(
    class: ShapeClass,
    id: u64,
    rng: &mut impl Rng,
) -> Result<PrimitiveInstance, GeometryError> {
    if class == ShapeClass::Floor {
        return Err(GeometryError::FloorNotSampled);
    }
    let params = PrimitiveParams::sample(class, rng);
    Ok(PrimitiveInstance::new(
        id,
        class,
        params,
        Pose6D::origin(),
        class.is_flat_topped(),
    ))
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("unknown shape class `{0}`")]
    UnknownClass(String),
    #[error("floor instances are created by scene assembly, not sampled")]
    FloorNotSampled,
    #[error("degenerate parameters for {0:?}: all dimensions must be positive")]
    DegenerateParams(ShapeClass),
    #[error("parameter variant does not match class {0:?}")]
    ParamClassMismatch(ShapeClass),
    #[error("tessellation resolution {0} too low; curved classes need >= 8")]
    ResolutionTooLow(u32),
    #[error("h_max must be positive, got {0}")]
    InvalidPolicy(f64),
    #[error("primitive {id} violates the support constraint: {detail}")]
    SupportViolation { id: PrimitiveId, detail: String },
    #[error("primitive {id} interpenetrates primitive {other}")]
    Interpenetration { id: PrimitiveId, other: PrimitiveId },
    #[error("primitive {id}: {class:?} must keep roll = pitch = 0")]
    TiltedFlatTop { id: PrimitiveId, class: ShapeClass },
    #[error("duplicate primitive id {0}")]
    DuplicateId(PrimitiveId),
    #[error("scene validation failed: {0}")]
    Invalid(String),
}
