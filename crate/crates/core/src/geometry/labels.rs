//! Per-class steppability label policy.

use super::mesh::{FaceKind, LabeledMesh};
use super::{LabelPolicyConfig, PrimitiveInstance, PrimitiveParams, ShapeClass, SteppabilityLabel};

/// Assign a steppability label to every face of the mesh.
///
/// Flat-topped classes (Cuboid, Ramp, Cylinder) get a `Steppable` top face;
/// their remaining faces are `NonPassable` when the shape height exceeds
/// `h_max` and `Passable` otherwise. Spheres block when their diameter
/// exceeds `h_max`, semispheres when their radius does. Rod classes (Pipe,
/// Pole, Tube) block when the z of their pose — the height of whatever they
/// rest on — exceeds `h_max`. Floors are steppable everywhere.
pub fn assign_labels(
    mut mesh: LabeledMesh,
    instance: &PrimitiveInstance,
    policy: &LabelPolicyConfig,
) -> LabeledMesh {
    let h_max = policy.h_max;
    let whole = |blocked: bool| {
        if blocked {
            SteppabilityLabel::NonPassable
        } else {
            SteppabilityLabel::Passable
        }
    };
    mesh.face_labels = match (instance.class, instance.params) {
        (ShapeClass::Floor, _) => vec![SteppabilityLabel::Steppable; mesh.triangles.len()],
        (ShapeClass::Cuboid | ShapeClass::Ramp, PrimitiveParams::Box { h, .. })
        | (ShapeClass::Cylinder, PrimitiveParams::Elliptic { h, .. }) => {
            let side = whole(h > h_max);
            mesh.face_kinds
                .iter()
                .map(|k| match k {
                    FaceKind::Top => SteppabilityLabel::Steppable,
                    _ => side,
                })
                .collect()
        }
        (ShapeClass::Sphere, PrimitiveParams::Round { r }) => {
            vec![whole(2.0 * r > h_max); mesh.triangles.len()]
        }
        (ShapeClass::Semisphere, PrimitiveParams::Round { r }) => {
            vec![whole(r > h_max); mesh.triangles.len()]
        }
        (ShapeClass::Pipe | ShapeClass::Pole | ShapeClass::Tube, _) => {
            vec![whole(instance.pose.z > h_max); mesh.triangles.len()]
        }
        _ => vec![SteppabilityLabel::NonPassable; mesh.triangles.len()],
    };
    mesh
}
