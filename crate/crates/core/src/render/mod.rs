//! Raycast rendering of depth images and steppability masks.
//!
//! The renderer is the ground-truth stand-in for a learned segmentation
//! model: it knows the per-face labels, so the mask it produces is exact.
//! Externally produced masks (e.g. network predictions) can be loaded from
//! the same indexed-PNG format and used anywhere a rendered mask is.

mod bvh;
mod dataset;
mod mask_io;
mod pfm;

pub use bvh::{ray_triangle, Bvh, Hit, Triangle};
pub use dataset::{export_dataset, DatasetConfig, DatasetManifest, ManifestEntry, Split};
pub use mask_io::{load_mask, write_mask_png, MASK_PALETTE};
pub use pfm::{read_pfm, write_pfm};

use crate::camera::{CameraPose, Intrinsics, PixelResult};
use crate::geometry::{Scene, SteppabilityLabel};
use rand::SeedableRng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Depth value marking rays that hit nothing inside the validity band.
pub const NO_HIT: f32 = f32::INFINITY;

/// Hard lower bound for the configurable near clip, meters.
pub const MIN_NEAR_CLIP: f64 = 0.3;

/// Per-pixel steppability mask value; the numeric value is the PNG palette
/// index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[repr(u8)]
#[serde(rename_all = "snake_case")]
pub enum MaskValue {
    Background = 0,
    Steppable = 1,
    Passable = 2,
    NonPassable = 3,
}

impl MaskValue {
    pub fn from_label(label: SteppabilityLabel) -> MaskValue {
        match label {
            SteppabilityLabel::Steppable => MaskValue::Steppable,
            SteppabilityLabel::Passable => MaskValue::Passable,
            SteppabilityLabel::NonPassable => MaskValue::NonPassable,
        }
    }

    pub fn from_index(i: u8) -> Option<MaskValue> {
        match i {
            0 => Some(MaskValue::Background),
            1 => Some(MaskValue::Steppable),
            2 => Some(MaskValue::Passable),
            3 => Some(MaskValue::NonPassable),
            _ => None,
        }
    }
}

/// Dense depth image, meters; `NO_HIT` where no geometry was hit inside
/// `[min_range, max_range]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f32>,
    pub min_range: f64,
    pub max_range: f64,
}

impl DepthImage {
    pub fn at(&self, u: u32, v: u32) -> f32 {
        self.data[(v * self.width + u) as usize]
    }
}

/// Per-pixel steppability labels paired with a depth image.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMask {
    pub width: u32,
    pub height: u32,
    pub data: Vec<MaskValue>,
}

impl LabelMask {
    pub fn at(&self, u: u32, v: u32) -> MaskValue {
        self.data[(v * self.width + u) as usize]
    }
}

/// One rendered perception unit: depth + mask + the camera that captured it.
#[derive(Debug, Clone)]
pub struct Frame {
    pub depth: DepthImage,
    pub mask: LabelMask,
    pub pose: CameraPose,
    pub intrinsics: Intrinsics,
    pub scene_id: u64,
    pub frame_index: u32,
}

/// Depth validity band and optional sensor noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub min_range: f64,
    pub max_range: f64,
    /// Zero-mean Gaussian depth noise; 0 disables (the default).
    pub depth_noise_sigma: f64,
    pub noise_seed: u64,
}

impl Default for RenderConfig {
    /// The dense-depth validity band of the modeled sensor.
    fn default() -> Self {
        RenderConfig { min_range: 1.0, max_range: 3.0, depth_noise_sigma: 0.0, noise_seed: 0 }
    }
}

impl RenderConfig {
    /// Band used by the navigation stack, where footholds one step ahead
    /// fall well inside a meter.
    pub fn near_field() -> RenderConfig {
        RenderConfig { min_range: MIN_NEAR_CLIP, ..RenderConfig::default() }
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        if self.min_range < MIN_NEAR_CLIP - 1e-12 {
            return Err(RenderError::BadConfig(format!(
                "min_range {} below hard near clip {MIN_NEAR_CLIP}",
                self.min_range
            )));
        }
        if self.max_range <= self.min_range {
            return Err(RenderError::BadConfig("max_range must exceed min_range".into()));
        }
        if self.depth_noise_sigma < 0.0 {
            return Err(RenderError::BadConfig("depth noise sigma must be >= 0".into()));
        }
        Ok(())
    }
}

/// Raycast the scene into a depth image and ground-truth steppability mask.
///
/// Each ray passes through its pixel center. The nearest hit is kept; hits
/// outside the validity band become `NO_HIT`/`Background`, so an obstacle
/// closer than the near clip blanks the pixel rather than exposing what lies
/// behind it.
pub fn raycast_frame(
    scene: &Scene,
    k: &Intrinsics,
    pose: &CameraPose,
    config: &RenderConfig,
) -> Result<Frame, RenderError> {
    config.validate()?;
    k.validate().map_err(|e| RenderError::BadConfig(e.to_string()))?;
    let bvh = Bvh::from_meshes(scene.all_meshes());
    Ok(raycast_with_bvh(scene, &bvh, k, pose, config))
}

/// Raycast against a prebuilt acceleration structure (the scene-version
/// invariant: the BVH must have been built from this scene's meshes).
pub fn raycast_with_bvh(
    scene: &Scene,
    bvh: &Bvh,
    k: &Intrinsics,
    pose: &CameraPose,
    config: &RenderConfig,
) -> Frame {
    let (w, h) = (k.width, k.height);
    let render_row = |v: u32| -> (Vec<f32>, Vec<MaskValue>) {
        let mut drow = vec![NO_HIT; w as usize];
        let mut mrow = vec![MaskValue::Background; w as usize];
        for u in 0..w {
            let (origin, dir) = pose.pixel_ray(u as f64 + 0.5, v as f64 + 0.5, k);
            if let Some(hit) = bvh.intersect(&origin, &dir, 1e-9, config.max_range) {
                if hit.t >= config.min_range {
                    drow[u as usize] = hit.t as f32;
                    mrow[u as usize] = MaskValue::from_label(hit.label);
                }
            }
        }
        (drow, mrow)
    };

    #[cfg(feature = "parallel")]
    let rows: Vec<(Vec<f32>, Vec<MaskValue>)> = {
        use rayon::prelude::*;
        (0..h).into_par_iter().map(render_row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<(Vec<f32>, Vec<MaskValue>)> = (0..h).map(render_row).collect();

    let mut depth = Vec::with_capacity((w * h) as usize);
    let mut mask = Vec::with_capacity((w * h) as usize);
    for (drow, mrow) in rows {
        depth.extend(drow);
        mask.extend(mrow);
    }

    if config.depth_noise_sigma > 0.0 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.noise_seed);
        let normal = rand_distr::Normal::new(0.0, config.depth_noise_sigma).unwrap();
        for (d, m) in depth.iter_mut().zip(mask.iter_mut()) {
            if d.is_finite() {
                let noisy = *d as f64 + normal.sample(&mut rng);
                if noisy < config.min_range || noisy > config.max_range {
                    *d = NO_HIT;
                    *m = MaskValue::Background;
                } else {
                    *d = noisy as f32;
                }
            } else {
                // Burn one draw to keep pixel alignment independent of hits.
                let _ = normal.sample(&mut rng);
            }
        }
    }

    Frame {
        depth: DepthImage {
            width: w,
            height: h,
            data: depth,
            min_range: config.min_range,
            max_range: config.max_range,
        },
        mask: LabelMask { width: w, height: h, data: mask },
        pose: pose.clone(),
        intrinsics: *k,
        scene_id: scene.seed,
        frame_index: 0,
    }
}

/// Result of looking up a projected point in a mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskQuery {
    Steppable,
    Passable,
    NonPassable,
    Background,
    OutOfFrame,
}

/// Label at the pixel a projection landed on; `OutOfFrame` when the
/// projection left the image or the point was behind the camera.
pub fn mask_query(mask: &LabelMask, px: &PixelResult) -> MaskQuery {
    match px {
        PixelResult::OutOfFrame | PixelResult::BehindCamera => MaskQuery::OutOfFrame,
        PixelResult::InFrame { u, v } => {
            let (iu, iv) = (u.floor() as u32, v.floor() as u32);
            match mask.at(iu.min(mask.width - 1), iv.min(mask.height - 1)) {
                MaskValue::Steppable => MaskQuery::Steppable,
                MaskValue::Passable => MaskQuery::Passable,
                MaskValue::NonPassable => MaskQuery::NonPassable,
                MaskValue::Background => MaskQuery::Background,
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid render config: {0}")]
    BadConfig(String),
    #[error("i/o failure at {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("malformed image {path}: {detail}")]
    Malformed {
        path: std::path::PathBuf,
        detail: String,
    },
    #[error("mask {path} uses unknown palette index {index}")]
    UnknownPaletteIndex {
        path: std::path::PathBuf,
        index: u8,
    },
    #[error("mask {path} is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    DimensionMismatch {
        path: std::path::PathBuf,
        got_w: u32,
        got_h: u32,
        want_w: u32,
        want_h: u32,
    },
    #[error("dataset export aborted after {written} files: {detail}")]
    PartialExport { written: usize, detail: String },
}
