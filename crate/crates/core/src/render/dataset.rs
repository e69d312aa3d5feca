//! Dataset export: depth PFMs, mask PNGs, camera metadata, and a manifest.

use super::{raycast_with_bvh, write_mask_png, write_pfm, Bvh, RenderConfig, RenderError};
use crate::camera::{trajectory_poses, CameraTrajectory, FrameMeta, Intrinsics, JitterConfig};
use crate::geometry::Scene;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub scene_id: u64,
    pub frame_index: u32,
    pub depth: String,
    pub mask: String,
    pub meta: String,
    pub split: Split,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    /// One JSON object per line, ordered by (scene, frame).
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            s.push_str(&serde_json::to_string(e).expect("manifest entry serializes"));
            s.push('\n');
        }
        s
    }

    pub fn from_jsonl(s: &str) -> Result<DatasetManifest, serde_json::Error> {
        let entries = s
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DatasetManifest { entries })
    }

    pub fn split_scene_counts(&self) -> [usize; 3] {
        let mut scenes: Vec<(u64, Split)> =
            self.entries.iter().map(|e| (e.scene_id, e.split)).collect();
        scenes.sort();
        scenes.dedup();
        let count = |s: Split| scenes.iter().filter(|(_, sp)| *sp == s).count();
        [count(Split::Train), count(Split::Val), count(Split::Test)]
    }
}

#[derive(Debug, Clone)]
pub struct DatasetConfig {
    pub intrinsics: Intrinsics,
    pub trajectory: CameraTrajectory,
    pub jitter: JitterConfig,
    pub render: RenderConfig,
    /// Train/val/test proportions; must sum to 1.
    pub split_ratios: [f64; 3],
    pub seed: u64,
}

/// Render every scene along the trajectory and write the dataset to disk.
///
/// Layout: `depth/s{scene}_f{frame}.pfm`, `mask/s{scene}_f{frame}.png`,
/// `meta/s{scene}_f{frame}.json`, plus `manifest.jsonl` at the root. Split
/// assignment is by scene: all frames of a scene share a split.
pub fn export_dataset(
    scenes: &[Scene],
    config: &DatasetConfig,
    out_dir: &Path,
) -> Result<DatasetManifest, RenderError> {
    config.render.validate()?;
    let r = config.split_ratios;
    if r.iter().any(|x| *x < 0.0) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(RenderError::BadConfig(format!("split ratios {r:?} must sum to 1")));
    }
    let mut written = 0usize;
    let abort = |written: usize, e: RenderError| RenderError::PartialExport {
        written,
        detail: e.to_string(),
    };

    let splits = assign_splits(scenes.len(), r, config.seed);
    let mkdir = |p: PathBuf| -> Result<(), RenderError> {
        std::fs::create_dir_all(&p).map_err(|source| RenderError::Io { path: p, source })
    };
    mkdir(out_dir.to_path_buf())?;
    if !scenes.is_empty() {
        for sub in ["depth", "mask", "meta"] {
            mkdir(out_dir.join(sub))?;
        }
    }

    let mut manifest = DatasetManifest::default();
    for (si, scene) in scenes.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(si as u64 + 1);
        let poses = trajectory_poses(&config.trajectory, &config.jitter, &mut rng)
            .map_err(|e| RenderError::BadConfig(e.to_string()))?;
        let bvh = Bvh::from_meshes(scene.all_meshes());
        for (fi, pose) in poses.iter().enumerate() {
            let frame = raycast_with_bvh(scene, &bvh, &config.intrinsics, pose, &config.render);
            let stem = format!("s{si:05}_f{fi:02}");
            let depth_rel = format!("depth/{stem}.pfm");
            let mask_rel = format!("mask/{stem}.png");
            let meta_rel = format!("meta/{stem}.json");
            write_pfm(&frame.depth, &out_dir.join(&depth_rel)).map_err(|e| abort(written, e))?;
            written += 1;
            write_mask_png(&frame.mask, &out_dir.join(&mask_rel)).map_err(|e| abort(written, e))?;
            written += 1;
            let meta = FrameMeta::new(&config.intrinsics, pose);
            let meta_path = out_dir.join(&meta_rel);
            let mut meta_json = serde_json::to_string_pretty(&meta).expect("meta serializes");
            meta_json.push('\n');
            std::fs::write(&meta_path, meta_json)
                .map_err(|source| abort(written, RenderError::Io { path: meta_path, source }))?;
            written += 1;
            manifest.entries.push(ManifestEntry {
                scene_id: si as u64,
                frame_index: fi as u32,
                depth: depth_rel,
                mask: mask_rel,
                meta: meta_rel,
                split: splits[si],
            });
        }
    }
    let manifest_path = out_dir.join("manifest.jsonl");
    std::fs::write(&manifest_path, manifest.to_jsonl())
        .map_err(|source| abort(written, RenderError::Io { path: manifest_path, source }))?;
    Ok(manifest)
}

/// Deterministic by-scene split: shuffle scene indices with the seeded
/// stream, then cut at the rounded ratio boundaries.
fn assign_splits(n: usize, ratios: [f64; 3], seed: u64) -> Vec<Split> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    // Fisher-Yates.
    for i in (1..n).rev() {
        let j = rand::Rng::random_range(&mut rng, 0..=i);
        order.swap(i, j);
    }
    let n_train = (ratios[0] * n as f64).round() as usize;
    let n_val = ((ratios[1] * n as f64).round() as usize).min(n - n_train.min(n));
    let mut splits = vec![Split::Test; n];
    for (rank, &scene) in order.iter().enumerate() {
        splits[scene] = if rank < n_train {
            Split::Train
        } else if rank < n_train + n_val {
            Split::Val
        } else {
            Split::Test
        };
    }
    splits
}
