//! File naming, manifest records and directory hashing.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{io_err, DatasetError, DatasetPlan, Subset};
use crate::scene::{ClassId, ContentBucket, ProfileId, WeatherParams};

pub const MANIFEST_PATH: &str = "meta/manifest.json";
pub const SUMMARY_PATH: &str = "meta/summary.json";

/// `{scene}_{subset}_{condition}{severity}_{frame:06}_cam{i}`
pub fn image_stem(
    scene: ProfileId,
    subset: Subset,
    condition: &WeatherParams,
    frame: u64,
    camera: usize,
) -> String {
    format!(
        "{}_{}_{}_{:06}_cam{}",
        scene.name(),
        subset.name(),
        condition.token(),
        frame,
        camera
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StemInfo {
    pub scene: ProfileId,
    pub subset: Subset,
    pub condition: WeatherParams,
    pub frame: u64,
    pub camera: usize,
}

pub fn parse_stem(stem: &str) -> Option<StemInfo> {
    let (rest, cam) = stem.rsplit_once("_cam")?;
    let camera = cam.parse().ok()?;
    let (rest, frame) = rest.rsplit_once('_')?;
    if frame.len() < 6 {
        return None;
    }
    let frame = frame.parse().ok()?;
    let (rest, token) = rest.rsplit_once('_')?;
    let condition = WeatherParams::from_token(token)?;
    // "non_vfx" also ends in "_vfx", so try it first
    let (scene, subset) = [Subset::NonVfx, Subset::Vfx, Subset::Weather]
        .into_iter()
        .find_map(|s| {
            rest.strip_suffix(&format!("_{}", s.name()))
                .map(|scene| (scene, s))
        })?;
    Some(StemInfo {
        scene: ProfileId::from_name(scene)?,
        subset,
        condition,
        frame,
        camera,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigEntry {
    pub index: usize,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub hfov_deg: f64,
    pub focal_px: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceEntry {
    pub instance_id: u32,
    pub class: ClassId,
    pub asset_id: u32,
    /// Labelled components; 0 when filtered out, above 1 when split by occlusion.
    pub fragments: usize,
    pub visible_pixels: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageEntry {
    pub stem: String,
    pub frame_index: u64,
    pub subset: Subset,
    pub bucket: ContentBucket,
    pub scene: ProfileId,
    pub condition: WeatherParams,
    pub camera: usize,
    pub base_seed: u64,
    /// Seed of the accepted sampling attempt.
    pub seed: u64,
    pub attempts: usize,
    pub paired_with: Option<u64>,
    pub labels: usize,
    pub drones: usize,
    pub birds: usize,
    pub dropped_components: usize,
    pub flock_particles: usize,
    pub flock_particles_visible: usize,
    pub instances: Vec<InstanceEntry>,
}

impl ImageEntry {
    pub fn image_path(&self) -> PathBuf {
        PathBuf::from("images")
            .join(self.subset.name())
            .join(format!("{}.png", self.stem))
    }

    pub fn label_path(&self) -> PathBuf {
        PathBuf::from("labels")
            .join(self.subset.name())
            .join(format!("{}.txt", self.stem))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub layout_version: u32,
    pub plan: DatasetPlan,
    pub rig: Vec<RigEntry>,
    pub images: Vec<ImageEntry>,
}

impl Manifest {
    pub fn load(root: &Path) -> Result<Self, DatasetError> {
        let path = root.join(MANIFEST_PATH);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| DatasetError::LayoutInvalid {
            path,
            message: e.to_string(),
        })
    }
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), DatasetError> {
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            out.push(path.strip_prefix(root).expect("under root").to_path_buf());
        }
    }
    Ok(())
}

/// SHA-256 over every file's relative path and content, in sorted path order.
pub fn hash_tree(root: &Path) -> Result<String, DatasetError> {
    let mut files = Vec::new();
    collect_files(root, root, &mut files)?;
    files.sort();
    let mut h = Sha256::new();
    for rel in files {
        let bytes = fs::read(root.join(&rel)).map_err(io_err(root.join(&rel)))?;
        h.update(rel.to_string_lossy().as_bytes());
        h.update([0]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}
