//! Composition planning: how many frames of each subset, content bucket,
//! scene and weather condition to generate.

use serde::{Deserialize, Serialize};

use super::{DatasetError, Subset};
use crate::camera::{build_rig, CameraError, Rig, DEFAULT_RIG_HEIGHT};
use crate::rng::frame_seed;
use crate::scene::{
    ContentBucket, ProfileId, WeatherCondition, WeatherParams, FOG_GRID_PERCENT, SNOW_GRID_PERCENT,
};

pub const LAYOUT_VERSION: u32 = 1;

/// Reference subset × bucket image counts (drone only, bird only, both).
pub const SUBSET_BUCKETS: [[u64; 3]; 3] = [
    [32_366, 48_097, 32_436],
    [46_086, 0, 0],
    [7_114, 2_939, 9_601],
];
/// Reference scene counts in [`ProfileId::ALL`] order, Non-VFX subset.
pub const NON_VFX_SCENES: [u64; 7] = [5_353, 21_361, 13_221, 4_918, 35_556, 32_490, 0];
/// Reference scene counts in [`ProfileId::ALL`] order, VFX subset.
pub const VFX_SCENES: [u64; 7] = [3_331, 3_364, 4_870, 12_741, 8_531, 0, 13_249];
/// Reference weather counts: fog, snow, other × drone only, bird only, both.
pub const WEATHER_BUCKETS: [[u64; 3]; 3] = [
    [3_163, 1_926, 5_121],
    [3_047, 865, 2_830],
    [904, 148, 1_650],
];
/// Train/validation sizes of the reference split.
pub const REFERENCE_SPLIT: (u64, u64) = (46_622, 6_461);

pub const MIN_TOTAL: u64 = 10;

pub fn default_val_fraction() -> f64 {
    REFERENCE_SPLIT.1 as f64 / (REFERENCE_SPLIT.0 + REFERENCE_SPLIT.1) as f64
}

const PLAIN_BUCKETS: [ContentBucket; 3] = [
    ContentBucket::DroneOnly,
    ContentBucket::BirdOnly,
    ContentBucket::Both,
];

/// Hamilton apportionment of `total` proportionally to `weights`. Remainders
/// are compared exactly; ties go to the lower index.
pub fn largest_remainder(weights: &[u64], total: u64) -> Vec<u64> {
    let sum: u128 = weights.iter().map(|&w| u128::from(w)).sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let t = u128::from(total);
    let mut out: Vec<u64> = weights
        .iter()
        .map(|&w| (u128::from(w) * t / sum) as u64)
        .collect();
    let mut order: Vec<(u128, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| (u128::from(w) * t % sum, i))
        .collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let left = total - out.iter().sum::<u64>();
    for &(_, i) in order.iter().take(left as usize) {
        out[i] += 1;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanProfile {
    /// Proportions of the reference dataset composition.
    Reference,
    Custom,
}

impl PlanProfile {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "reference" => Some(Self::Reference),
            "custom" => Some(Self::Custom),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionTarget {
    pub subset: Subset,
    pub bucket: ContentBucket,
    pub scene: ProfileId,
    pub condition: WeatherParams,
    pub count: u64,
}

impl CompositionTarget {
    pub fn validate(&self) -> Result<(), String> {
        let vfx_bucket = self.bucket == ContentBucket::VfxDrone;
        if (self.subset == Subset::Vfx) != vfx_bucket {
            return Err(format!(
                "{} subset cannot use bucket {}",
                self.subset.name(),
                self.bucket.name()
            ));
        }
        let clear = self.condition == WeatherParams::Clear;
        if (self.subset == Subset::Weather) == clear {
            return Err(format!(
                "{} subset cannot use condition {}",
                self.subset.name(),
                self.condition.token()
            ));
        }
        self.condition.validate()
    }

    pub fn describe(&self) -> String {
        format!(
            "{}/{}/{}/{}",
            self.subset.name(),
            self.bucket.name(),
            self.scene.name(),
            self.condition.token()
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigConfig {
    pub cameras: usize,
    pub hfov_deg: f64,
    pub height: f64,
    pub elevation_deg: f64,
}

impl Default for RigConfig {
    fn default() -> Self {
        Self {
            cameras: 6,
            hfov_deg: 60.0,
            height: DEFAULT_RIG_HEIGHT,
            elevation_deg: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetPlan {
    pub profile: PlanProfile,
    pub total: u64,
    pub targets: Vec<CompositionTarget>,
    pub rig: RigConfig,
    pub width: u32,
    pub height: u32,
    pub master_seed: u64,
    pub layout_version: u32,
    pub write_masks: bool,
    pub write_depth: bool,
}

/// One planned image.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub index: u64,
    pub target: usize,
    pub subset: Subset,
    pub bucket: ContentBucket,
    pub scene: ProfileId,
    pub condition: WeatherParams,
    pub camera: usize,
    pub seed: u64,
    /// Clear frame whose layout this weather frame repeats.
    pub paired_with: Option<u64>,
}

impl DatasetPlan {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_resolution(mut self, width: u32, height: u32) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    pub fn build_rig(&self) -> Result<Rig, CameraError> {
        let pos = nalgebra::Point3::new(0.0, 0.0, self.rig.height);
        let rig = build_rig(
            self.rig.cameras,
            self.rig.hfov_deg.to_radians(),
            self.width,
            self.height,
            pos,
        )?;
        Ok(rig.with_elevation(self.rig.elevation_deg.to_radians()))
    }

    pub fn count(&self, f: impl Fn(&CompositionTarget) -> bool) -> u64 {
        self.targets.iter().filter(|t| f(t)).map(|t| t.count).sum()
    }

    pub fn subset_total(&self, subset: Subset) -> u64 {
        self.count(|t| t.subset == subset)
    }

    pub fn condition_total(&self, condition: WeatherCondition) -> u64 {
        self.count(|t| t.subset == Subset::Weather && t.condition.condition() == condition)
    }

    /// Expands targets into frames in target order.
    ///
    /// Seeds are a hash of the master seed and frame index; cameras are
    /// assigned round-robin. Weather frames take the seed and camera of a
    /// clear Non-VFX frame with the same bucket and scene, cycling through
    /// the candidates, so their layouts and labels match that frame.
    pub fn frames(&self) -> Vec<FrameSpec> {
        let cams = self.rig.cameras.max(1) as u64;
        let mut frames = Vec::with_capacity(self.total as usize);
        for (ti, t) in self.targets.iter().enumerate() {
            for _ in 0..t.count {
                let index = frames.len() as u64;
                frames.push(FrameSpec {
                    index,
                    target: ti,
                    subset: t.subset,
                    bucket: t.bucket,
                    scene: t.scene,
                    condition: t.condition,
                    camera: (index % cams) as usize,
                    seed: frame_seed(self.master_seed, index),
                    paired_with: None,
                });
            }
        }
        let mut clear: std::collections::BTreeMap<(ContentBucket, ProfileId), Vec<usize>> =
            Default::default();
        for (i, f) in frames.iter().enumerate() {
            if f.subset == Subset::NonVfx {
                clear.entry((f.bucket, f.scene)).or_default().push(i);
            }
        }
        let mut cursor: std::collections::BTreeMap<(ContentBucket, ProfileId), usize> =
            Default::default();
        for i in 0..frames.len() {
            if frames[i].subset != Subset::Weather {
                continue;
            }
            let key = (frames[i].bucket, frames[i].scene);
            if let Some(candidates) = clear.get(&key) {
                let k = cursor.entry(key).or_default();
                let src = frames[candidates[*k % candidates.len()]];
                *k += 1;
                frames[i].seed = src.seed;
                frames[i].camera = src.camera;
                frames[i].paired_with = Some(src.index);
            }
        }
        frames
    }
}

fn push(
    targets: &mut Vec<CompositionTarget>,
    subset: Subset,
    bucket: ContentBucket,
    scene: ProfileId,
    condition: WeatherParams,
    count: u64,
) {
    if count > 0 {
        targets.push(CompositionTarget {
            subset,
            bucket,
            scene,
            condition,
            count,
        });
    }
}

fn reference_targets(total: u64) -> Vec<CompositionTarget> {
    let subset_sizes: Vec<u64> = SUBSET_BUCKETS.iter().map(|r| r.iter().sum()).collect();
    let totals = largest_remainder(&subset_sizes, total);
    let mut targets = Vec::new();

    // Non-VFX: bucket and scene margins are apportioned independently, then
    // the bucket × scene table is filled row by row against the remaining
    // scene counts, which keeps both margins exact.
    let buckets = largest_remainder(&SUBSET_BUCKETS[0], totals[0]);
    let mut scenes_left = largest_remainder(&NON_VFX_SCENES, totals[0]);
    for (bi, &b) in PLAIN_BUCKETS.iter().enumerate() {
        let row = largest_remainder(&scenes_left, buckets[bi]);
        for (si, &n) in row.iter().enumerate() {
            scenes_left[si] -= n;
            push(
                &mut targets,
                Subset::NonVfx,
                b,
                ProfileId::ALL[si],
                WeatherParams::Clear,
                n,
            );
        }
    }

    for (si, &n) in largest_remainder(&VFX_SCENES, totals[1]).iter().enumerate() {
        push(
            &mut targets,
            Subset::Vfx,
            ContentBucket::VfxDrone,
            ProfileId::ALL[si],
            WeatherParams::Clear,
            n,
        );
    }

    // Weather: condition × bucket cells, then scenes in Non-VFX proportions,
    // then an even spread over the severity grid.
    let flat: Vec<u64> = WEATHER_BUCKETS.iter().flatten().copied().collect();
    let cells = largest_remainder(&flat, totals[2]);
    let other_grid: Vec<WeatherParams> = FOG_GRID_PERCENT
        .iter()
        .flat_map(|&f| {
            SNOW_GRID_PERCENT
                .iter()
                .map(move |&s| WeatherParams::other_percent(f, s))
        })
        .collect();
    let levels: [Vec<WeatherParams>; 3] = [
        FOG_GRID_PERCENT
            .iter()
            .map(|&p| WeatherParams::fog_percent(p))
            .collect(),
        SNOW_GRID_PERCENT
            .iter()
            .map(|&p| WeatherParams::snow_percent(p))
            .collect(),
        other_grid,
    ];
    for (ci, lv) in levels.iter().enumerate() {
        for (bi, &b) in PLAIN_BUCKETS.iter().enumerate() {
            let per_scene = largest_remainder(&NON_VFX_SCENES, cells[ci * 3 + bi]);
            for (si, &n) in per_scene.iter().enumerate() {
                let per_level = largest_remainder(&vec![1; lv.len()], n);
                for (li, &m) in per_level.iter().enumerate() {
                    push(
                        &mut targets,
                        Subset::Weather,
                        b,
                        ProfileId::ALL[si],
                        lv[li],
                        m,
                    );
                }
            }
        }
    }
    targets
}

/// Builds a plan of `total` images. `Reference` scales the reference
/// composition; `Custom` checks and adopts `custom`.
pub fn plan_dataset(
    total: u64,
    profile: PlanProfile,
    custom: Option<Vec<CompositionTarget>>,
) -> Result<DatasetPlan, DatasetError> {
    if total < MIN_TOTAL {
        return Err(DatasetError::InvalidTargets(format!(
            "total {total} is below the minimum of {MIN_TOTAL}"
        )));
    }
    let targets = match profile {
        PlanProfile::Reference => reference_targets(total),
        PlanProfile::Custom => {
            let targets = custom.ok_or_else(|| {
                DatasetError::InvalidTargets("custom profile needs targets".into())
            })?;
            for t in &targets {
                t.validate()
                    .map_err(|e| DatasetError::InvalidTargets(format!("{}: {e}", t.describe())))?;
            }
            let sum: u64 = targets.iter().map(|t| t.count).sum();
            if sum != total {
                return Err(DatasetError::InvalidTargets(format!(
                    "targets sum to {sum}, expected {total}"
                )));
            }
            targets
        }
    };
    Ok(DatasetPlan {
        profile,
        total,
        targets,
        rig: RigConfig::default(),
        width: 1920,
        height: 1080,
        master_seed: 0,
        layout_version: LAYOUT_VERSION,
        write_masks: false,
        write_depth: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apportionment_small_cases() {
        assert_eq!(largest_remainder(&[1, 1, 1], 10), vec![4, 3, 3]);
        assert_eq!(largest_remainder(&[0, 5], 3), vec![0, 3]);
        assert_eq!(largest_remainder(&[0, 0], 3), vec![0, 0]);
    }

    #[test]
    fn margins_survive_the_table_fill() {
        let plan = plan_dataset(1000, PlanProfile::Reference, None).unwrap();
        let nv = plan.subset_total(Subset::NonVfx);
        let scenes = largest_remainder(&NON_VFX_SCENES, nv);
        for (si, &s) in ProfileId::ALL.iter().enumerate() {
            assert_eq!(
                plan.count(|t| t.subset == Subset::NonVfx && t.scene == s),
                scenes[si]
            );
        }
        assert_eq!(
            plan.count(|t| t.subset == Subset::NonVfx && t.scene == ProfileId::RuralTerrain),
            0
        );
        assert_eq!(
            plan.count(|t| t.subset == Subset::Vfx && t.scene == ProfileId::BridgeWater),
            0
        );
    }

    #[test]
    fn weather_frames_pair_with_clear_frames() {
        let plan = plan_dataset(300, PlanProfile::Reference, None)
            .unwrap()
            .with_seed(4);
        let frames = plan.frames();
        assert_eq!(frames.len(), 300);
        for f in frames.iter().filter(|f| f.subset == Subset::Weather) {
            let src = frames[f.paired_with.expect("paired") as usize];
            assert_eq!(
                (src.subset, src.bucket, src.scene),
                (Subset::NonVfx, f.bucket, f.scene)
            );
            assert_eq!((src.seed, src.camera), (f.seed, f.camera));
        }
    }

    #[test]
    fn custom_targets_are_checked() {
        let bad = CompositionTarget {
            subset: Subset::Vfx,
            bucket: ContentBucket::BirdOnly,
            scene: ProfileId::Park,
            condition: WeatherParams::Clear,
            count: 10,
        };
        assert!(matches!(
            plan_dataset(10, PlanProfile::Custom, Some(vec![bad])),
            Err(DatasetError::InvalidTargets(_))
        ));
        let ok = CompositionTarget {
            bucket: ContentBucket::VfxDrone,
            ..bad
        };
        assert!(plan_dataset(10, PlanProfile::Custom, Some(vec![ok])).is_ok());
        assert!(plan_dataset(11, PlanProfile::Custom, Some(vec![ok])).is_err());
        assert!(plan_dataset(9, PlanProfile::Reference, None).is_err());
    }
}
