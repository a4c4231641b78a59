//! Dataset planning, parallel generation, on-disk layout, statistics and
//! train/validation splits.

mod generate;
mod layout;
mod plan;
mod split;
mod stats;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{generate_dataset, produce_frame, GeneratedFrame, MAX_ATTEMPTS};
pub use layout::{
    hash_tree, image_stem, parse_stem, ImageEntry, InstanceEntry, Manifest, RigEntry, StemInfo,
    MANIFEST_PATH, SUMMARY_PATH,
};
pub use plan::{
    default_val_fraction, largest_remainder, plan_dataset, CompositionTarget, DatasetPlan,
    FrameSpec, PlanProfile, RigConfig, LAYOUT_VERSION, MIN_TOTAL, NON_VFX_SCENES, REFERENCE_SPLIT,
    SUBSET_BUCKETS, VFX_SCENES, WEATHER_BUCKETS,
};
pub use split::{split_dataset, SplitListing};
pub use stats::{
    compute_stats, format_tables, realized_bucket, scan_dataset, summarize, validate_dataset,
    BucketCounts, DatasetSummary, ScannedImage, StatRow, ValidationReport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    NonVfx,
    Vfx,
    Weather,
}

impl Subset {
    pub const ALL: [Subset; 3] = [Subset::NonVfx, Subset::Vfx, Subset::Weather];

    pub fn name(self) -> &'static str {
        match self {
            Subset::NonVfx => "non_vfx",
            Subset::Vfx => "vfx",
            Subset::Weather => "weather",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("invalid targets: {0}")]
    InvalidTargets(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("generation failed for frame {frame} ({target}) after {attempts} attempts: {last}")]
    GenerationFailed {
        frame: u64,
        target: String,
        attempts: usize,
        last: String,
    },
    #[error("invalid layout at {}: {message}", path.display())]
    LayoutInvalid { path: PathBuf, message: String },
    #[error("stratum {stratum} has {count} image(s); at least 2 are needed")]
    EmptyStratum { stratum: String, count: usize },
    #[error(transparent)]
    Camera(#[from] crate::camera::CameraError),
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> DatasetError {
    let path = path.into();
    move |source| DatasetError::Io { path, source }
}
