//! Composition statistics recomputed from files, and dataset validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::layout::{parse_stem, Manifest, StemInfo, SUMMARY_PATH};
use super::{io_err, DatasetError, Subset};
use crate::annotation::{
    parse_labels, to_pixel_box, AnnotationRecord, MAX_AREA_FRACTION, MIN_EXTENT_PX,
};
use crate::scene::{ClassId, ContentBucket, ProfileId, WeatherCondition, WeatherParams};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketCounts {
    pub drone_only: u64,
    pub bird_only: u64,
    pub both: u64,
    pub vfx_drone: u64,
    /// Images whose labels match no bucket of their subset.
    pub unrealized: u64,
}

impl BucketCounts {
    fn add(&mut self, bucket: Option<ContentBucket>) {
        match bucket {
            Some(ContentBucket::DroneOnly) => self.drone_only += 1,
            Some(ContentBucket::BirdOnly) => self.bird_only += 1,
            Some(ContentBucket::Both) => self.both += 1,
            Some(ContentBucket::VfxDrone) => self.vfx_drone += 1,
            None => self.unrealized += 1,
        }
    }

    pub fn get(&self, bucket: ContentBucket) -> u64 {
        match bucket {
            ContentBucket::DroneOnly => self.drone_only,
            ContentBucket::BirdOnly => self.bird_only,
            ContentBucket::Both => self.both,
            ContentBucket::VfxDrone => self.vfx_drone,
        }
    }

    pub fn total(&self) -> u64 {
        self.drone_only + self.bird_only + self.both + self.vfx_drone + self.unrealized
    }
}

/// Bucket implied by an image's labels within its subset.
pub fn realized_bucket(subset: Subset, drones: usize, birds: usize) -> Option<ContentBucket> {
    match (subset, drones > 0, birds > 0) {
        (Subset::Vfx, true, false) => Some(ContentBucket::VfxDrone),
        (Subset::Vfx, _, _) => None,
        (_, true, false) => Some(ContentBucket::DroneOnly),
        (_, false, true) => Some(ContentBucket::BirdOnly),
        (_, true, true) => Some(ContentBucket::Both),
        (_, false, false) => None,
    }
}

/// Per-image facts that statistics are built from.
#[derive(Clone, Debug, PartialEq)]
pub struct StatRow {
    pub subset: Subset,
    pub scene: ProfileId,
    pub condition: WeatherParams,
    pub drones: usize,
    pub birds: usize,
    pub max_sides: Vec<u32>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub total: u64,
    pub subsets: BTreeMap<Subset, BucketCounts>,
    pub scenes: BTreeMap<Subset, BTreeMap<ProfileId, u64>>,
    pub conditions: BTreeMap<WeatherCondition, BucketCounts>,
    pub severities: BTreeMap<String, u64>,
    pub class_instances: BTreeMap<ClassId, u64>,
    /// Box longer side binned by power of two; keys are bin lower bounds.
    pub max_side_histogram: BTreeMap<u32, u64>,
    pub min_box_side: Option<u32>,
    pub max_box_side: Option<u32>,
    /// Wall time of the run that produced this summary; not persisted.
    #[serde(skip)]
    pub generation_seconds: Option<f64>,
}

impl PartialEq for DatasetSummary {
    fn eq(&self, o: &Self) -> bool {
        self.total == o.total
            && self.subsets == o.subsets
            && self.scenes == o.scenes
            && self.conditions == o.conditions
            && self.severities == o.severities
            && self.class_instances == o.class_instances
            && self.max_side_histogram == o.max_side_histogram
            && self.min_box_side == o.min_box_side
            && self.max_box_side == o.max_box_side
    }
}

impl DatasetSummary {
    pub fn subset_total(&self, subset: Subset) -> u64 {
        self.subsets.get(&subset).map_or(0, BucketCounts::total)
    }

    pub fn condition_total(&self, condition: WeatherCondition) -> u64 {
        self.conditions
            .get(&condition)
            .map_or(0, BucketCounts::total)
    }
}

pub fn summarize(rows: &[StatRow]) -> DatasetSummary {
    let mut s = DatasetSummary {
        total: rows.len() as u64,
        ..Default::default()
    };
    for r in rows {
        let bucket = realized_bucket(r.subset, r.drones, r.birds);
        s.subsets.entry(r.subset).or_default().add(bucket);
        *s.scenes
            .entry(r.subset)
            .or_default()
            .entry(r.scene)
            .or_default() += 1;
        if r.subset == Subset::Weather {
            s.conditions
                .entry(r.condition.condition())
                .or_default()
                .add(bucket);
            *s.severities.entry(r.condition.token()).or_default() += 1;
        }
        *s.class_instances.entry(ClassId::Drone).or_default() += r.drones as u64;
        *s.class_instances.entry(ClassId::Bird).or_default() += r.birds as u64;
        for &m in &r.max_sides {
            let bin = if m == 0 {
                0
            } else {
                1u32 << (31 - m.leading_zeros())
            };
            *s.max_side_histogram.entry(bin).or_default() += 1;
            s.min_box_side = Some(s.min_box_side.map_or(m, |v| v.min(m)));
            s.max_box_side = Some(s.max_box_side.map_or(m, |v| v.max(m)));
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScannedImage {
    /// Relative to the dataset root.
    pub path: PathBuf,
    pub stem: String,
    pub info: StemInfo,
    pub width: u32,
    pub height: u32,
    pub records: Vec<AnnotationRecord>,
}

impl ScannedImage {
    pub fn count(&self, class: ClassId) -> usize {
        self.records.iter().filter(|r| r.class == class).count()
    }

    pub fn bucket(&self) -> Option<ContentBucket> {
        realized_bucket(
            self.info.subset,
            self.count(ClassId::Drone),
            self.count(ClassId::Bird),
        )
    }

    pub fn row(&self) -> StatRow {
        StatRow {
            subset: self.info.subset,
            scene: self.info.scene,
            condition: self.info.condition,
            drones: self.count(ClassId::Drone),
            birds: self.count(ClassId::Bird),
            max_sides: self
                .records
                .iter()
                .map(|r| to_pixel_box(r, self.width, self.height).max_side())
                .collect(),
        }
    }
}

fn image_files(root: &Path, subset: Subset) -> Result<Vec<PathBuf>, DatasetError> {
    let dir = root.join("images").join(subset.name());
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut files = Vec::new();
    for e in fs::read_dir(&dir).map_err(io_err(&dir))? {
        let p = e.map_err(io_err(&dir))?.path();
        if p.extension().is_some_and(|x| x == "png") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

fn scan_one(root: &Path, subset: Subset, path: &Path) -> Result<ScannedImage, DatasetError> {
    let invalid = |path: &Path, message: String| DatasetError::LayoutInvalid {
        path: path.to_path_buf(),
        message,
    };
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string();
    let info = parse_stem(&stem)
        .ok_or_else(|| invalid(path, "file name does not follow the naming pattern".into()))?;
    if info.subset != subset {
        return Err(invalid(
            path,
            format!(
                "named for subset {} but stored under {}",
                info.subset.name(),
                subset.name()
            ),
        ));
    }
    let (width, height) = image::image_dimensions(path).map_err(|source| DatasetError::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let label = root
        .join("labels")
        .join(subset.name())
        .join(format!("{stem}.txt"));
    if !label.is_file() {
        return Err(invalid(&label, "missing label file".into()));
    }
    let text = fs::read_to_string(&label).map_err(io_err(&label))?;
    let records = parse_labels(&text).map_err(|e| invalid(&label, e.to_string()))?;
    Ok(ScannedImage {
        path: path.strip_prefix(root).unwrap_or(path).to_path_buf(),
        stem,
        info,
        width,
        height,
        records,
    })
}

/// Reads every image header and label file under `root`.
pub fn scan_dataset(root: &Path) -> Result<Vec<ScannedImage>, DatasetError> {
    let mut out = Vec::new();
    for subset in Subset::ALL {
        for p in image_files(root, subset)? {
            out.push(scan_one(root, subset, &p)?);
        }
    }
    if out.is_empty() {
        return Err(DatasetError::LayoutInvalid {
            path: root.join("images"),
            message: "no images found".into(),
        });
    }
    Ok(out)
}

/// Composition statistics from image and label files alone.
pub fn compute_stats(root: &Path) -> Result<DatasetSummary, DatasetError> {
    let rows: Vec<StatRow> = scan_dataset(root)?.iter().map(ScannedImage::row).collect();
    Ok(summarize(&rows))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub images: usize,
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Checks layout, label grammar, size band, VFX labels and agreement with
/// the manifest and stored summary. Every violation is reported.
pub fn validate_dataset(root: &Path) -> Result<ValidationReport, DatasetError> {
    let mut report = ValidationReport::default();
    let mut scanned = Vec::new();
    for subset in Subset::ALL {
        for p in image_files(root, subset)? {
            match scan_one(root, subset, &p) {
                Ok(s) => scanned.push(s),
                Err(e) => report.problems.push(e.to_string()),
            }
        }
    }
    report.images = scanned.len();
    if report.images == 0 && report.problems.is_empty() {
        report.problems.push(format!(
            "{}: no images found",
            root.join("images").display()
        ));
    }

    for s in &scanned {
        let label = format!("labels/{}/{}.txt", s.info.subset.name(), s.stem);
        let limit = u64::from(s.width) * u64::from(s.height) * MAX_AREA_FRACTION.0;
        for (i, r) in s.records.iter().enumerate() {
            let b = to_pixel_box(r, s.width, s.height);
            if b.max_side() < MIN_EXTENT_PX {
                report.problems.push(format!(
                    "{label}: line {}: box {}x{} is under {MIN_EXTENT_PX} px",
                    i + 1,
                    b.width(),
                    b.height()
                ));
            }
            if b.area() * MAX_AREA_FRACTION.1 > limit {
                report.problems.push(format!(
                    "{label}: line {}: box {}x{} exceeds 20% of the image",
                    i + 1,
                    b.width(),
                    b.height()
                ));
            }
        }
        if s.info.subset == Subset::Vfx && s.count(ClassId::Bird) > 0 {
            report
                .problems
                .push(format!("{label}: VFX image has bird labels"));
        }
        if s.bucket().is_none() {
            report.problems.push(format!(
                "{label}: labels realize no bucket of subset {}",
                s.info.subset.name()
            ));
        }
    }

    match Manifest::load(root) {
        Err(e) => report.problems.push(e.to_string()),
        Ok(m) => {
            let by_stem: BTreeMap<&str, &ScannedImage> =
                scanned.iter().map(|s| (s.stem.as_str(), s)).collect();
            let mut listed = BTreeSet::new();
            for e in &m.images {
                listed.insert(e.stem.as_str());
                let label = e.label_path();
                let Some(s) = by_stem.get(e.stem.as_str()) else {
                    report.problems.push(format!(
                        "{}: listed in manifest but missing",
                        e.image_path().display()
                    ));
                    continue;
                };
                if s.records.len() != e.labels
                    || s.count(ClassId::Drone) != e.drones
                    || s.count(ClassId::Bird) != e.birds
                {
                    report.problems.push(format!(
                        "{}: {} label line(s) ({} drone, {} bird), manifest records {} ({} drone, {} bird)",
                        label.display(),
                        s.records.len(),
                        s.count(ClassId::Drone),
                        s.count(ClassId::Bird),
                        e.labels,
                        e.drones,
                        e.birds
                    ));
                }
                if s.bucket() != Some(e.bucket) {
                    report.problems.push(format!(
                        "{}: labels do not realize planned bucket {}",
                        label.display(),
                        e.bucket.name()
                    ));
                }
                if (s.width, s.height) != (m.plan.width, m.plan.height) {
                    report.problems.push(format!(
                        "{}: image is {}x{}, plan says {}x{}",
                        s.path.display(),
                        s.width,
                        s.height,
                        m.plan.width,
                        m.plan.height
                    ));
                }
            }
            for s in &scanned {
                if !listed.contains(s.stem.as_str()) {
                    report
                        .problems
                        .push(format!("{}: not listed in manifest", s.path.display()));
                }
            }
        }
    }

    let spath = root.join(SUMMARY_PATH);
    match fs::read_to_string(&spath) {
        Err(e) => report.problems.push(format!("{}: {e}", spath.display())),
        Ok(text) => match serde_json::from_str::<DatasetSummary>(&text) {
            Err(e) => report.problems.push(format!("{}: {e}", spath.display())),
            Ok(stored) => {
                let rows: Vec<StatRow> = scanned.iter().map(ScannedImage::row).collect();
                if summarize(&rows) != stored {
                    report.problems.push(format!(
                        "{}: does not match statistics recomputed from files",
                        spath.display()
                    ));
                }
            }
        },
    }
    Ok(report)
}

/// Human-readable composition tables: subsets, scenes, weather conditions.
pub fn format_tables(s: &DatasetSummary) -> String {
    let mut out = String::new();
    let row = |out: &mut String, name: &str, cells: &[u64]| {
        write!(out, "{name:<16}").unwrap();
        for c in cells {
            write!(out, "{c:>10}").unwrap();
        }
        out.push('\n');
    };
    writeln!(
        out,
        "{:<16}{:>10}{:>10}{:>10}{:>10}",
        "Subset", "Drone", "Bird", "Both", "Total"
    )
    .unwrap();
    let mut sum = BucketCounts::default();
    for subset in Subset::ALL {
        let b = s.subsets.get(&subset).copied().unwrap_or_default();
        let drone = b.drone_only + b.vfx_drone;
        row(
            &mut out,
            subset.name(),
            &[drone, b.bird_only, b.both, b.total()],
        );
        sum.drone_only += drone;
        sum.bird_only += b.bird_only;
        sum.both += b.both;
        sum.unrealized += b.unrealized;
    }
    row(
        &mut out,
        "total",
        &[sum.drone_only, sum.bird_only, sum.both, s.total],
    );

    writeln!(
        out,
        "\n{:<16}{:>10}{:>10}{:>10}",
        "Scene", "Non-VFX", "VFX", "Weather"
    )
    .unwrap();
    for scene in ProfileId::ALL {
        let n = |subset| {
            s.scenes
                .get(&subset)
                .and_then(|m| m.get(&scene))
                .copied()
                .unwrap_or(0)
        };
        row(
            &mut out,
            scene.name(),
            &[n(Subset::NonVfx), n(Subset::Vfx), n(Subset::Weather)],
        );
    }

    writeln!(
        out,
        "\n{:<16}{:>10}{:>10}{:>10}{:>10}",
        "Condition", "Drone", "Bird", "Both", "Total"
    )
    .unwrap();
    for c in [
        WeatherCondition::Fog,
        WeatherCondition::Snow,
        WeatherCondition::Other,
    ] {
        let b = s.conditions.get(&c).copied().unwrap_or_default();
        row(
            &mut out,
            c.name(),
            &[b.drone_only, b.bird_only, b.both, b.total()],
        );
    }

    let side = |v: Option<u32>| v.map_or("-".to_string(), |v| v.to_string());
    writeln!(
        out,
        "\nbox longer side: min {} px, max {} px; instances: {} drone, {} bird",
        side(s.min_box_side),
        side(s.max_box_side),
        s.class_instances.get(&ClassId::Drone).unwrap_or(&0),
        s.class_instances.get(&ClassId::Bird).unwrap_or(&0)
    )
    .unwrap();
    out
}
