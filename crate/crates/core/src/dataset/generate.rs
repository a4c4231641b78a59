//! Parallel frame generation and on-disk output.

use std::fs;
use std::io::Cursor;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::layout::{
    image_stem, ImageEntry, InstanceEntry, Manifest, RigEntry, MANIFEST_PATH, SUMMARY_PATH,
};
use super::stats::{summarize, DatasetSummary, StatRow};
use super::{io_err, DatasetError, DatasetPlan, FrameSpec, Subset};
use crate::annotation::{annotate_frame, FrameAnnotations};
use crate::camera::Rig;
use crate::render::{render_frame_traced, Coverage, FrameBundle};
use crate::rng::mix;
use crate::scene::{
    build_asset_library, sample_scene, AssetLibrary, AssetRef, ClassId, EnvironmentProfile, Scene,
};
use crate::weather::apply_weather;

/// Sampling attempts per frame before giving up.
pub const MAX_ATTEMPTS: usize = 64;

pub struct GeneratedFrame {
    pub spec: FrameSpec,
    pub stem: String,
    pub scene: Scene,
    /// Final frame, weather applied.
    pub frame: FrameBundle,
    pub annotations: FrameAnnotations,
    pub coverage: Coverage,
    pub seed: u64,
    pub attempts: usize,
}

impl GeneratedFrame {
    pub fn flock_particles_visible(&self) -> usize {
        self.scene
            .instances
            .iter()
            .filter(|i| {
                i.is_flock_particle()
                    && self
                        .coverage
                        .pixels
                        .get(&i.instance_id)
                        .is_some_and(|&n| n > 0)
            })
            .count()
    }

    pub fn label_text(&self) -> String {
        self.annotations.label_text()
    }

    fn entry(&self, library: &AssetLibrary) -> ImageEntry {
        let a = &self.annotations;
        let instances = self
            .scene
            .instances
            .iter()
            .filter(|i| i.annotatable)
            .filter_map(|i| {
                let AssetRef::Library(asset_id) = i.asset else {
                    return None;
                };
                Some(InstanceEntry {
                    instance_id: i.instance_id,
                    class: i.class(library)?,
                    asset_id,
                    fragments: a.fragments.get(&i.instance_id).copied().unwrap_or(0),
                    visible_pixels: self
                        .coverage
                        .pixels
                        .get(&i.instance_id)
                        .copied()
                        .unwrap_or(0),
                })
            })
            .collect();
        ImageEntry {
            stem: self.stem.clone(),
            frame_index: self.spec.index,
            subset: self.spec.subset,
            bucket: self.spec.bucket,
            scene: self.spec.scene,
            condition: self.spec.condition,
            camera: self.spec.camera,
            base_seed: self.spec.seed,
            seed: self.seed,
            attempts: self.attempts,
            paired_with: self.spec.paired_with,
            labels: a.records.len(),
            drones: a.count(ClassId::Drone),
            birds: a.count(ClassId::Bird),
            dropped_components: a.dropped,
            flock_particles: self.scene.flock_particle_count(),
            flock_particles_visible: self.flock_particles_visible(),
            instances,
        }
    }

    fn stat_row(&self) -> StatRow {
        StatRow {
            subset: self.spec.subset,
            scene: self.spec.scene,
            condition: self.spec.condition,
            drones: self.annotations.count(ClassId::Drone),
            birds: self.annotations.count(ClassId::Bird),
            max_sides: self
                .annotations
                .boxes
                .iter()
                .map(|b| b.max_side())
                .collect(),
        }
    }
}

/// Samples, renders, annotates and weathers one planned frame.
///
/// Attempt `k > 0` reseeds with `mix(seed, k)`. An attempt is kept when no
/// labelled box is oversize and the labels realize the frame's bucket.
/// Acceptance looks only at labels, which weather never changes, so a
/// weather frame accepts the same attempt as its paired clear frame.
pub fn produce_frame(
    spec: &FrameSpec,
    library: &AssetLibrary,
    rig: &Rig,
) -> Result<GeneratedFrame, DatasetError> {
    let camera = rig.camera(spec.camera);
    let env = EnvironmentProfile::preset(spec.scene);
    let mut last = String::from("no attempts");
    for attempt in 0..MAX_ATTEMPTS {
        let seed = if attempt == 0 {
            spec.seed
        } else {
            mix(spec.seed, attempt as u64)
        };
        let scene = match sample_scene(spec.bucket, &env, spec.condition, library, camera, seed) {
            Ok(s) => s,
            Err(e) => {
                last = e.to_string();
                continue;
            }
        };
        let (frame, coverage) = render_frame_traced(&scene, camera, library);
        let table = scene.instance_table(library);
        let annotations = annotate_frame(&frame.segmap, frame.width, frame.height, &table)
            .map_err(|e| DatasetError::GenerationFailed {
                frame: spec.index,
                target: describe(spec),
                attempts: attempt + 1,
                last: e.to_string(),
            })?;
        if !annotations.oversize.is_empty() {
            last = format!("oversize instances {:?}", annotations.oversize);
            continue;
        }
        if !spec.bucket.accepts(
            annotations.count(ClassId::Drone),
            annotations.count(ClassId::Bird),
        ) {
            last = format!(
                "labels show {} drone(s) and {} bird(s)",
                annotations.count(ClassId::Drone),
                annotations.count(ClassId::Bird)
            );
            continue;
        }
        let frame = apply_weather(frame, &spec.condition, scene.seed).map_err(|e| {
            DatasetError::GenerationFailed {
                frame: spec.index,
                target: describe(spec),
                attempts: attempt + 1,
                last: e.to_string(),
            }
        })?;
        return Ok(GeneratedFrame {
            spec: *spec,
            stem: image_stem(
                spec.scene,
                spec.subset,
                &spec.condition,
                spec.index,
                spec.camera,
            ),
            scene,
            frame,
            annotations,
            coverage,
            seed,
            attempts: attempt + 1,
        });
    }
    Err(DatasetError::GenerationFailed {
        frame: spec.index,
        target: describe(spec),
        attempts: MAX_ATTEMPTS,
        last,
    })
}

fn describe(spec: &FrameSpec) -> String {
    format!(
        "{}/{}/{}/{}",
        spec.subset.name(),
        spec.bucket.name(),
        spec.scene.name(),
        spec.condition.token()
    )
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), DatasetError> {
    fs::write(path, bytes).map_err(io_err(path))
}

fn encode_png(
    path: &Path,
    encode: impl FnOnce(&mut Cursor<Vec<u8>>) -> image::ImageResult<()>,
) -> Result<Vec<u8>, DatasetError> {
    let mut buf = Cursor::new(Vec::new());
    encode(&mut buf).map_err(|source| DatasetError::Image {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(buf.into_inner())
}

fn write_frame(root: &Path, g: &GeneratedFrame, plan: &DatasetPlan) -> Result<(), DatasetError> {
    let subset = g.spec.subset.name();
    let img_path = root
        .join("images")
        .join(subset)
        .join(format!("{}.png", g.stem));
    let rgb = g.frame.to_rgb_image();
    let bytes = encode_png(&img_path, |buf| rgb.write_to(buf, image::ImageFormat::Png))?;
    write(&img_path, &bytes)?;
    write(
        &root
            .join("labels")
            .join(subset)
            .join(format!("{}.txt", g.stem)),
        g.label_text().as_bytes(),
    )?;
    if plan.write_masks {
        let path = root
            .join("masks")
            .join(subset)
            .join(format!("{}.png", g.stem));
        let mask = g
            .frame
            .segmap_image()
            .ok_or_else(|| DatasetError::LayoutInvalid {
                path: path.clone(),
                message: "instance id exceeds 16 bits".into(),
            })?;
        let bytes = encode_png(&path, |buf| mask.write_to(buf, image::ImageFormat::Png))?;
        write(&path, &bytes)?;
    }
    if plan.write_depth {
        let path = root
            .join("depth")
            .join(subset)
            .join(format!("{}.f32", g.stem));
        write(&path, &g.frame.depth_bytes())?;
    }
    Ok(())
}

/// Generates every planned frame into `out`, using `workers` threads.
///
/// Output bytes depend only on the plan; the worker count changes speed,
/// never content.
pub fn generate_dataset(
    plan: &DatasetPlan,
    out: &Path,
    workers: usize,
) -> Result<DatasetSummary, DatasetError> {
    let started = Instant::now();
    let rig = plan.build_rig()?;
    let library = build_asset_library(plan.master_seed);
    let frames = plan.frames();

    let mut dirs = vec![out.join("meta")];
    for subset in Subset::ALL {
        if plan.subset_total(subset) == 0 {
            continue;
        }
        dirs.push(out.join("images").join(subset.name()));
        dirs.push(out.join("labels").join(subset.name()));
        if plan.write_masks {
            dirs.push(out.join("masks").join(subset.name()));
        }
        if plan.write_depth {
            dirs.push(out.join("depth").join(subset.name()));
        }
    }
    for d in &dirs {
        fs::create_dir_all(d).map_err(io_err(d))?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    let results: Vec<Result<(ImageEntry, StatRow), DatasetError>> = pool.install(|| {
        frames
            .par_iter()
            .map(|spec| {
                let g = produce_frame(spec, &library, &rig)?;
                write_frame(out, &g, plan)?;
                log::debug!(
                    "frame {} -> {} ({} attempt(s))",
                    spec.index,
                    g.stem,
                    g.attempts
                );
                Ok((g.entry(&library), g.stat_row()))
            })
            .collect()
    });
    let mut images = Vec::with_capacity(results.len());
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        let (e, s) = r?;
        images.push(e);
        rows.push(s);
    }

    let manifest = Manifest {
        layout_version: plan.layout_version,
        plan: plan.clone(),
        rig: rig
            .cameras
            .iter()
            .map(|c| RigEntry {
                index: c.index,
                azimuth_deg: c.extrinsics.azimuth.to_degrees(),
                elevation_deg: c.extrinsics.elevation.to_degrees(),
                hfov_deg: c.intrinsics.hfov().to_degrees(),
                focal_px: c.intrinsics.focal_px,
            })
            .collect(),
        images,
    };
    let mut summary = summarize(&rows);
    let mpath = out.join(MANIFEST_PATH);
    write(
        &mpath,
        serde_json::to_string_pretty(&manifest)
            .expect("manifest serializes")
            .as_bytes(),
    )?;
    let spath = out.join(SUMMARY_PATH);
    write(
        &spath,
        serde_json::to_string_pretty(&summary)
            .expect("summary serializes")
            .as_bytes(),
    )?;
    summary.generation_seconds = Some(started.elapsed().as_secs_f64());
    log::info!(
        "generated {} images in {:.1}s with {} worker(s)",
        plan.total,
        started.elapsed().as_secs_f64(),
        workers
    );
    Ok(summary)
}
