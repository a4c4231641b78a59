//! Rejection sampling of scene content into a camera's view.
//!
//! Each annotatable object is placed by picking a target point inside the
//! camera's frustum and airspace band, then solving for the trajectory centre
//! that passes through that point at the scene time. The posed mesh is
//! projected and kept only if its image extent respects the annotation size
//! band.

use std::f64::consts::{PI, TAU};

use nalgebra::{Point3, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    AssetLibrary, AssetRef, ClassId, EnvironmentProfile, ObjectInstance, Scene, WeatherParams,
};
use crate::camera::{Camera, NEAR_PLANE};
use crate::rng::{mix, stream_rng, Stream};
use crate::trajectory::{pose_at, spawn_flock, TrajectorySpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentBucket {
    DroneOnly,
    BirdOnly,
    Both,
    VfxDrone,
}

impl ContentBucket {
    pub const ALL: [ContentBucket; 4] =
        [Self::DroneOnly, Self::BirdOnly, Self::Both, Self::VfxDrone];

    pub fn name(self) -> &'static str {
        match self {
            Self::DroneOnly => "drone_only",
            Self::BirdOnly => "bird_only",
            Self::Both => "both",
            Self::VfxDrone => "vfx_drone",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }

    /// Whether a frame with these annotated class counts satisfies the bucket.
    pub fn accepts(self, drones: usize, birds: usize) -> bool {
        match self {
            Self::DroneOnly | Self::VfxDrone => drones > 0 && birds == 0,
            Self::BirdOnly => drones == 0 && birds > 0,
            Self::Both => drones > 0 && birds > 0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("rejection sampling exhausted after {attempts} attempts placing a {class:?} for bucket {bucket:?}")]
    RejectionExhausted {
        bucket: ContentBucket,
        class: ClassId,
        attempts: usize,
    },
    #[error("asset library has no {0:?} assets")]
    MissingClass(ClassId),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementConfig {
    /// Horizontal distance from the rig, meters.
    pub range: (f64, f64),
    /// Absolute altitude above ground, meters.
    pub altitude: (f64, f64),
    /// Smallest projected extent accepted at placement, pixels. Kept above
    /// the 5 px annotation cutoff so rasterization rarely drops an object.
    pub min_extent_px: f64,
    pub max_area_fraction: f64,
    pub max_attempts: usize,
    pub sequence_duration: f64,
    pub orbit_radius: (f64, f64),
    pub orbit_period: (f64, f64),
    pub drones: (usize, usize),
    pub birds: (usize, usize),
    pub flock_groups: (usize, usize),
    pub flock_size: (usize, usize),
    pub flock_range: (f64, f64),
    pub flock_particle_size: (f64, f64),
    /// Maximum fraction of the smaller projected box that may overlap another
    /// annotatable object's box.
    pub max_overlap: f64,
    /// Fraction of the half field of view used for object centres.
    pub view_margin: f64,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self {
            range: (5.0, 150.0),
            altitude: (2.0, 60.0),
            min_extent_px: 8.0,
            max_area_fraction: 0.20,
            max_attempts: 1000,
            sequence_duration: 60.0,
            orbit_radius: (8.0, 120.0),
            orbit_period: (20.0, 120.0),
            drones: (1, 3),
            birds: (1, 3),
            flock_groups: (1, 2),
            flock_size: (10, 40),
            flock_range: (10.0, 60.0),
            flock_particle_size: (0.1, 0.3),
            max_overlap: 0.25,
            view_margin: 0.9,
        }
    }
}

pub fn sample_scene(
    bucket: ContentBucket,
    env: &EnvironmentProfile,
    weather: WeatherParams,
    library: &AssetLibrary,
    camera: &Camera,
    seed: u64,
) -> Result<Scene, SceneError> {
    sample_scene_with(
        &PlacementConfig::default(),
        bucket,
        env,
        weather,
        library,
        camera,
        seed,
    )
}

#[derive(Clone, Copy)]
struct ImageBox {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl ImageBox {
    fn area(&self) -> f64 {
        (self.x1 - self.x0).max(0.0) * (self.y1 - self.y0).max(0.0)
    }

    fn overlap_fraction(&self, other: &ImageBox) -> f64 {
        let inter = ImageBox {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
        };
        let smaller = self.area().min(other.area());
        if smaller <= 0.0 {
            0.0
        } else {
            inter.area() / smaller
        }
    }
}

struct Sampler<'a> {
    cfg: &'a PlacementConfig,
    camera: &'a Camera,
    library: &'a AssetLibrary,
    rng: ChaCha8Rng,
    time: f64,
}

impl Sampler<'_> {
    /// Random point inside the camera frustum and airspace band.
    fn target_point(&mut self, range: (f64, f64)) -> Option<Point3<f64>> {
        let k = self.camera.intrinsics;
        let ext = self.camera.extrinsics;
        let half_h = k.hfov() / 2.0 * self.cfg.view_margin;
        let half_v = k.vfov() / 2.0 * self.cfg.view_margin;
        let (lo, hi) = range;
        let dist = (lo.ln() + self.rng.random::<f64>() * (hi.ln() - lo.ln())).exp();
        let heading = ext.azimuth + self.rng.random_range(-half_h..=half_h);
        let base = ext.rig_position;
        let alt_lo = self
            .cfg
            .altitude
            .0
            .max(base.z + dist * (ext.elevation - half_v).tan());
        let alt_hi = self
            .cfg
            .altitude
            .1
            .min(base.z + dist * (ext.elevation + half_v).tan());
        if alt_lo >= alt_hi {
            return None;
        }
        let alt = self.rng.random_range(alt_lo..alt_hi);
        Some(Point3::new(
            base.x + dist * heading.sin(),
            base.y + dist * heading.cos(),
            alt,
        ))
    }

    /// Trajectory passing through `target` at the scene time.
    fn trajectory_through(&mut self, target: Point3<f64>, class: ClassId) -> TrajectorySpec {
        let cfg = self.cfg;
        let period = self
            .rng
            .random_range(cfg.orbit_period.0..=cfg.orbit_period.1);
        let omega = if self.rng.random::<bool>() {
            TAU / period
        } else {
            -TAU / period
        };
        let phase = self.rng.random_range(0.0..TAU);
        let mut radius = || {
            self.rng
                .random_range(cfg.orbit_radius.0..=cfg.orbit_radius.1)
        };
        let (r0, r1) = (radius(), radius());
        let mut altitude = || self.rng.random_range(cfg.altitude.0..=cfg.altitude.1);
        let (a0, a1) = (altitude(), altitude());
        let origin = Point3::origin();
        let mut spec = match class {
            ClassId::Drone if self.rng.random::<bool>() => {
                TrajectorySpec::circular(origin, r0, a0, omega, phase)
            }
            ClassId::Drone => TrajectorySpec::spiral(origin, (r0, r1), (a0, a1), omega, phase),
            ClassId::Bird => {
                let bob = self.rng.random_range(0.05..0.4);
                let flap = self.rng.random_range(2.0..6.0);
                TrajectorySpec::bird(origin, (r0, r1), (a0, a1), omega, phase, bob, flap)
            }
        };
        spec.center = target - spec.offset_at(self.time, cfg.sequence_duration);
        spec
    }

    /// Projected extent of the posed instance, or `None` if any vertex is
    /// behind the camera.
    fn project_extent(&self, scene: &Scene, inst: &ObjectInstance) -> Option<ImageBox> {
        let view = self.camera.view();
        let mut b = ImageBox {
            x0: f64::INFINITY,
            y0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for tri in scene.world_triangles(inst, self.library) {
            for v in &tri.0 {
                let c = view.to_camera(v);
                if c.z <= NEAR_PLANE * 10.0 {
                    return None;
                }
                let (u, w) = self.camera.project_camera_point(&c).ok()?;
                b.x0 = b.x0.min(u);
                b.y0 = b.y0.min(w);
                b.x1 = b.x1.max(u);
                b.y1 = b.y1.max(w);
            }
        }
        Some(b)
    }

    /// Accepts boxes whose centre is in the image and whose clipped extent
    /// lies within the size band.
    fn within_band(&self, b: &ImageBox) -> bool {
        let (w, h) = (
            f64::from(self.camera.width()),
            f64::from(self.camera.height()),
        );
        let (cx, cy) = ((b.x0 + b.x1) / 2.0, (b.y0 + b.y1) / 2.0);
        if !(cx >= 0.0 && cx < w && cy >= 0.0 && cy < h) {
            return false;
        }
        let cw = b.x1.min(w) - b.x0.max(0.0);
        let ch = b.y1.min(h) - b.y0.max(0.0);
        // a rasterized mask can exceed the continuous extent by up to a pixel
        cw.max(ch) >= self.cfg.min_extent_px
            && (cw + 1.0) * (ch + 1.0) <= self.cfg.max_area_fraction * w * h
    }

    fn place(
        &mut self,
        scene: &Scene,
        class: ClassId,
        bucket: ContentBucket,
        instance_id: u32,
        placed: &[ImageBox],
    ) -> Result<(ObjectInstance, ImageBox), SceneError> {
        let candidates: Vec<_> = self
            .library
            .by_class(class)
            .map(|a| (a.asset_id, a.scale_range))
            .collect();
        if candidates.is_empty() {
            return Err(SceneError::MissingClass(class));
        }
        for _ in 0..self.cfg.max_attempts {
            let (asset_id, (s_lo, s_hi)) = candidates[self.rng.random_range(0..candidates.len())];
            let scale = self.rng.random_range(s_lo..=s_hi);
            let Some(target) = self.target_point(self.cfg.range) else {
                continue;
            };
            let spec = self.trajectory_through(target, class);
            let mut pose = pose_at(&spec, self.time, self.cfg.sequence_duration)
                .expect("time within sequence");
            pose.scale = scale;
            let inst = ObjectInstance {
                instance_id,
                asset: AssetRef::Library(asset_id),
                pose,
                annotatable: true,
                trajectory: Some(spec),
            };
            let Some(extent) = self.project_extent(scene, &inst) else {
                continue;
            };
            if !self.within_band(&extent) {
                continue;
            }
            if placed
                .iter()
                .any(|p| p.overlap_fraction(&extent) > self.cfg.max_overlap)
            {
                continue;
            }
            return Ok((inst, extent));
        }
        Err(SceneError::RejectionExhausted {
            bucket,
            class,
            attempts: self.cfg.max_attempts,
        })
    }

    fn flock(&mut self, seed: u64, first_id: u32) -> Vec<ObjectInstance> {
        let cfg = self.cfg;
        let target = loop {
            if let Some(p) = self.target_point(cfg.flock_range) {
                break p;
            }
        };
        let count = self.rng.random_range(cfg.flock_size.0..=cfg.flock_size.1);
        let group = self.trajectory_through(target, ClassId::Bird);
        let particles = spawn_flock(&group, count, seed).expect("flock size within band");
        particles
            .into_iter()
            .enumerate()
            .map(|(i, spec)| {
                let mut pose =
                    pose_at(&spec, self.time, cfg.sequence_duration).expect("time within sequence");
                pose.roll = self.rng.random_range(-PI..PI);
                ObjectInstance {
                    instance_id: first_id + i as u32,
                    asset: AssetRef::FlockParticle {
                        size: self
                            .rng
                            .random_range(cfg.flock_particle_size.0..=cfg.flock_particle_size.1),
                    },
                    pose,
                    annotatable: false,
                    trajectory: Some(spec),
                }
            })
            .collect()
    }
}

/// Samples a scene whose content matches `bucket` and whose annotatable
/// objects all project into `camera` within the size band.
pub fn sample_scene_with(
    cfg: &PlacementConfig,
    bucket: ContentBucket,
    env: &EnvironmentProfile,
    weather: WeatherParams,
    library: &AssetLibrary,
    camera: &Camera,
    seed: u64,
) -> Result<Scene, SceneError> {
    let mut rng = stream_rng(seed, Stream::Scene);
    let time = rng.random_range(0.0..=cfg.sequence_duration);
    let mut sampler = Sampler {
        cfg,
        camera,
        library,
        rng,
        time,
    };

    let mut count = |(lo, hi): (usize, usize)| sampler.rng.random_range(lo..=hi);
    let (drones, birds, groups) = match bucket {
        ContentBucket::DroneOnly => (count(cfg.drones), 0, 0),
        ContentBucket::BirdOnly => (0, count(cfg.birds), 0),
        ContentBucket::Both => (count(cfg.drones), count(cfg.birds), 0),
        ContentBucket::VfxDrone => (count(cfg.drones), 0, count(cfg.flock_groups)),
    };

    let mut scene = Scene {
        seed,
        time,
        environment: env.randomized(seed),
        weather,
        viewpoint: camera.extrinsics.rig_position,
        instances: Vec::new(),
    };
    let mut placed = Vec::new();
    let mut next_id = 1u32;
    let classes = std::iter::repeat_n(ClassId::Drone, drones)
        .chain(std::iter::repeat_n(ClassId::Bird, birds));
    for class in classes {
        let (inst, extent) = sampler.place(&scene, class, bucket, next_id, &placed)?;
        scene.instances.push(inst);
        placed.push(extent);
        next_id += 1;
    }
    for g in 0..groups {
        let particles = sampler.flock(mix(seed, g as u64), next_id);
        next_id += particles.len() as u32;
        scene.instances.extend(particles);
    }
    Ok(scene)
}

impl Scene {
    /// World-space triangles of one instance. Flock particles are single
    /// triangles turned to face the viewpoint, rotated in-plane by their roll.
    pub fn world_triangles(
        &self,
        inst: &ObjectInstance,
        library: &AssetLibrary,
    ) -> Vec<super::Triangle> {
        match inst.asset {
            AssetRef::Library(id) => {
                library
                    .get(id)
                    .map(|asset| {
                        let rot = inst.pose.rotation();
                        asset
                            .mesh
                            .iter()
                            .map(|t| {
                                super::Triangle(t.0.map(|v| {
                                    inst.pose.position + rot * (v.coords * inst.pose.scale)
                                }))
                            })
                            .collect()
                    })
                    .unwrap_or_default()
            }
            AssetRef::FlockParticle { size } => {
                let pos = inst.pose.position;
                let to_view = (self.viewpoint - pos)
                    .try_normalize(1e-12)
                    .unwrap_or_else(Vector3::y);
                let right = Vector3::z()
                    .cross(&to_view)
                    .try_normalize(1e-12)
                    .unwrap_or_else(Vector3::x);
                let up = to_view.cross(&right);
                let r = size / 2.0;
                let corner = |k: f64| {
                    let a = inst.pose.roll + k * TAU / 3.0;
                    pos + (right * a.cos() + up * a.sin()) * r
                };
                vec![super::Triangle([corner(0.0), corner(1.0), corner(2.0)])]
            }
        }
    }
}
