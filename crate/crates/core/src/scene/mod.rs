//! Scene description: assets, environment, weather and placed instances.

mod assets;
mod environment;
mod sampling;
mod weather_params;

use std::collections::BTreeMap;

use nalgebra::{Point3, Rotation3};
use serde::{Deserialize, Serialize};

pub use assets::{build_asset_library, AssetLibrary, AssetModel, PayloadKind, Rgb, Triangle};
pub use environment::{EnvironmentProfile, ProfileId};
pub use sampling::{sample_scene, sample_scene_with, ContentBucket, PlacementConfig, SceneError};
pub use weather_params::{WeatherCondition, WeatherParams, FOG_GRID_PERCENT, SNOW_GRID_PERCENT};

/// Annotatable object classes. Background and flock clutter have none.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassId {
    Drone = 0,
    Bird = 1,
}

impl ClassId {
    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            0 => Some(Self::Drone),
            1 => Some(Self::Bird),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Point3<f64>,
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    pub scale: f64,
}

impl Pose {
    pub fn at(position: Point3<f64>) -> Self {
        Self {
            position,
            yaw: 0.0,
            pitch: 0.0,
            roll: 0.0,
            scale: 1.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.scale > 0.0
            && self.scale.is_finite()
            && [self.yaw, self.pitch, self.roll]
                .iter()
                .all(|a| a.is_finite())
            && self.position.iter().all(|c| c.is_finite())
    }

    /// Yaw about `+z`, then pitch about `+y`, then roll about `+x`.
    pub fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_euler_angles(self.roll, self.pitch, self.yaw)
    }

    pub fn transform(&self, p: &Point3<f64>) -> Point3<f64> {
        self.position + self.rotation() * (p.coords * self.scale)
    }
}

/// What an instance draws.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetRef {
    /// A mesh from the asset library, by `asset_id`.
    Library(u32),
    /// A camera-facing clutter triangle of the given size in meters.
    FlockParticle { size: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub instance_id: u32,
    pub asset: AssetRef,
    pub pose: Pose,
    pub annotatable: bool,
    pub trajectory: Option<crate::trajectory::TrajectorySpec>,
}

impl ObjectInstance {
    pub fn class(&self, library: &AssetLibrary) -> Option<ClassId> {
        match self.asset {
            AssetRef::Library(id) if self.annotatable => library.get(id).map(|a| a.class),
            _ => None,
        }
    }

    pub fn is_flock_particle(&self) -> bool {
        matches!(self.asset, AssetRef::FlockParticle { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub seed: u64,
    pub time: f64,
    pub environment: EnvironmentProfile,
    pub weather: WeatherParams,
    /// Position the rig observes from; flock particles face this point.
    pub viewpoint: Point3<f64>,
    pub instances: Vec<ObjectInstance>,
}

impl Scene {
    pub fn empty(environment: EnvironmentProfile, viewpoint: Point3<f64>, seed: u64) -> Self {
        Self {
            seed,
            time: 0.0,
            environment,
            weather: WeatherParams::Clear,
            viewpoint,
            instances: Vec::new(),
        }
    }

    /// Annotatable instance ids mapped to their class.
    pub fn instance_table(&self, library: &AssetLibrary) -> BTreeMap<u32, ClassId> {
        self.instances
            .iter()
            .filter_map(|inst| inst.class(library).map(|c| (inst.instance_id, c)))
            .collect()
    }

    pub fn count_class(&self, library: &AssetLibrary, class: ClassId) -> usize {
        self.instances
            .iter()
            .filter(|i| i.class(library) == Some(class))
            .count()
    }

    pub fn flock_particle_count(&self) -> usize {
        self.instances
            .iter()
            .filter(|i| i.is_flock_particle())
            .count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }
}
