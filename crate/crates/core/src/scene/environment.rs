use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Rgb;
use crate::rng::{stream_rng, Stream};

/// The seven procedural backdrops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileId {
    UrbanTowers,
    Park,
    DynamicCity,
    CityBlocks,
    Downtown,
    BridgeWater,
    RuralTerrain,
}

impl ProfileId {
    pub const ALL: [ProfileId; 7] = [
        ProfileId::UrbanTowers,
        ProfileId::Park,
        ProfileId::DynamicCity,
        ProfileId::CityBlocks,
        ProfileId::Downtown,
        ProfileId::BridgeWater,
        ProfileId::RuralTerrain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProfileId::UrbanTowers => "urban_towers",
            ProfileId::Park => "park",
            ProfileId::DynamicCity => "dynamic_city",
            ProfileId::CityBlocks => "city_blocks",
            ProfileId::Downtown => "downtown",
            ProfileId::BridgeWater => "bridge_water",
            ProfileId::RuralTerrain => "rural_terrain",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentProfile {
    pub profile_id: ProfileId,
    pub sky_top: Rgb,
    pub sky_horizon: Rgb,
    pub ground_color: Rgb,
    pub structure_color: Rgb,
    pub terrain_color: Rgb,
    /// Ridge-line amplitude as an elevation angle, radians.
    pub terrain_amplitude: f64,
    /// Ridge undulations per full turn.
    pub terrain_frequency: f64,
    /// Buildings per square kilometre.
    pub structure_density: f64,
    /// Building height range, meters.
    pub structure_height: (f64, f64),
    pub sun_azimuth: f64,
    pub sun_elevation: f64,
    pub ambient_level: f64,
}

impl EnvironmentProfile {
    pub fn preset(id: ProfileId) -> Self {
        let base = Self {
            profile_id: id,
            sky_top: Rgb::new(70, 120, 200),
            sky_horizon: Rgb::new(185, 205, 230),
            ground_color: Rgb::new(95, 100, 90),
            structure_color: Rgb::new(120, 120, 128),
            terrain_color: Rgb::new(90, 110, 85),
            terrain_amplitude: 0.01,
            terrain_frequency: 5.0,
            structure_density: 10.0,
            structure_height: (10.0, 60.0),
            sun_azimuth: 2.2,
            sun_elevation: 0.7,
            ambient_level: 0.35,
        };
        match id {
            ProfileId::UrbanTowers => Self {
                sky_top: Rgb::new(80, 125, 190),
                ground_color: Rgb::new(150, 120, 85),
                structure_color: Rgb::new(140, 110, 80),
                structure_density: 40.0,
                structure_height: (30.0, 220.0),
                ..base
            },
            ProfileId::Park => Self {
                ground_color: Rgb::new(70, 115, 60),
                terrain_color: Rgb::new(55, 95, 50),
                structure_density: 8.0,
                structure_height: (15.0, 80.0),
                terrain_amplitude: 0.015,
                ..base
            },
            ProfileId::DynamicCity => Self {
                structure_color: Rgb::new(110, 115, 130),
                structure_density: 30.0,
                structure_height: (20.0, 150.0),
                ..base
            },
            ProfileId::CityBlocks => Self {
                structure_color: Rgb::new(160, 150, 140),
                structure_density: 25.0,
                structure_height: (12.0, 70.0),
                ..base
            },
            ProfileId::Downtown => Self {
                sky_top: Rgb::new(60, 100, 170),
                structure_color: Rgb::new(95, 100, 115),
                ground_color: Rgb::new(85, 85, 88),
                structure_density: 45.0,
                structure_height: (40.0, 300.0),
                ..base
            },
            ProfileId::BridgeWater => Self {
                ground_color: Rgb::new(45, 80, 110),
                structure_color: Rgb::new(130, 125, 120),
                structure_density: 4.0,
                structure_height: (20.0, 120.0),
                terrain_amplitude: 0.02,
                terrain_frequency: 3.0,
                ..base
            },
            ProfileId::RuralTerrain => Self {
                sky_top: Rgb::new(90, 140, 215),
                sky_horizon: Rgb::new(210, 215, 225),
                ground_color: Rgb::new(160, 120, 75),
                terrain_color: Rgb::new(130, 100, 70),
                structure_density: 0.8,
                structure_height: (4.0, 12.0),
                terrain_amplitude: 0.045,
                terrain_frequency: 7.0,
                ..base
            },
        }
    }

    /// Per-scene variation of lighting and sky tone.
    pub fn randomized(&self, seed: u64) -> Self {
        let mut rng = stream_rng(seed, Stream::Environment);
        let tint = |c: Rgb, rng: &mut rand_chacha::ChaCha8Rng| {
            let d: i32 = rng.random_range(-12..=12);
            Rgb(c.0.map(|v| (i32::from(v) + d).clamp(0, 255) as u8))
        };
        let sky_top = tint(self.sky_top, &mut rng);
        let sky_horizon = tint(self.sky_horizon, &mut rng);
        Self {
            sky_top,
            sky_horizon,
            sun_azimuth: rng.random_range(0.0..TAU),
            sun_elevation: rng.random_range(0.25..1.2),
            ambient_level: (self.ambient_level + rng.random_range(-0.08..0.08)).clamp(0.15, 0.6),
            ..*self
        }
    }

    /// Unit vector toward the sun in world coordinates.
    pub fn sun_direction(&self) -> nalgebra::Vector3<f64> {
        let (sa, ca) = self.sun_azimuth.sin_cos();
        let (se, ce) = self.sun_elevation.sin_cos();
        nalgebra::Vector3::new(ce * sa, ce * ca, se)
    }
}
