//! Procedural backdrop: sky gradient, distant ridge line, box skyline and
//! ground plane.
//!
//! The skyline and ridge are defined in world headings, so adjacent cameras
//! of a rig see a continuous panorama. Everything sits well beyond the
//! airspace where objects fly and never occludes them.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rand::Rng;

use super::{FrameBundle, FAR_DEPTH};
use crate::camera::Camera;
use crate::rng::{stream_rng, Stream};
use crate::scene::{EnvironmentProfile, ProfileId, Rgb};

const LUT_BINS: usize = 16384;
const STRUCTURE_RANGE: (f64, f64) = (300.0, 1500.0);
const RIDGE_DISTANCE: f64 = 1800.0;
/// Cap on building top elevation so the top image row always shows sky.
const MAX_STRUCTURE_ELEVATION: f64 = 0.22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Layer {
    Sky,
    Ridge,
    Structure,
    Ground,
}

#[derive(Clone, Copy)]
struct SkylineCell {
    distance: f64,
    top: f64,
    bottom: f64,
    color: Rgb,
}

pub(crate) struct Backdrop {
    env: EnvironmentProfile,
    eye_height: f64,
    skyline: Vec<Option<SkylineCell>>,
    ridge_phase: [f64; 3],
    max_elevation: f64,
    ridge_bottom: f64,
}

impl Backdrop {
    pub(crate) fn new(env: &EnvironmentProfile, eye_height: f64, seed: u64) -> Self {
        let mut rng = stream_rng(seed, Stream::Background);
        let ridge_phase = [
            rng.random_range(0.0..TAU),
            rng.random_range(0.0..TAU),
            rng.random_range(0.0..TAU),
        ];
        let mut skyline: Vec<Option<SkylineCell>> = vec![None; LUT_BINS];
        let (r0, r1) = STRUCTURE_RANGE;
        let ring_km2 = PI * (r1 * r1 - r0 * r0) / 1.0e6;
        let count = (env.structure_density * ring_km2).round() as usize;
        let mut max_elevation = env.terrain_amplitude;

        let mut add = |heading: f64, half_width: f64, distance: f64, height: f64, color: Rgb| {
            let top = ((height - eye_height) / distance)
                .atan()
                .min(MAX_STRUCTURE_ELEVATION);
            let bottom = (-eye_height / distance).atan();
            max_elevation = max_elevation.max(top);
            let lo = ((heading - half_width) / TAU * LUT_BINS as f64).floor() as i64;
            let hi = ((heading + half_width) / TAU * LUT_BINS as f64).ceil() as i64;
            for b in lo..=hi {
                let slot = &mut skyline[b.rem_euclid(LUT_BINS as i64) as usize];
                if slot.is_none_or(|c| distance < c.distance) {
                    *slot = Some(SkylineCell {
                        distance,
                        top,
                        bottom,
                        color,
                    });
                }
            }
        };

        for _ in 0..count {
            let heading = rng.random_range(0.0..TAU);
            let distance = (r0 * r0 + rng.random::<f64>() * (r1 * r1 - r0 * r0)).sqrt();
            let width = rng.random_range(20.0..80.0);
            let (h_lo, h_hi) = env.structure_height;
            let height = rng.random_range(h_lo..=h_hi);
            let d: i32 = rng.random_range(-25..=25);
            let color = Rgb(env
                .structure_color
                .0
                .map(|c| (i32::from(c) + d).clamp(0, 255) as u8));
            add(
                heading,
                (width / 2.0 / distance).atan(),
                distance,
                height,
                color,
            );
        }
        if env.profile_id == ProfileId::BridgeWater {
            let heading = rng.random_range(0.0..TAU);
            add(heading, 0.6, 700.0, 28.0, env.structure_color);
        }

        Self {
            env: *env,
            eye_height,
            skyline,
            ridge_phase,
            max_elevation,
            ridge_bottom: (-eye_height / RIDGE_DISTANCE).atan(),
        }
    }

    fn ridge(&self, heading: f64) -> f64 {
        let f = self.env.terrain_frequency;
        let p = self.ridge_phase;
        let s = (f * heading + p[0]).sin()
            + 0.5 * (2.3 * f * heading + p[1]).sin()
            + 0.25 * (5.1 * f * heading + p[2]).sin();
        // s in [-1.75, 1.75] mapped to [0, amplitude]
        self.env.terrain_amplitude * (s + 1.75) / 3.5
    }

    /// Colour, depth and layer for a camera ray `d` whose camera-frame z
    /// component is 1, so depth along the optical axis equals the ray
    /// parameter. `sky_t` is the sky gradient position (1 = top colour).
    fn shade(&self, d: &Vector3<f64>, sky_t: f64) -> (Layer, Rgb, f32) {
        let horiz = (d.x * d.x + d.y * d.y).sqrt();
        let elev = d.z.atan2(horiz);
        let env = &self.env;
        if elev <= self.max_elevation && elev >= self.ridge_bottom.min(-1e-9) - 0.02 {
            let heading = d.x.atan2(d.y).rem_euclid(TAU);
            let bin = ((heading / TAU * LUT_BINS as f64) as usize).min(LUT_BINS - 1);
            if let Some(c) = self.skyline[bin] {
                if elev <= c.top && elev >= c.bottom {
                    // alternate floor bands of about 3.5 m
                    let floor = ((elev.tan() * c.distance + self.eye_height) / 3.5).floor() as i64;
                    let k = if floor.rem_euclid(2) == 0 { 1.0 } else { 0.86 };
                    return (
                        Layer::Structure,
                        scale(c.color, k),
                        (c.distance / horiz) as f32,
                    );
                }
            }
            if elev <= self.ridge(heading) && elev >= self.ridge_bottom {
                let k = 0.8 + 0.2 * (elev / env.terrain_amplitude.max(1e-9)).clamp(0.0, 1.0);
                return (
                    Layer::Ridge,
                    scale(env.terrain_color, k),
                    (RIDGE_DISTANCE / horiz) as f32,
                );
            }
        }
        if d.z < 0.0 {
            let t = self.eye_height / -d.z;
            let haze = 1.0 - (-t / 2500.0).exp();
            let c = lerp_rgb(env.ground_color, env.sky_horizon, haze * 0.6);
            return (Layer::Ground, c, (t as f32).min(FAR_DEPTH));
        }
        (
            Layer::Sky,
            lerp_rgb(env.sky_horizon, env.sky_top, sky_t),
            FAR_DEPTH,
        )
    }

    /// Calls `f(index, layer, colour, depth)` for every pixel of `camera`.
    pub(crate) fn for_each_pixel<F: FnMut(usize, Layer, Rgb, f32)>(
        &self,
        camera: &Camera,
        mut f: F,
    ) {
        let k = camera.intrinsics;
        let rot_t = camera.extrinsics.rotation().transpose();
        let (right, down, forward) = (
            rot_t.column(0).into_owned(),
            rot_t.column(1).into_owned(),
            rot_t.column(2).into_owned(),
        );
        let horizon_row = k.cy + k.focal_px * camera.extrinsics.elevation.tan();
        let w = k.width as usize;
        for v in 0..k.height as usize {
            let y = (v as f64 + 0.5 - k.cy) / k.focal_px;
            let sky_t = if horizon_row > 0.0 {
                (1.0 - v as f64 / horizon_row).clamp(0.0, 1.0)
            } else {
                1.0
            };
            let row_dir = forward + down * y;
            for u in 0..w {
                let x = (u as f64 + 0.5 - k.cx) / k.focal_px;
                let d = row_dir + right * x;
                let (layer, rgb, depth) = self.shade(&d, sky_t);
                f(v * w + u, layer, rgb, depth);
            }
        }
    }
}

fn scale(c: Rgb, k: f64) -> Rgb {
    Rgb(c
        .0
        .map(|v| (f64::from(v) * k).round().clamp(0.0, 255.0) as u8))
}

/// `t = 0` gives `a`, `t = 1` gives `b` exactly.
fn lerp_rgb(a: Rgb, b: Rgb, t: f64) -> Rgb {
    Rgb(std::array::from_fn(|i| {
        (f64::from(a.0[i]) * (1.0 - t) + f64::from(b.0[i]) * t).round() as u8
    }))
}

/// Sky, terrain and skyline for one camera. Segmentation stays all zero.
pub fn generate_background(env: &EnvironmentProfile, camera: &Camera, seed: u64) -> FrameBundle {
    let backdrop = Backdrop::new(env, camera.extrinsics.rig_position.z, seed);
    let mut frame = FrameBundle::new(camera.width(), camera.height());
    backdrop.for_each_pixel(camera, |i, _, rgb, depth| {
        frame.rgb[i] = rgb.0;
        frame.depth[i] = depth;
    });
    frame
}

/// Per-pixel backdrop layer, for diagnostics and tests.
pub fn background_layers(env: &EnvironmentProfile, camera: &Camera, seed: u64) -> Vec<Layer> {
    let backdrop = Backdrop::new(env, camera.extrinsics.rig_position.z, seed);
    let mut layers = vec![Layer::Sky; camera.intrinsics.pixel_count() as usize];
    backdrop.for_each_pixel(camera, |i, layer, _, _| layers[i] = layer);
    layers
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::Rig;

    #[test]
    fn rural_has_less_skyline_than_towers() {
        let rig = Rig::default_surround(480, 270);
        for cam in &rig.cameras {
            let count = |id| {
                background_layers(&EnvironmentProfile::preset(id), cam, 3)
                    .iter()
                    .filter(|&&l| l == Layer::Structure)
                    .count()
            };
            assert!(count(ProfileId::RuralTerrain) < count(ProfileId::UrbanTowers));
        }
    }

    #[test]
    fn top_row_is_sky_top_colour() {
        let rig = Rig::default_surround(320, 180);
        for id in ProfileId::ALL {
            let env = EnvironmentProfile::preset(id);
            for cam in &rig.cameras {
                let f = generate_background(&env, cam, 17);
                assert!(
                    f.rgb[..320].iter().all(|p| *p == env.sky_top.0),
                    "{id:?} cam{}",
                    cam.index
                );
                assert!(f.segmap.iter().all(|&s| s == 0));
            }
        }
    }

    #[test]
    fn deterministic() {
        let rig = Rig::default_surround(200, 100);
        let env = EnvironmentProfile::preset(ProfileId::Downtown);
        assert_eq!(
            generate_background(&env, rig.camera(2), 9),
            generate_background(&env, rig.camera(2), 9)
        );
    }

    #[test]
    fn ground_depth_matches_plane_intersection() {
        let rig = Rig::default_surround(200, 100);
        let cam = rig.camera(0);
        let env = EnvironmentProfile::preset(ProfileId::RuralTerrain);
        let f = generate_background(&env, cam, 1);
        let layers = background_layers(&env, cam, 1);
        let (u, v) = (100usize, 99usize);
        assert_eq!(layers[v * 200 + u], Layer::Ground);
        let k = cam.intrinsics;
        let y = (v as f64 + 0.5 - k.cy) / k.focal_px;
        let expected = 1.8 / y;
        assert!((f64::from(f.depth[v * 200 + u]) - expected).abs() < 1e-3 * expected);
    }
}
