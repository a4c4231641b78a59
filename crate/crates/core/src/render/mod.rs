//! Deterministic software renderer producing co-registered colour,
//! instance segmentation and depth for one camera.

mod background;
mod raster;

use std::collections::BTreeMap;

use image::{ImageBuffer, Luma, RgbImage};
use nalgebra::Vector3;

pub use background::{background_layers, generate_background, Layer};
pub use raster::{rasterize_triangle, ScreenTriangle, ScreenVertex};

use crate::camera::{Camera, NEAR_PLANE};
use crate::scene::{AssetLibrary, AssetRef, Rgb, Scene};

/// Depth written where nothing but sky is seen, meters.
pub const FAR_DEPTH: f32 = 1.0e6;

const FLOCK_COLOR: Rgb = Rgb::new(38, 36, 40);

#[derive(Clone, Debug, PartialEq)]
pub struct FrameBundle {
    pub width: u32,
    pub height: u32,
    pub rgb: Vec<[u8; 3]>,
    /// Instance id per pixel, 0 for background and unannotated clutter.
    pub segmap: Vec<u32>,
    /// Camera-space depth in meters; [`FAR_DEPTH`] for sky.
    pub depth: Vec<f32>,
}

impl FrameBundle {
    pub fn new(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            rgb: vec![[0; 3]; n],
            segmap: vec![0; n],
            depth: vec![FAR_DEPTH; n],
        }
    }

    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    pub fn to_rgb_image(&self) -> RgbImage {
        let raw = self.rgb.iter().flatten().copied().collect();
        RgbImage::from_raw(self.width, self.height, raw).expect("buffer matches dimensions")
    }

    pub fn from_rgb_image(img: &RgbImage) -> Self {
        let mut f = Self::new(img.width(), img.height());
        for (dst, px) in f.rgb.iter_mut().zip(img.pixels()) {
            *dst = px.0;
        }
        f
    }

    /// Segmentation as a 16-bit single-channel image, or `None` if an id
    /// does not fit in 16 bits.
    pub fn segmap_image(&self) -> Option<ImageBuffer<Luma<u16>, Vec<u16>>> {
        let ids: Option<Vec<u16>> = self
            .segmap
            .iter()
            .map(|&id| u16::try_from(id).ok())
            .collect();
        ImageBuffer::from_raw(self.width, self.height, ids?)
    }

    /// Depth as little-endian `f32`, row-major.
    pub fn depth_bytes(&self) -> Vec<u8> {
        self.depth.iter().flat_map(|d| d.to_le_bytes()).collect()
    }
}

/// Visible pixel count per rendered instance id, including unannotated
/// clutter that never reaches the segmentation map.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Coverage {
    pub pixels: BTreeMap<u32, u64>,
}

pub fn render_frame(scene: &Scene, camera: &Camera, library: &AssetLibrary) -> FrameBundle {
    render_frame_traced(scene, camera, library).0
}

/// Renders `scene` through `camera` and reports per-instance visibility.
pub fn render_frame_traced(
    scene: &Scene,
    camera: &Camera,
    library: &AssetLibrary,
) -> (FrameBundle, Coverage) {
    let mut frame = generate_background(&scene.environment, camera, scene.seed);
    let mut owner = vec![0u32; frame.segmap.len()];
    let view = camera.view();
    let k = camera.intrinsics;
    let sun = scene.environment.sun_direction();
    let ambient = scene.environment.ambient_level;

    for inst in &scene.instances {
        let base = match inst.asset {
            AssetRef::Library(id) => match library.get(id) {
                Some(a) => a.base_color,
                None => continue,
            },
            AssetRef::FlockParticle { .. } => FLOCK_COLOR,
        };
        let seg_id = if inst.annotatable {
            inst.instance_id
        } else {
            0
        };
        for tri in scene.world_triangles(inst, library) {
            let [a, b, c] = tri.0;
            let Some(n) = (b - a).cross(&(c - a)).try_normalize(1e-15) else {
                continue;
            };
            let light = ambient + (1.0 - ambient) * n.dot(&sun).abs();
            let color = Rgb(base
                .0
                .map(|ch| (f64::from(ch) * light).round().clamp(0.0, 255.0) as u8));
            let cam = tri.0.map(|p| view.to_camera(&p));
            for screen in clip_near(&cam) {
                let st = ScreenTriangle(screen.map(|p| {
                    ScreenVertex::new(
                        k.cx + k.focal_px * p.x / p.z,
                        k.cy + k.focal_px * p.y / p.z,
                        p.z,
                    )
                }));
                let (w, h) = (frame.width, frame.height);
                let FrameBundle {
                    rgb, segmap, depth, ..
                } = &mut frame;
                raster::scan(&st, w, h, depth, |idx, _| {
                    rgb[idx] = color.0;
                    segmap[idx] = seg_id;
                    owner[idx] = inst.instance_id;
                });
            }
        }
    }

    let mut coverage = Coverage::default();
    for &id in owner.iter().filter(|&&id| id != 0) {
        *coverage.pixels.entry(id).or_default() += 1;
    }
    (frame, coverage)
}

/// Clips a camera-space triangle against the near plane and fans the result.
fn clip_near(tri: &[Vector3<f64>; 3]) -> Vec<[Vector3<f64>; 3]> {
    let inside = |p: &Vector3<f64>| p.z >= NEAR_PLANE;
    if tri.iter().all(inside) {
        return vec![*tri];
    }
    let mut poly: Vec<Vector3<f64>> = Vec::with_capacity(4);
    for i in 0..3 {
        let (cur, next) = (tri[i], tri[(i + 1) % 3]);
        if inside(&cur) {
            poly.push(cur);
        }
        if inside(&cur) != inside(&next) {
            let t = (NEAR_PLANE - cur.z) / (next.z - cur.z);
            let mut p = cur + (next - cur) * t;
            p.z = NEAR_PLANE;
            poly.push(p);
        }
    }
    (1..poly.len().saturating_sub(1))
        .map(|i| [poly[0], poly[i], poly[i + 1]])
        .collect()
}
