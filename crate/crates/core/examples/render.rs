//! Samples a scene for every camera of the rig and writes colour,
//! segmentation and a depth visualization.
//!
//! cargo run --release --example render -- [profile] [out_dir]

use std::path::PathBuf;

use aerosynth::render::{render_frame_traced, FAR_DEPTH};
use aerosynth::{
    build_asset_library, sample_scene, ContentBucket, EnvironmentProfile, ProfileId, Rig,
    WeatherParams,
};
use image::{GrayImage, Luma};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let profile = args
        .next()
        .map_or(Some(ProfileId::Downtown), |s| ProfileId::from_name(&s))
        .ok_or("unknown profile")?;
    let out = PathBuf::from(
        args.next()
            .unwrap_or_else(|| "target/example_render".into()),
    );
    std::fs::create_dir_all(&out)?;

    let rig = Rig::default_surround(1280, 720);
    let lib = build_asset_library(0);
    let env = EnvironmentProfile::preset(profile);
    for cam in &rig.cameras {
        let scene = sample_scene(
            ContentBucket::Both,
            &env,
            WeatherParams::Clear,
            &lib,
            cam,
            40 + cam.index as u64,
        )?;
        let t = std::time::Instant::now();
        let (frame, coverage) = render_frame_traced(&scene, cam, &lib);
        let ms = t.elapsed().as_secs_f64() * 1e3;

        let stem = format!("{}_cam{}", profile.name(), cam.index);
        frame.to_rgb_image().save(out.join(format!("{stem}.png")))?;
        if let Some(seg) = frame.segmap_image() {
            seg.save(out.join(format!("{stem}_seg.png")))?;
        }
        let depth = GrayImage::from_fn(frame.width, frame.height, |x, y| {
            let d = frame.depth[frame.index(x, y)];
            if d >= FAR_DEPTH {
                Luma([0])
            } else {
                Luma([(255.0 - 40.0 * d.max(1.0).ln()).clamp(0.0, 255.0) as u8])
            }
        });
        depth.save(out.join(format!("{stem}_depth.png")))?;
        println!(
            "{stem}: {} instances, {} visible, {ms:.0} ms",
            scene.instances.len(),
            coverage.pixels.len()
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}
