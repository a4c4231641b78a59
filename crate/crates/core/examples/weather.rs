//! Renders one frame and applies the fog and snow severity grids, checking
//! that the segmentation never changes.
//!
//! cargo run --release --example weather -- [out_dir]

use std::path::PathBuf;

use aerosynth::scene::{FOG_GRID_PERCENT, SNOW_GRID_PERCENT};
use aerosynth::weather::{apply_weather, mean_distance_to, FogModel, SnowModel};
use aerosynth::{
    build_asset_library, render_frame, sample_scene, ContentBucket, EnvironmentProfile, ProfileId,
    Rig, WeatherParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "target/example_weather".into()),
    );
    std::fs::create_dir_all(&out)?;
    let rig = Rig::default_surround(960, 540);
    let lib = build_asset_library(0);
    let env = EnvironmentProfile::preset(ProfileId::BridgeWater);
    let cam = rig.camera(2);
    let scene = sample_scene(
        ContentBucket::Both,
        &env,
        WeatherParams::Clear,
        &lib,
        cam,
        5,
    )?;
    let clear = render_frame(&scene, cam, &lib);
    clear.to_rgb_image().save(out.join("clear00.png"))?;

    let fog_color = FogModel::default().fog_color;
    let mut grid: Vec<WeatherParams> = FOG_GRID_PERCENT
        .iter()
        .map(|&p| WeatherParams::fog_percent(p))
        .collect();
    grid.extend(
        SNOW_GRID_PERCENT
            .iter()
            .map(|&p| WeatherParams::snow_percent(p)),
    );
    grid.push(WeatherParams::other_percent(6, 25));
    for w in &grid {
        let f = apply_weather(clear.clone(), w, scene.seed)?;
        assert_eq!(f.segmap, clear.segmap);
        let extra = match *w {
            WeatherParams::Snow { severity } => {
                format!(
                    ", {} streaks",
                    SnowModel::default().streak_count(severity, f.width, f.height)
                )
            }
            _ => String::new(),
        };
        println!(
            "{:<10} distance to fog colour {:>6.1}{extra}",
            w.token(),
            mean_distance_to(&f, fog_color)
        );
        f.to_rgb_image()
            .save(out.join(format!("{}.png", w.token())))?;
    }
    println!("wrote {}", out.display());
    Ok(())
}
