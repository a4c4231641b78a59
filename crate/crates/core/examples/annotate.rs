//! Renders a scene, labels it, and prints the boxes with their pixel
//! coordinates next to the label file text.
//!
//! cargo run --release --example annotate -- [seed]

use aerosynth::annotation::{annotate_frame, to_pixel_box};
use aerosynth::{
    build_asset_library, render_frame, sample_scene, ContentBucket, EnvironmentProfile, ProfileId,
    Rig, WeatherParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(17), |s| s.parse())?;
    let rig = Rig::default_surround(1920, 1080);
    let lib = build_asset_library(0);
    let env = EnvironmentProfile::preset(ProfileId::Park);
    let cam = rig.camera(0);
    let scene = sample_scene(
        ContentBucket::Both,
        &env,
        WeatherParams::Clear,
        &lib,
        cam,
        seed,
    )?;
    let frame = render_frame(&scene, cam, &lib);
    let ann = annotate_frame(
        &frame.segmap,
        frame.width,
        frame.height,
        &scene.instance_table(&lib),
    )?;

    println!(
        "{} kept, {} dropped below the size floor, oversize {:?}",
        ann.records.len(),
        ann.dropped,
        ann.oversize
    );
    for (id, n) in ann.fragments.iter().filter(|(_, &n)| n > 1) {
        println!("instance {id} split into {n} pieces by occlusion");
    }
    for r in &ann.records {
        let b = to_pixel_box(r, frame.width, frame.height);
        println!(
            "{:?}: x {}..{} y {}..{} ({}x{} px)",
            r.class,
            b.x_min,
            b.x_max,
            b.y_min,
            b.y_max,
            b.width(),
            b.height()
        );
    }
    print!("{}", ann.label_text());
    Ok(())
}
