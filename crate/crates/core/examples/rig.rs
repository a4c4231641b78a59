//! Builds the six-camera surround rig and shows how a point hands over
//! between neighbouring cameras.
//!
//! cargo run --example rig

use aerosynth::Rig;
use nalgebra::Point3;

fn main() {
    let rig = Rig::default_surround(1920, 1080);
    let k = rig.intrinsics();
    println!(
        "focal {:.3} px, hfov {:.1} deg, full circle: {}",
        k.focal_px,
        rig.hfov.to_degrees(),
        rig.covers_full_circle()
    );
    for cam in &rig.cameras {
        let (lo, hi) = cam.horizontal_interval();
        println!(
            "cam{} azimuth {:>5.1} deg, covers [{:>6.1}, {:>6.1}]",
            cam.index,
            cam.extrinsics.azimuth.to_degrees(),
            lo.to_degrees(),
            hi.to_degrees()
        );
    }

    // a drone 40 m out, sweeping through heading 30 deg at 12 m altitude
    for deg in [26.0f64, 29.9, 30.0, 30.1, 34.0] {
        let h = deg.to_radians();
        let p = Point3::new(40.0 * h.sin(), 40.0 * h.cos(), 12.0);
        let seen: Vec<String> = rig
            .cameras
            .iter()
            .filter_map(|c| {
                c.project(&p)
                    .ok()
                    .filter(|&(u, _)| (0.0..=1920.0).contains(&u))
                    .map(|(u, v)| format!("cam{} ({u:.1}, {v:.1})", c.index))
            })
            .collect();
        println!("heading {deg:>4.1}: {}", seen.join(", "));
    }
}
