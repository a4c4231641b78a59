//! Samples drone and bird flight paths and a flock around one leader.
//!
//! cargo run --example trajectory

use aerosynth::trajectory::{pose_at, spawn_flock, TrajectorySpec};
use nalgebra::Point3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let duration = 60.0;
    let origin = Point3::new(0.0, 30.0, 0.0);
    let paths = [
        (
            "orbit",
            TrajectorySpec::circular(origin, 25.0, 20.0, 0.15, 0.0),
        ),
        (
            "spiral",
            TrajectorySpec::spiral(origin, (40.0, 10.0), (8.0, 35.0), -0.2, 1.0),
        ),
        (
            "bird",
            TrajectorySpec::bird(origin, (30.0, 20.0), (15.0, 25.0), 0.25, 0.5, 0.6, 2.5),
        ),
    ];
    for (name, spec) in &paths {
        spec.validate()?;
        println!("{name}: max speed {:.2} m/s", spec.max_speed(duration));
        for t in [0.0, 15.0, 30.0, 45.0, 60.0] {
            let p = pose_at(spec, t, duration)?;
            println!(
                "  t={t:>4.1}s  pos ({:>6.2}, {:>6.2}, {:>5.2})  yaw {:>6.1}  pitch {:>5.1}  roll {:>5.1}",
                p.position.x,
                p.position.y,
                p.position.z,
                p.yaw.to_degrees(),
                p.pitch.to_degrees(),
                p.roll.to_degrees()
            );
        }
    }

    let flock = spawn_flock(&paths[2].1, 12, 99)?;
    let at = |s: &TrajectorySpec| pose_at(s, 20.0, duration).map(|p| p.position);
    let lead = at(&paths[2].1)?;
    let spread = flock
        .iter()
        .map(|s| at(s).map(|p| (p - lead).norm()))
        .collect::<Result<Vec<_>, _>>()?;
    println!(
        "flock of {} at t=20s, distance from leader {:.2}..{:.2} m",
        flock.len(),
        spread.iter().cloned().fold(f64::INFINITY, f64::min),
        spread.iter().cloned().fold(0.0, f64::max)
    );
    Ok(())
}
