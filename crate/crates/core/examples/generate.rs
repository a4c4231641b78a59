//! Plans and generates a small dataset, then prints its composition tables.
//!
//! cargo run --release --example generate -- [total] [out_dir] [workers]

use std::path::PathBuf;

use aerosynth::dataset::{
    compute_stats, format_tables, generate_dataset, plan_dataset, PlanProfile,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let total: u64 = args.next().map_or(Ok(40), |s| s.parse())?;
    let out = PathBuf::from(
        args.next()
            .unwrap_or_else(|| "target/example_dataset".into()),
    );
    let workers: usize = args.next().map_or(Ok(2), |s| s.parse())?;

    let plan = plan_dataset(total, PlanProfile::Reference, None)?
        .with_seed(7)
        .with_resolution(640, 360);
    let t = std::time::Instant::now();
    generate_dataset(&plan, &out, workers)?;
    println!(
        "{total} images in {:.2}s -> {}",
        t.elapsed().as_secs_f64(),
        out.display()
    );
    print!("{}", format_tables(&compute_stats(&out)?));
    Ok(())
}
