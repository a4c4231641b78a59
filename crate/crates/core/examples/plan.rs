//! Prints the planned composition for a requested dataset size.
//!
//! cargo run --example plan -- [total]

use aerosynth::dataset::{plan_dataset, PlanProfile, Subset};
use aerosynth::scene::{ContentBucket, WeatherCondition};
use aerosynth::ProfileId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let total: u64 = std::env::args().nth(1).map_or(Ok(178_639), |s| s.parse())?;
    let plan = plan_dataset(total, PlanProfile::Reference, None)?;

    println!(
        "{:<10}{:>10}{:>10}{:>10}{:>10}{:>10}",
        "subset", "drone", "bird", "both", "vfx", "total"
    );
    for s in Subset::ALL {
        print!("{:<10}", s.name());
        for b in ContentBucket::ALL {
            print!("{:>10}", plan.count(|t| t.subset == s && t.bucket == b));
        }
        println!("{:>10}", plan.subset_total(s));
    }
    println!();
    print!("{:<10}", "scene");
    for s in Subset::ALL {
        print!("{:>10}", s.name());
    }
    println!();
    for p in ProfileId::ALL {
        print!("{:<16}", p.name());
        for s in Subset::ALL {
            print!("{:>10}", plan.count(|t| t.subset == s && t.scene == p));
        }
        println!();
    }
    println!();
    for c in [
        WeatherCondition::Fog,
        WeatherCondition::Snow,
        WeatherCondition::Other,
    ] {
        println!("{:<8}{:>8}", c.name(), plan.condition_total(c));
    }
    println!("{} distinct targets", plan.targets.len());
    Ok(())
}
