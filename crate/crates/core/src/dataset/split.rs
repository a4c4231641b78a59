//! Stratified train/validation split.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;

use super::plan::largest_remainder;
use super::stats::scan_dataset;
use super::{io_err, DatasetError};
use crate::rng::{mix, stream_rng, Stream};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SplitListing {
    pub train: Vec<String>,
    pub val: Vec<String>,
}

/// Splits images stratified by subset × realized bucket and writes
/// `splits/train.txt` and `splits/val.txt`, one relative image path per line.
///
/// The validation total is `round(val_fraction · N)`, apportioned across
/// strata by size with at least one training image left in each stratum.
pub fn split_dataset(
    root: &Path,
    val_fraction: f64,
    seed: u64,
) -> Result<SplitListing, DatasetError> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(DatasetError::InvalidArgument(format!(
            "val fraction {val_fraction} outside (0, 1)"
        )));
    }
    let mut strata: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for s in scan_dataset(root)? {
        let bucket = s.bucket().map_or("unrealized", |b| b.name());
        let path = s.path.to_string_lossy().replace('\\', "/");
        strata
            .entry(format!("{}/{}", s.info.subset.name(), bucket))
            .or_default()
            .push(path);
    }
    for (name, paths) in &strata {
        if paths.len() < 2 {
            return Err(DatasetError::EmptyStratum {
                stratum: name.clone(),
                count: paths.len(),
            });
        }
    }
    let sizes: Vec<u64> = strata.values().map(|v| v.len() as u64).collect();
    let n: u64 = sizes.iter().sum();
    let val_total = (val_fraction * n as f64).round() as u64;
    let quotas = largest_remainder(&sizes, val_total);

    let mut listing = SplitListing::default();
    for (k, (paths, &q)) in strata.into_values().zip(&quotas).enumerate() {
        let mut paths = paths;
        paths.sort();
        paths.shuffle(&mut stream_rng(mix(seed, k as u64), Stream::Split));
        let q = (q as usize).min(paths.len() - 1);
        listing.val.extend(paths.drain(..q));
        listing.train.extend(paths);
    }
    listing.train.sort();
    listing.val.sort();

    let dir = root.join("splits");
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    for (name, list) in [("train.txt", &listing.train), ("val.txt", &listing.val)] {
        let text: String = list.iter().map(|p| format!("{p}\n")).collect();
        let path = dir.join(name);
        fs::write(&path, text).map_err(io_err(&path))?;
    }
    Ok(listing)
}
