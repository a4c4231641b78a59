//! Command-line front end: generate, stats, validate, preview and split.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use image::{Rgb as Pixel, RgbImage};
use serde::Deserialize;

use crate::annotation::to_pixel_box;
use crate::dataset::{
    compute_stats, default_val_fraction, format_tables, generate_dataset, plan_dataset,
    scan_dataset, split_dataset, validate_dataset, CompositionTarget, DatasetError, PlanProfile,
    RigConfig,
};
use crate::scene::ClassId;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;
pub const EXIT_GENERATION: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("generation failed: {0}")]
    Generation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Generation(_) => EXIT_GENERATION,
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        let msg = e.to_string();
        match e {
            DatasetError::Io { .. } | DatasetError::Image { .. } => CliError::Io(msg),
            DatasetError::GenerationFailed { .. } => CliError::Generation(msg),
            DatasetError::LayoutInvalid { .. } | DatasetError::EmptyStratum { .. } => {
                CliError::Validation(msg)
            }
            DatasetError::InvalidTargets(_)
            | DatasetError::InvalidArgument(_)
            | DatasetError::Camera(_) => CliError::Config(msg),
        }
    }
}

/// Settings file. Every key is optional; command-line flags take precedence.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub total: Option<u64>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub profile: Option<String>,
    pub width: Option<u32>,
    pub height: Option<u32>,
    pub write_masks: Option<bool>,
    pub write_depth: Option<bool>,
    pub val_fraction: Option<f64>,
    pub preview_count: Option<usize>,
    pub rig: Option<RigConfig>,
    pub targets: Option<Vec<CompositionTarget>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "aerosynth",
    version,
    about = "Synthetic drone and bird imagery with exact labels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML settings file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan and render a dataset
    Generate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        total: Option<u64>,
        #[arg(long, env = "AEROSYNTH_WORKERS")]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// `reference` or `custom` (targets from the config file)
        #[arg(long)]
        profile: Option<String>,
        #[arg(long)]
        width: Option<u32>,
        #[arg(long)]
        height: Option<u32>,
        #[arg(long)]
        masks: bool,
        #[arg(long)]
        depth: bool,
    },
    /// Print composition tables recomputed from files
    Stats {
        dir: PathBuf,
        /// Where to write the machine-readable copy [default: DIR/meta/stats.json]
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check layout, labels and manifest; nonzero exit on any violation
    Validate { dir: PathBuf },
    /// Copy sample images with their boxes drawn in
    Preview {
        dir: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        preview_count: Option<usize>,
        /// Destination directory [default: DIR_preview]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write stratified train/val listings
    Split {
        dir: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        val_fraction: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    common
        .config
        .as_deref()
        .map_or(Ok(RunConfig::default()), RunConfig::load)
}

/// Parses `argv` and runs the command, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate {
            common,
            out,
            total,
            workers,
            seed,
            profile,
            width,
            height,
            masks,
            depth,
        } => {
            let cfg = load_config(&common)?;
            let out = out.or(cfg.out).ok_or_else(|| {
                CliError::Config("no output directory: pass --out or set `out`".into())
            })?;
            let workers = workers.or(cfg.workers).unwrap_or(1);
            if workers == 0 {
                return Err(CliError::Config("workers must be at least 1".into()));
            }
            let profile_name = profile
                .or(cfg.profile)
                .unwrap_or_else(|| "reference".into());
            let profile = PlanProfile::from_name(&profile_name).ok_or_else(|| {
                CliError::Config(format!("profile: unknown value {profile_name:?}"))
            })?;
            let targets = cfg.targets;
            let total = match (total.or(cfg.total), profile, &targets) {
                (Some(t), _, _) => t,
                (None, PlanProfile::Custom, Some(ts)) => ts.iter().map(|t| t.count).sum(),
                _ => {
                    return Err(CliError::Config(
                        "total: pass --total or set `total`".into(),
                    ))
                }
            };
            let mut plan =
                plan_dataset(total, profile, targets)?.with_seed(seed.or(cfg.seed).unwrap_or(0));
            plan.width = width.or(cfg.width).unwrap_or(plan.width);
            plan.height = height.or(cfg.height).unwrap_or(plan.height);
            plan.rig = cfg.rig.unwrap_or(plan.rig);
            plan.write_masks = masks || cfg.write_masks.unwrap_or(false);
            plan.write_depth = depth || cfg.write_depth.unwrap_or(false);
            let summary = generate_dataset(&plan, &out, workers)?;
            print!("{}", format_tables(&summary));
            println!(
                "wrote {} images to {} in {:.1}s",
                summary.total,
                out.display(),
                summary.generation_seconds.unwrap_or(0.0)
            );
            Ok(())
        }
        Command::Stats { dir, json } => {
            let summary = compute_stats(&dir)?;
            print!("{}", format_tables(&summary));
            let path = json.unwrap_or_else(|| dir.join("meta").join("stats.json"));
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(())
        }
        Command::Validate { dir } => {
            let report = validate_dataset(&dir)?;
            for p in &report.problems {
                eprintln!("{p}");
            }
            if report.is_ok() {
                println!("{}: {} images valid", dir.display(), report.images);
                Ok(())
            } else {
                Err(CliError::Validation(format!(
                    "{} problem(s) in {}; first: {}",
                    report.problems.len(),
                    dir.display(),
                    report.problems[0]
                )))
            }
        }
        Command::Preview {
            dir,
            common,
            preview_count,
            out,
        } => {
            let cfg = load_config(&common)?;
            let count = preview_count.or(cfg.preview_count).unwrap_or(8);
            let out = out.unwrap_or_else(|| {
                let mut name = dir.file_name().unwrap_or_default().to_os_string();
                name.push("_preview");
                dir.with_file_name(name)
            });
            let n = write_previews(&dir, &out, count)?;
            println!("wrote {n} preview(s) to {}", out.display());
            Ok(())
        }
        Command::Split {
            dir,
            common,
            val_fraction,
            seed,
        } => {
            let cfg = load_config(&common)?;
            let f = val_fraction
                .or(cfg.val_fraction)
                .unwrap_or_else(default_val_fraction);
            let listing = split_dataset(&dir, f, seed.or(cfg.seed).unwrap_or(0))?;
            println!("train {} / val {}", listing.train.len(), listing.val.len());
            Ok(())
        }
    }
}

const DRONE_BOX: Pixel<u8> = Pixel([255, 40, 40]);
const BIRD_BOX: Pixel<u8> = Pixel([255, 220, 0]);

fn draw_rect(img: &mut RgbImage, b: &crate::annotation::PixelBox, color: Pixel<u8>) {
    for x in b.x_min..b.x_max {
        img.put_pixel(x, b.y_min, color);
        img.put_pixel(x, b.y_max - 1, color);
    }
    for y in b.y_min..b.y_max {
        img.put_pixel(b.x_min, y, color);
        img.put_pixel(b.x_max - 1, y, color);
    }
}

/// Writes copies of the first `count` images with their label boxes drawn.
pub fn write_previews(dir: &Path, out: &Path, count: usize) -> Result<usize, CliError> {
    if out == dir
        || ["images", "labels", "masks", "meta"]
            .iter()
            .any(|d| out.starts_with(dir.join(d)))
    {
        return Err(CliError::Config(
            "preview output must not be inside the dataset's image folders".into(),
        ));
    }
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let images = scan_dataset(dir)?;
    let mut written = 0;
    for s in images.iter().take(count) {
        let src = dir.join(&s.path);
        let mut img = image::open(&src)
            .map_err(|e| CliError::Io(format!("{}: {e}", src.display())))?
            .to_rgb8();
        for r in &s.records {
            let b = to_pixel_box(r, s.width, s.height);
            if b.is_valid_for(s.width, s.height) {
                draw_rect(
                    &mut img,
                    &b,
                    if r.class == ClassId::Drone {
                        DRONE_BOX
                    } else {
                        BIRD_BOX
                    },
                );
            }
        }
        let dst = out.join(format!("{}.png", s.stem));
        img.save(&dst)
            .map_err(|e| CliError::Io(format!("{}: {e}", dst.display())))?;
        written += 1;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_unknown_keys() {
        let e = toml::from_str::<RunConfig>("totl = 5").unwrap_err();
        assert!(e.message().contains("totl"));
        let c: RunConfig = toml::from_str("total = 5\nseed = 2\n[rig]\ncameras = 4\nhfov_deg = 90.0\nheight = 2.0\nelevation_deg = 5.0\n").unwrap();
        assert_eq!(c.total, Some(5));
        assert_eq!(c.rig.unwrap().cameras, 4);
    }

    #[test]
    fn custom_targets_in_config() {
        let c: RunConfig = toml::from_str(
            r#"
            profile = "custom"
            [[targets]]
            subset = "vfx"
            bucket = "vfx_drone"
            scene = "park"
            condition = { condition = "clear" }
            count = 12
            "#,
        )
        .unwrap();
        assert_eq!(c.targets.unwrap()[0].count, 12);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["aerosynth", "generate", "--total", "20"]), EXIT_CONFIG);
        assert_eq!(run(["aerosynth", "frobnicate"]), EXIT_CONFIG);
        assert_eq!(
            run(["aerosynth", "stats", "/nonexistent/dataset"]),
            EXIT_VALIDATION
        );
    }
}
