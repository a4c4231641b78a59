//! Fog and snow corruption of rendered frames.
//!
//! Both effects rewrite colour only. Segmentation and depth pass through
//! untouched, so annotations computed before or after weather are identical.

use rand::Rng;
use thiserror::Error;

use crate::render::FrameBundle;
use crate::rng::{stream_rng, Stream};
use crate::scene::{Rgb, WeatherParams};

/// Depth beyond which fog no longer accumulates, meters.
pub const FOG_MAX_DISTANCE: f64 = 2000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeatherError {
    #[error("severity {0} outside [0, 1]")]
    SeverityRange(f64),
}

fn check(severity: f64) -> Result<(), WeatherError> {
    if (0.0..=1.0).contains(&severity) {
        Ok(())
    } else {
        Err(WeatherError::SeverityRange(severity))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FogModel {
    pub fog_color: Rgb,
    /// Extinction at severity 1, per meter.
    pub beta_max: f64,
}

impl Default for FogModel {
    fn default() -> Self {
        Self {
            fog_color: Rgb::new(200, 200, 210),
            beta_max: 0.01,
        }
    }
}

impl FogModel {
    pub fn beta(&self, severity: f64) -> f64 {
        self.beta_max * severity
    }

    pub fn apply(
        &self,
        mut frame: FrameBundle,
        severity: f64,
    ) -> Result<FrameBundle, WeatherError> {
        check(severity)?;
        if severity == 0.0 {
            return Ok(frame);
        }
        let beta = self.beta(severity);
        let fog = self.fog_color.0.map(f64::from);
        for (px, &d) in frame.rgb.iter_mut().zip(&frame.depth) {
            let t = (-beta * f64::from(d).min(FOG_MAX_DISTANCE)).exp();
            for c in 0..3 {
                // written as fog + (x - fog)·T so distance to fog is monotone in T
                px[c] = (fog[c] + (f64::from(px[c]) - fog[c]) * t)
                    .round()
                    .clamp(0.0, 255.0) as u8;
            }
        }
        Ok(frame)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnowModel {
    /// Streaks per megapixel at severity 1.
    pub density: f64,
    /// Streak length range at 1080 rows, pixels.
    pub streak_length: (f64, f64),
    pub flake_color: Rgb,
    pub opacity: f64,
    /// Contrast reduction toward mid-gray at severity 1.
    pub contrast_loss: f64,
    /// Maximum deviation of streaks from vertical, radians.
    pub angle_jitter: f64,
}

impl Default for SnowModel {
    fn default() -> Self {
        Self {
            density: 2000.0,
            streak_length: (4.0, 14.0),
            flake_color: Rgb::new(245, 245, 250),
            opacity: 0.8,
            contrast_loss: 0.15,
            angle_jitter: 0.25,
        }
    }
}

impl SnowModel {
    pub fn streak_count(&self, severity: f64, width: u32, height: u32) -> usize {
        let mp = f64::from(width) * f64::from(height) / 1.0e6;
        (self.density * severity * mp).round() as usize
    }

    pub fn apply(
        &self,
        frame: FrameBundle,
        severity: f64,
        seed: u64,
    ) -> Result<FrameBundle, WeatherError> {
        self.apply_traced(frame, severity, seed).map(|(f, _)| f)
    }

    /// Like [`SnowModel::apply`], also returning the number of distinct
    /// pixels covered by streaks.
    ///
    /// Streak parameters are drawn in a fixed order from the seed, so the
    /// streaks at a lower severity are a prefix of those at a higher one.
    pub fn apply_traced(
        &self,
        mut frame: FrameBundle,
        severity: f64,
        seed: u64,
    ) -> Result<(FrameBundle, usize), WeatherError> {
        check(severity)?;
        if severity == 0.0 {
            return Ok((frame, 0));
        }
        let k = self.contrast_loss * severity;
        for px in frame.rgb.iter_mut() {
            for c in px.iter_mut() {
                *c = (f64::from(*c) + (128.0 - f64::from(*c)) * k).round() as u8;
            }
        }

        let (w, h) = (frame.width, frame.height);
        let scale = f64::from(h) / 1080.0;
        let thickness = (f64::from(h) / 720.0).round().max(1.0) as i64;
        let mut touched = vec![false; frame.rgb.len()];
        let mut rng = stream_rng(seed, Stream::Weather);
        let flake = self.flake_color.0.map(f64::from);
        for _ in 0..self.streak_count(severity, w, h) {
            let x0 = rng.random_range(0.0..f64::from(w));
            let y0 = rng.random_range(0.0..f64::from(h));
            let len = rng.random_range(self.streak_length.0..=self.streak_length.1) * scale;
            let angle = rng.random_range(-self.angle_jitter..=self.angle_jitter);
            let (dx, dy) = (angle.sin(), angle.cos());
            let steps = len.ceil().max(1.0) as usize;
            for s in 0..steps {
                let (x, y) = ((x0 + dx * s as f64) as i64, (y0 + dy * s as f64) as i64);
                for o in 0..thickness {
                    let xo = x + o;
                    if xo < 0 || y < 0 || xo >= i64::from(w) || y >= i64::from(h) {
                        continue;
                    }
                    let idx = y as usize * w as usize + xo as usize;
                    if touched[idx] {
                        continue;
                    }
                    touched[idx] = true;
                    let px = &mut frame.rgb[idx];
                    for c in 0..3 {
                        px[c] = (f64::from(px[c]) * (1.0 - self.opacity) + flake[c] * self.opacity)
                            .round() as u8;
                    }
                }
            }
        }
        let count = touched.iter().filter(|&&t| t).count();
        Ok((frame, count))
    }
}

pub fn apply_fog(frame: FrameBundle, severity: f64) -> Result<FrameBundle, WeatherError> {
    FogModel::default().apply(frame, severity)
}

pub fn apply_snow(
    frame: FrameBundle,
    severity: f64,
    seed: u64,
) -> Result<FrameBundle, WeatherError> {
    SnowModel::default().apply(frame, severity, seed)
}

/// Applies `params`; `Other` is fog followed by snow.
pub fn apply_weather(
    frame: FrameBundle,
    params: &WeatherParams,
    seed: u64,
) -> Result<FrameBundle, WeatherError> {
    match *params {
        WeatherParams::Clear => Ok(frame),
        WeatherParams::Fog { severity } => apply_fog(frame, severity),
        WeatherParams::Snow { severity } => apply_snow(frame, severity, seed),
        WeatherParams::Other { fog, snow } => apply_snow(apply_fog(frame, fog)?, snow, seed),
    }
}

/// Mean Euclidean RGB distance from `color`.
pub fn mean_distance_to(frame: &FrameBundle, color: Rgb) -> f64 {
    let sum: f64 = frame
        .rgb
        .iter()
        .map(|p| {
            (0..3)
                .map(|c| (f64::from(p[c]) - f64::from(color.0[c])).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .sum();
    sum / frame.rgb.len().max(1) as f64
}
