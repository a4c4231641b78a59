//! Pinhole camera rig.
//!
//! World frame is right-handed with `+x` east, `+y` north and `+z` up.
//! Camera azimuth is a compass heading: 0 looks north and angles grow
//! clockwise seen from above, so camera `i + 1` sits immediately to the
//! right of camera `i`. The camera frame is `x` right, `y` down, `z` forward.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Point3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Points closer than this along the optical axis are rejected.
pub const NEAR_PLANE: f64 = 0.01;

/// Default mounting height of the rig above the ground plane, in meters.
pub const DEFAULT_RIG_HEIGHT: f64 = 1.8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CameraError {
    #[error("invalid field of view {0} rad: must lie strictly between 0 and pi")]
    InvalidFov(f64),
    #[error("camera count must be at least 1")]
    NoCameras,
    #[error("image dimensions must be positive, got {width}x{height}")]
    InvalidResolution { width: u32, height: u32 },
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum ProjectionError {
    #[error("point lies behind the camera (z = {0:.4} m)")]
    BehindCamera(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub width: u32,
    pub height: u32,
    pub focal_px: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn from_hfov(width: u32, height: u32, hfov: f64) -> Result<Self, CameraError> {
        if !(hfov > 0.0 && hfov < PI) {
            return Err(CameraError::InvalidFov(hfov));
        }
        if width == 0 || height == 0 {
            return Err(CameraError::InvalidResolution { width, height });
        }
        let half_w = f64::from(width) / 2.0;
        Ok(Self {
            width,
            height,
            focal_px: half_w / (hfov / 2.0).tan(),
            cx: half_w,
            cy: f64::from(height) / 2.0,
        })
    }

    pub fn hfov(&self) -> f64 {
        2.0 * (self.cx / self.focal_px).atan()
    }

    pub fn vfov(&self) -> f64 {
        2.0 * (self.cy / self.focal_px).atan()
    }

    pub fn pixel_count(&self) -> u64 {
        u64::from(self.width) * u64::from(self.height)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraExtrinsics {
    pub rig_position: Point3<f64>,
    /// Compass heading of the optical axis, radians clockwise from north.
    pub azimuth: f64,
    /// Tilt of the optical axis above the horizon, radians.
    pub elevation: f64,
}

impl CameraExtrinsics {
    /// Rows are the camera axes (right, down, forward) expressed in world
    /// coordinates, so `R * (p - c)` maps a world point into the camera frame.
    pub fn rotation(&self) -> Matrix3<f64> {
        let (sa, ca) = self.azimuth.sin_cos();
        let (se, ce) = self.elevation.sin_cos();
        let forward = Vector3::new(ce * sa, ce * ca, se);
        let right = Vector3::new(ca, -sa, 0.0);
        let down = forward.cross(&right);
        Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()])
    }
}

/// Cached world-to-camera transform.
#[derive(Clone, Copy, Debug)]
pub struct ViewTransform {
    pub rotation: Matrix3<f64>,
    pub origin: Point3<f64>,
}

impl ViewTransform {
    #[inline]
    pub fn to_camera(&self, p: &Point3<f64>) -> Vector3<f64> {
        self.rotation * (p - self.origin)
    }

    #[inline]
    pub fn to_world(&self, v: &Vector3<f64>) -> Point3<f64> {
        self.origin + self.rotation.transpose() * v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub index: usize,
    pub intrinsics: CameraIntrinsics,
    pub extrinsics: CameraExtrinsics,
}

impl Camera {
    pub fn view(&self) -> ViewTransform {
        ViewTransform {
            rotation: self.extrinsics.rotation(),
            origin: self.extrinsics.rig_position,
        }
    }

    pub fn width(&self) -> u32 {
        self.intrinsics.width
    }

    pub fn height(&self) -> u32 {
        self.intrinsics.height
    }

    /// Projects a point already expressed in the camera frame.
    #[inline]
    pub fn project_camera_point(&self, p: &Vector3<f64>) -> Result<(f64, f64), ProjectionError> {
        if p.z <= NEAR_PLANE {
            return Err(ProjectionError::BehindCamera(p.z));
        }
        let k = &self.intrinsics;
        Ok((k.cx + k.focal_px * p.x / p.z, k.cy + k.focal_px * p.y / p.z))
    }

    /// Sub-pixel image coordinates of a world point. The result may fall
    /// outside the image; clipping is left to the rasterizer.
    pub fn project(&self, world: &Point3<f64>) -> Result<(f64, f64), ProjectionError> {
        self.project_camera_point(&self.view().to_camera(world))
    }

    /// World point at optical-axis depth `depth` behind pixel `(u, v)`.
    pub fn unproject(&self, u: f64, v: f64, depth: f64) -> Point3<f64> {
        let k = &self.intrinsics;
        let cam = Vector3::new(
            (u - k.cx) / k.focal_px * depth,
            (v - k.cy) / k.focal_px * depth,
            depth,
        );
        self.view().to_world(&cam)
    }

    /// Horizontal angular interval `[start, end)` covered by this camera,
    /// as compass headings. `end` may exceed `2*pi`.
    pub fn horizontal_interval(&self) -> (f64, f64) {
        let half = self.intrinsics.hfov() / 2.0;
        (
            self.extrinsics.azimuth - half,
            self.extrinsics.azimuth + half,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rig {
    pub hfov: f64,
    pub cameras: Vec<Camera>,
}

/// Lays out `camera_count` identical cameras evenly in azimuth around
/// `rig_position`, camera `i` at heading `i * 2pi / camera_count`.
pub fn build_rig(
    camera_count: usize,
    hfov: f64,
    width: u32,
    height: u32,
    rig_position: Point3<f64>,
) -> Result<Rig, CameraError> {
    if camera_count == 0 {
        return Err(CameraError::NoCameras);
    }
    let intrinsics = CameraIntrinsics::from_hfov(width, height, hfov)?;
    let step = TAU / camera_count as f64;
    let cameras = (0..camera_count)
        .map(|index| Camera {
            index,
            intrinsics,
            extrinsics: CameraExtrinsics {
                rig_position,
                azimuth: index as f64 * step,
                elevation: 0.0,
            },
        })
        .collect();
    Ok(Rig { hfov, cameras })
}

impl Rig {
    /// Six 60 degree cameras at the default mounting height.
    pub fn default_surround(width: u32, height: u32) -> Self {
        build_rig(
            6,
            PI / 3.0,
            width,
            height,
            Point3::new(0.0, 0.0, DEFAULT_RIG_HEIGHT),
        )
        .expect("default rig parameters are valid")
    }

    pub fn with_elevation(mut self, elevation: f64) -> Self {
        for cam in &mut self.cameras {
            cam.extrinsics.elevation = elevation;
        }
        self
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn camera(&self, index: usize) -> &Camera {
        &self.cameras[index]
    }

    pub fn position(&self) -> Point3<f64> {
        self.cameras[0].extrinsics.rig_position
    }

    pub fn intrinsics(&self) -> CameraIntrinsics {
        self.cameras[0].intrinsics
    }

    /// True when the cameras' horizontal fields of view tile the full circle.
    pub fn covers_full_circle(&self) -> bool {
        (self.len() as f64 * self.hfov - TAU).abs() < 1e-9
    }
}
