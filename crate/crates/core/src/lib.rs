//! Procedural synthetic imagery of drones and birds seen from a ground-level
//! multi-camera rig, with pixel-exact instance masks and YOLO labels.

pub mod annotation;
pub mod camera;
pub mod cli;
pub mod dataset;
pub mod render;
pub mod rng;
pub mod scene;
pub mod trajectory;
pub mod weather;

pub use camera::{build_rig, Camera, CameraExtrinsics, CameraIntrinsics, Rig};
pub use render::{render_frame, FrameBundle};
pub use scene::{
    build_asset_library, sample_scene, ClassId, ContentBucket, EnvironmentProfile, ProfileId,
    Scene, WeatherParams,
};
