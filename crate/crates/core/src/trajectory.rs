//! Parametric flight paths.
//!
//! All kinds share one closed form: a point orbiting `center` at angle
//! `omega * t + phase`, with radius and altitude linearly interpolated over
//! the sequence duration. Birds and flock particles add a vertical bob and
//! a banking roll.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{Point3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{stream_rng, Stream};
use crate::scene::Pose;

/// Bank angle limit for birds, radians.
pub const MAX_BANK: f64 = 30.0 * std::f64::consts::PI / 180.0;

/// Roll per unit tangential speed, rad per (m/s).
pub const BANK_GAIN: f64 = 0.02;

/// Flock particle centres stay within this distance of the group centre.
pub const FLOCK_JITTER_RADIUS: f64 = 3.0;

pub const FLOCK_SIZE_MIN: usize = 10;
pub const FLOCK_SIZE_MAX: usize = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("time {t} s outside sequence [0, {duration}] s")]
    OutOfRange { t: f64, duration: f64 },
    #[error("invalid trajectory: {0}")]
    InvalidSpec(&'static str),
    #[error("flock size {0} outside [{FLOCK_SIZE_MIN}, {FLOCK_SIZE_MAX}]")]
    FlockSize(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    Circular,
    Spiral,
    Bird,
    FlockParticle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    pub center: Point3<f64>,
    pub radius_start: f64,
    pub radius_end: f64,
    pub altitude_start: f64,
    pub altitude_end: f64,
    /// Signed angular speed, rad/s; positive is counter-clockwise seen from above.
    pub angular_speed: f64,
    pub phase: f64,
    pub bob_amplitude: f64,
    pub flap_frequency: f64,
}

impl TrajectorySpec {
    pub fn circular(
        center: Point3<f64>,
        radius: f64,
        altitude: f64,
        angular_speed: f64,
        phase: f64,
    ) -> Self {
        Self {
            kind: TrajectoryKind::Circular,
            center,
            radius_start: radius,
            radius_end: radius,
            altitude_start: altitude,
            altitude_end: altitude,
            angular_speed,
            phase,
            bob_amplitude: 0.0,
            flap_frequency: 0.0,
        }
    }

    pub fn spiral(
        center: Point3<f64>,
        radius: (f64, f64),
        altitude: (f64, f64),
        angular_speed: f64,
        phase: f64,
    ) -> Self {
        Self {
            kind: TrajectoryKind::Spiral,
            center,
            radius_start: radius.0,
            radius_end: radius.1,
            altitude_start: altitude.0,
            altitude_end: altitude.1,
            angular_speed,
            phase,
            bob_amplitude: 0.0,
            flap_frequency: 0.0,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn bird(
        center: Point3<f64>,
        radius: (f64, f64),
        altitude: (f64, f64),
        angular_speed: f64,
        phase: f64,
        bob_amplitude: f64,
        flap_frequency: f64,
    ) -> Self {
        Self {
            kind: TrajectoryKind::Bird,
            bob_amplitude,
            flap_frequency,
            ..Self::spiral(center, radius, altitude, angular_speed, phase)
        }
    }

    pub fn validate(&self) -> Result<(), TrajectoryError> {
        let finite = [
            self.center.x,
            self.center.y,
            self.center.z,
            self.radius_start,
            self.radius_end,
            self.altitude_start,
            self.altitude_end,
            self.angular_speed,
            self.phase,
            self.bob_amplitude,
            self.flap_frequency,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(TrajectoryError::InvalidSpec("non-finite parameter"));
        }
        if self.radius_start <= 0.0 || self.radius_end <= 0.0 {
            return Err(TrajectoryError::InvalidSpec("radius must be positive"));
        }
        if self.angular_speed == 0.0 {
            return Err(TrajectoryError::InvalidSpec(
                "angular speed must be nonzero",
            ));
        }
        if self.kind == TrajectoryKind::Circular
            && (self.radius_start != self.radius_end || self.altitude_start != self.altitude_end)
        {
            return Err(TrajectoryError::InvalidSpec(
                "circular path needs constant radius and altitude",
            ));
        }
        Ok(())
    }

    /// Time for one full revolution.
    pub fn period(&self) -> f64 {
        TAU / self.angular_speed.abs()
    }

    pub fn radius_at(&self, t: f64, duration: f64) -> f64 {
        lerp(self.radius_start, self.radius_end, t / duration)
    }

    pub fn altitude_at(&self, t: f64, duration: f64) -> f64 {
        lerp(self.altitude_start, self.altitude_end, t / duration)
    }

    fn has_bob(&self) -> bool {
        matches!(
            self.kind,
            TrajectoryKind::Bird | TrajectoryKind::FlockParticle
        )
    }

    fn bob(&self, t: f64) -> f64 {
        match self.kind {
            TrajectoryKind::Bird => self.bob_amplitude * (TAU * self.flap_frequency * t).sin(),
            TrajectoryKind::FlockParticle => {
                self.bob_amplitude * (TAU * self.flap_frequency * t + self.phase).sin()
            }
            _ => 0.0,
        }
    }

    /// Displacement from `center` at time `t`.
    pub fn offset_at(&self, t: f64, duration: f64) -> Vector3<f64> {
        let r = self.radius_at(t, duration);
        let theta = self.angular_speed * t + self.phase;
        Vector3::new(
            r * theta.cos(),
            r * theta.sin(),
            self.altitude_at(t, duration) + self.bob(t),
        )
    }

    /// Upper bound on speed over the sequence, m/s.
    pub fn max_speed(&self, duration: f64) -> f64 {
        let r_max = self.radius_start.max(self.radius_end);
        let bob = if self.has_bob() {
            self.bob_amplitude.abs() * TAU * self.flap_frequency.abs()
        } else {
            0.0
        };
        self.angular_speed.abs() * r_max
            + (self.radius_end - self.radius_start).abs() / duration
            + (self.altitude_end - self.altitude_start).abs() / duration
            + bob
    }
}

/// Exact at both endpoints.
fn lerp(a: f64, b: f64, s: f64) -> f64 {
    a * (1.0 - s) + b * s
}

pub fn pose_at(spec: &TrajectorySpec, t: f64, duration: f64) -> Result<Pose, TrajectoryError> {
    if duration.is_nan() || duration <= 0.0 {
        return Err(TrajectoryError::InvalidSpec("duration must be positive"));
    }
    if !(0.0..=duration).contains(&t) {
        return Err(TrajectoryError::OutOfRange { t, duration });
    }
    let position = spec.center + spec.offset_at(t, duration);
    let omega = spec.angular_speed;
    let heading = omega * t + spec.phase + FRAC_PI_2 * omega.signum();
    let r = spec.radius_at(t, duration);

    let pitch = match spec.kind {
        TrajectoryKind::Circular => 0.0,
        _ => {
            let climb = (spec.altitude_end - spec.altitude_start) / duration;
            climb.atan2(omega.abs() * r)
        }
    };
    let roll = if spec.has_bob() {
        (BANK_GAIN * omega * r).clamp(-MAX_BANK, MAX_BANK)
    } else {
        0.0
    };
    Ok(Pose {
        position,
        yaw: heading,
        pitch,
        roll,
        scale: 1.0,
    })
}

/// Spawns `count` particles that follow `group`'s path with small jitter in
/// centre, path phase, flap rate and bob amplitude.
pub fn spawn_flock(
    group: &TrajectorySpec,
    count: usize,
    seed: u64,
) -> Result<Vec<TrajectorySpec>, TrajectoryError> {
    if !(FLOCK_SIZE_MIN..=FLOCK_SIZE_MAX).contains(&count) {
        return Err(TrajectoryError::FlockSize(count));
    }
    let mut rng = stream_rng(seed, Stream::Flock);
    let r_max = group.radius_start.max(group.radius_end);
    // keep the along-path spread under half a metre
    let phase_spread = 0.5 / r_max;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let jitter = loop {
            let v = Vector3::new(
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
            );
            if v.norm_squared() <= 1.0 {
                break v * FLOCK_JITTER_RADIUS;
            }
        };
        let flap_scale: f64 = rng.random_range(0.8..1.2);
        let bob_scale: f64 = rng.random_range(0.7..1.3);
        let dphase: f64 = rng.random_range(-phase_spread..=phase_spread);
        out.push(TrajectorySpec {
            kind: TrajectoryKind::FlockParticle,
            center: group.center + jitter,
            phase: group.phase + dphase,
            flap_frequency: group.flap_frequency * flap_scale,
            bob_amplitude: group.bob_amplitude * bob_scale,
            ..*group
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> TrajectorySpec {
        TrajectorySpec::circular(Point3::origin(), 10.0, 20.0, TAU / 60.0, 0.0)
    }

    #[test]
    fn circular_start_point() {
        let p = pose_at(&circle(), 0.0, 60.0).unwrap().position;
        assert_eq!(p, Point3::new(10.0, 0.0, 20.0));
    }

    #[test]
    fn circular_quarter_turn() {
        let p = pose_at(&circle(), 15.0, 60.0).unwrap().position;
        assert!((p - Point3::new(0.0, 10.0, 20.0)).norm() < 1e-9);
    }

    #[test]
    fn circular_closes_after_one_period() {
        let spec = circle();
        let a = pose_at(&spec, 0.0, 120.0).unwrap().position;
        let b = pose_at(&spec, spec.period(), 120.0).unwrap().position;
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn spiral_midpoint_interpolates() {
        let spec = TrajectorySpec::spiral(Point3::origin(), (10.0, 20.0), (10.0, 30.0), 0.1, 0.0);
        // independent evaluation: midpoint of [10, 20] and [10, 30]
        assert_eq!(spec.radius_at(30.0, 60.0), 15.0);
        assert_eq!(spec.altitude_at(30.0, 60.0), 20.0);
        let p = pose_at(&spec, 30.0, 60.0).unwrap().position;
        assert!(((p.x * p.x + p.y * p.y).sqrt() - 15.0).abs() < 1e-12);
        assert!((p.z - 20.0).abs() < 1e-12);
    }

    #[test]
    fn spiral_endpoints_are_exact() {
        let spec = TrajectorySpec::spiral(
            Point3::new(3.0, -2.0, 0.0),
            (12.3, 47.1),
            (2.5, 58.9),
            -0.37,
            1.1,
        );
        assert_eq!(spec.radius_at(0.0, 77.0), 12.3);
        assert_eq!(spec.altitude_at(0.0, 77.0), 2.5);
        assert_eq!(spec.radius_at(77.0, 77.0), 47.1);
        assert_eq!(spec.altitude_at(77.0, 77.0), 58.9);
    }

    #[test]
    fn time_outside_sequence_is_rejected() {
        assert!(matches!(
            pose_at(&circle(), -0.1, 60.0),
            Err(TrajectoryError::OutOfRange { .. })
        ));
        assert!(matches!(
            pose_at(&circle(), 60.5, 60.0),
            Err(TrajectoryError::OutOfRange { .. })
        ));
    }

    #[test]
    fn heading_is_tangent() {
        let spec = circle();
        let pose = pose_at(&spec, 7.0, 60.0).unwrap();
        let a = pose_at(&spec, 7.0 - 1e-4, 60.0).unwrap().position;
        let b = pose_at(&spec, 7.0 + 1e-4, 60.0).unwrap().position;
        let v = b - a;
        let dir = v.y.atan2(v.x);
        let diff = (dir - pose.yaw).rem_euclid(TAU);
        assert!(diff < 1e-6 || TAU - diff < 1e-6);
    }

    #[test]
    fn bird_bank_is_clamped() {
        let fast = TrajectorySpec::bird(
            Point3::origin(),
            (100.0, 100.0),
            (10.0, 10.0),
            1.0,
            0.0,
            0.3,
            3.0,
        );
        let pose = pose_at(&fast, 1.0, 10.0).unwrap();
        assert!((pose.roll - MAX_BANK).abs() < 1e-12);
        let slow = TrajectorySpec::bird(
            Point3::origin(),
            (10.0, 10.0),
            (10.0, 10.0),
            -0.5,
            0.0,
            0.3,
            3.0,
        );
        let pose = pose_at(&slow, 1.0, 10.0).unwrap();
        assert!((pose.roll + 0.1).abs() < 1e-12);
    }

    #[test]
    fn flock_cardinality_and_determinism() {
        let group = TrajectorySpec::bird(
            Point3::new(5.0, 5.0, 0.0),
            (30.0, 30.0),
            (20.0, 20.0),
            0.2,
            0.4,
            0.2,
            4.0,
        );
        let a = spawn_flock(&group, 10, 0).unwrap();
        assert_eq!(a.len(), 10);
        assert!(a.iter().all(|s| s.kind == TrajectoryKind::FlockParticle));
        assert_eq!(a, spawn_flock(&group, 10, 0).unwrap());
        assert!(matches!(
            spawn_flock(&group, 9, 0),
            Err(TrajectoryError::FlockSize(9))
        ));
    }

    #[test]
    fn flock_centres_within_jitter_sphere() {
        let group = TrajectorySpec::bird(
            Point3::new(-4.0, 9.0, 1.0),
            (25.0, 25.0),
            (15.0, 15.0),
            0.3,
            0.0,
            0.2,
            4.0,
        );
        let particles = spawn_flock(&group, 40, 7).unwrap();
        let json = serde_json::to_string(&particles).unwrap();
        let back: Vec<TrajectorySpec> = serde_json::from_str(&json).unwrap();
        for p in back {
            assert!((p.center - group.center).norm() <= FLOCK_JITTER_RADIUS + 1e-12);
        }
    }
}
