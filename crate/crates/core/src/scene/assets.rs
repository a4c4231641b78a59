//! Procedural drone and bird meshes.
//!
//! Geometry is fixed per design; the library seed only varies colours and
//! scale ranges, so libraries built from different seeds share topology.

use std::f64::consts::TAU;

use nalgebra::{Point3, Rotation3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ClassId;
use crate::rng::{stream_rng, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self([r, g, b])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Triangle(pub [Point3<f64>; 3]);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadKind {
    None,
    Box,
    Bag,
    Gun,
    SprayKit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssetModel {
    pub asset_id: u32,
    pub name: String,
    pub class: ClassId,
    pub payload_kind: PayloadKind,
    pub base_color: Rgb,
    pub scale_range: (f64, f64),
    pub mesh: Vec<Triangle>,
}

impl AssetModel {
    pub fn bounds(&self) -> (Point3<f64>, Point3<f64>) {
        let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for tri in &self.mesh {
            for v in &tri.0 {
                lo = lo.inf(v);
                hi = hi.sup(v);
            }
        }
        (lo, hi)
    }

    pub fn diagonal(&self) -> f64 {
        let (lo, hi) = self.bounds();
        (hi - lo).norm()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssetLibrary {
    pub seed: u64,
    pub assets: Vec<AssetModel>,
}

impl AssetLibrary {
    pub fn get(&self, asset_id: u32) -> Option<&AssetModel> {
        self.assets.iter().find(|a| a.asset_id == asset_id)
    }

    pub fn by_class(&self, class: ClassId) -> impl Iterator<Item = &AssetModel> {
        self.assets.iter().filter(move |a| a.class == class)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("library serializes")
    }
}

#[derive(Clone, Copy)]
enum Frame {
    Quad,
    Hexa,
    Octo,
}

impl Frame {
    fn arms(self) -> usize {
        match self {
            Frame::Quad => 4,
            Frame::Hexa => 6,
            Frame::Octo => 8,
        }
    }
}

struct DroneDesign {
    name: &'static str,
    frame: Frame,
    arm: f64,
    body: [f64; 3],
    payload: PayloadKind,
}

const fn drone(
    name: &'static str,
    frame: Frame,
    arm: f64,
    body: [f64; 3],
    payload: PayloadKind,
) -> DroneDesign {
    DroneDesign {
        name,
        frame,
        arm,
        body,
        payload,
    }
}

const DRONES: [DroneDesign; 15] = [
    drone(
        "hexa_bag",
        Frame::Hexa,
        0.45,
        [0.30, 0.22, 0.12],
        PayloadKind::Bag,
    ),
    drone(
        "octo_bag",
        Frame::Octo,
        0.55,
        [0.34, 0.26, 0.14],
        PayloadKind::Bag,
    ),
    drone(
        "quad_box",
        Frame::Quad,
        0.35,
        [0.26, 0.18, 0.10],
        PayloadKind::Box,
    ),
    drone(
        "octo_box",
        Frame::Octo,
        0.60,
        [0.36, 0.28, 0.14],
        PayloadKind::Box,
    ),
    drone(
        "hexa_gun",
        Frame::Hexa,
        0.50,
        [0.32, 0.22, 0.12],
        PayloadKind::Gun,
    ),
    drone(
        "quad_gun",
        Frame::Quad,
        0.40,
        [0.28, 0.20, 0.11],
        PayloadKind::Gun,
    ),
    drone(
        "octo_gun",
        Frame::Octo,
        0.58,
        [0.36, 0.26, 0.14],
        PayloadKind::Gun,
    ),
    drone(
        "hexa_spray",
        Frame::Hexa,
        0.62,
        [0.40, 0.30, 0.16],
        PayloadKind::SprayKit,
    ),
    drone(
        "quad_compact",
        Frame::Quad,
        0.18,
        [0.16, 0.10, 0.06],
        PayloadKind::None,
    ),
    drone(
        "quad_survey",
        Frame::Quad,
        0.30,
        [0.24, 0.16, 0.09],
        PayloadKind::None,
    ),
    drone(
        "quad_heavy",
        Frame::Quad,
        0.45,
        [0.32, 0.24, 0.12],
        PayloadKind::None,
    ),
    drone(
        "hexa_survey",
        Frame::Hexa,
        0.40,
        [0.28, 0.20, 0.10],
        PayloadKind::None,
    ),
    drone(
        "hexa_heavy",
        Frame::Hexa,
        0.55,
        [0.36, 0.26, 0.14],
        PayloadKind::None,
    ),
    drone(
        "octo_survey",
        Frame::Octo,
        0.50,
        [0.32, 0.24, 0.12],
        PayloadKind::None,
    ),
    drone(
        "octo_heavy",
        Frame::Octo,
        0.65,
        [0.40, 0.30, 0.16],
        PayloadKind::None,
    ),
];

struct BirdDesign {
    name: &'static str,
    body_len: f64,
    wingspan: f64,
    chord: f64,
    sweep: f64,
}

const BIRDS: [BirdDesign; 8] = [
    BirdDesign {
        name: "pigeon",
        body_len: 0.32,
        wingspan: 0.65,
        chord: 0.12,
        sweep: 0.05,
    },
    BirdDesign {
        name: "crow",
        body_len: 0.45,
        wingspan: 0.95,
        chord: 0.16,
        sweep: 0.04,
    },
    BirdDesign {
        name: "gull",
        body_len: 0.45,
        wingspan: 1.30,
        chord: 0.15,
        sweep: 0.12,
    },
    BirdDesign {
        name: "kite",
        body_len: 0.55,
        wingspan: 1.50,
        chord: 0.20,
        sweep: 0.08,
    },
    BirdDesign {
        name: "hawk",
        body_len: 0.50,
        wingspan: 1.20,
        chord: 0.22,
        sweep: 0.03,
    },
    BirdDesign {
        name: "eagle",
        body_len: 0.85,
        wingspan: 2.10,
        chord: 0.32,
        sweep: 0.06,
    },
    BirdDesign {
        name: "stork",
        body_len: 1.00,
        wingspan: 1.95,
        chord: 0.28,
        sweep: 0.02,
    },
    BirdDesign {
        name: "heron",
        body_len: 0.95,
        wingspan: 1.75,
        chord: 0.26,
        sweep: 0.05,
    },
];

const DRONE_PALETTE: [Rgb; 6] = [
    Rgb::new(40, 40, 44),
    Rgb::new(200, 200, 205),
    Rgb::new(90, 92, 96),
    Rgb::new(170, 40, 35),
    Rgb::new(60, 80, 50),
    Rgb::new(225, 200, 60),
];

const BIRD_PALETTE: [Rgb; 5] = [
    Rgb::new(60, 50, 40),
    Rgb::new(25, 25, 28),
    Rgb::new(215, 215, 210),
    Rgb::new(120, 105, 85),
    Rgb::new(150, 150, 155),
];

/// 15 drones (8 with payloads) followed by 8 birds.
pub fn build_asset_library(seed: u64) -> AssetLibrary {
    let mut rng = stream_rng(seed, Stream::Color);
    let mut assets = Vec::with_capacity(DRONES.len() + BIRDS.len());
    for (i, d) in DRONES.iter().enumerate() {
        assets.push(AssetModel {
            asset_id: i as u32,
            name: d.name.to_string(),
            class: ClassId::Drone,
            payload_kind: d.payload,
            base_color: jitter_color(&mut rng, &DRONE_PALETTE),
            scale_range: scale_range(&mut rng),
            mesh: drone_mesh(d),
        });
    }
    for (i, b) in BIRDS.iter().enumerate() {
        assets.push(AssetModel {
            asset_id: (DRONES.len() + i) as u32,
            name: b.name.to_string(),
            class: ClassId::Bird,
            payload_kind: PayloadKind::None,
            base_color: jitter_color(&mut rng, &BIRD_PALETTE),
            scale_range: scale_range(&mut rng),
            mesh: bird_mesh(b),
        });
    }
    AssetLibrary { seed, assets }
}

fn jitter_color(rng: &mut impl Rng, palette: &[Rgb]) -> Rgb {
    let base = palette[rng.random_range(0..palette.len())];
    let mut out = [0u8; 3];
    for (o, c) in out.iter_mut().zip(base.0) {
        *o = (i32::from(c) + rng.random_range(-20..=20)).clamp(0, 255) as u8;
    }
    Rgb(out)
}

fn scale_range(rng: &mut impl Rng) -> (f64, f64) {
    let lo = 0.85 + 0.1 * rng.random::<f64>();
    (lo, lo + 0.15 + 0.1 * rng.random::<f64>())
}

#[derive(Default)]
struct MeshBuilder {
    tris: Vec<Triangle>,
}

impl MeshBuilder {
    fn tri(&mut self, a: Point3<f64>, b: Point3<f64>, c: Point3<f64>) {
        self.tris.push(Triangle([a, b, c]));
    }

    fn quad(&mut self, a: Point3<f64>, b: Point3<f64>, c: Point3<f64>, d: Point3<f64>) {
        self.tri(a, b, c);
        self.tri(a, c, d);
    }

    /// Box with half extents `half`, rotated by `yaw` about `+z`, centred at `center`.
    fn cuboid(&mut self, center: Point3<f64>, half: [f64; 3], yaw: f64) {
        let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), yaw);
        let corner = |sx: f64, sy: f64, sz: f64| {
            center + rot * Vector3::new(sx * half[0], sy * half[1], sz * half[2])
        };
        let c = [
            corner(-1.0, -1.0, -1.0),
            corner(1.0, -1.0, -1.0),
            corner(1.0, 1.0, -1.0),
            corner(-1.0, 1.0, -1.0),
            corner(-1.0, -1.0, 1.0),
            corner(1.0, -1.0, 1.0),
            corner(1.0, 1.0, 1.0),
            corner(-1.0, 1.0, 1.0),
        ];
        self.quad(c[0], c[3], c[2], c[1]);
        self.quad(c[4], c[5], c[6], c[7]);
        self.quad(c[0], c[1], c[5], c[4]);
        self.quad(c[1], c[2], c[6], c[5]);
        self.quad(c[2], c[3], c[7], c[6]);
        self.quad(c[3], c[0], c[4], c[7]);
    }

    /// Vertical `sides`-gon prism.
    fn cylinder(&mut self, center: Point3<f64>, radius: f64, half_height: f64, sides: usize) {
        let top = center + Vector3::new(0.0, 0.0, half_height);
        let bottom = center - Vector3::new(0.0, 0.0, half_height);
        let rim = |k: usize, z: &Point3<f64>| {
            let a = TAU * k as f64 / sides as f64;
            z + Vector3::new(radius * a.cos(), radius * a.sin(), 0.0)
        };
        for k in 0..sides {
            let (b0, b1) = (rim(k, &bottom), rim(k + 1, &bottom));
            let (t0, t1) = (rim(k, &top), rim(k + 1, &top));
            self.quad(b0, b1, t1, t0);
            self.tri(top, t0, t1);
            self.tri(bottom, b1, b0);
        }
    }
}

fn drone_mesh(d: &DroneDesign) -> Vec<Triangle> {
    let mut m = MeshBuilder::default();
    let [bl, bw, bh] = d.body;
    m.cuboid(Point3::origin(), [bl / 2.0, bw / 2.0, bh / 2.0], 0.0);
    let arms = d.frame.arms();
    let rotor_r = (d.arm * (std::f64::consts::PI / arms as f64).sin()).min(d.arm * 0.45);
    for k in 0..arms {
        let a = TAU * (k as f64 + 0.5) / arms as f64;
        let dir = Vector3::new(a.cos(), a.sin(), 0.0);
        m.cuboid(
            Point3::origin() + dir * (d.arm / 2.0),
            [d.arm / 2.0, 0.015, 0.012],
            a,
        );
        let hub = Point3::origin() + dir * d.arm + Vector3::new(0.0, 0.0, 0.03);
        m.cylinder(hub, 0.025, 0.03, 6);
        m.cylinder(hub + Vector3::new(0.0, 0.0, 0.035), rotor_r, 0.005, 10);
    }
    // gimbal camera under the nose
    m.cuboid(
        Point3::new(bl * 0.35, 0.0, -bh / 2.0 - 0.03),
        [0.03, 0.03, 0.03],
        0.0,
    );
    // landing skids
    for s in [-1.0, 1.0] {
        m.cuboid(
            Point3::new(0.0, s * bw * 0.45, -bh / 2.0 - 0.06),
            [bl * 0.45, 0.01, 0.01],
            0.0,
        );
    }

    let below = -bh / 2.0;
    match d.payload {
        PayloadKind::None => {}
        PayloadKind::Box => {
            m.cuboid(Point3::new(0.0, 0.0, below - 0.13), [0.14, 0.14, 0.11], 0.0);
            m.cuboid(Point3::new(0.0, 0.0, below - 0.01), [0.01, 0.01, 0.02], 0.0);
        }
        PayloadKind::Bag => {
            m.cylinder(Point3::new(0.0, 0.0, below - 0.2), 0.12, 0.14, 8);
            m.cuboid(
                Point3::new(0.0, 0.0, below - 0.03),
                [0.015, 0.06, 0.03],
                0.0,
            );
        }
        PayloadKind::Gun => {
            m.cuboid(
                Point3::new(0.08, 0.0, below - 0.06),
                [0.28, 0.025, 0.03],
                0.0,
            );
            m.cuboid(
                Point3::new(-0.1, 0.0, below - 0.12),
                [0.025, 0.02, 0.06],
                0.0,
            );
            m.cuboid(
                Point3::new(0.02, 0.0, below - 0.13),
                [0.03, 0.018, 0.07],
                0.0,
            );
        }
        PayloadKind::SprayKit => {
            m.cylinder(Point3::new(0.0, 0.0, below - 0.17), 0.15, 0.15, 10);
            m.cuboid(Point3::new(0.0, 0.0, below - 0.34), [0.02, 0.6, 0.012], 0.0);
            for k in -2..=2 {
                m.cuboid(
                    Point3::new(0.0, f64::from(k) * 0.28, below - 0.37),
                    [0.012, 0.012, 0.02],
                    0.0,
                );
            }
        }
    }
    m.tris
}

fn bird_mesh(b: &BirdDesign) -> Vec<Triangle> {
    let mut m = MeshBuilder::default();
    let l = b.body_len;
    let w = l * 0.16;
    let nose = Point3::new(l * 0.5, 0.0, 0.0);
    let tail = Point3::new(-l * 0.5, 0.0, 0.0);
    let ring = [
        Point3::new(l * 0.1, w, 0.0),
        Point3::new(l * 0.1, 0.0, w),
        Point3::new(l * 0.1, -w, 0.0),
        Point3::new(l * 0.1, 0.0, -w),
    ];
    for k in 0..4 {
        let (a, c) = (ring[k], ring[(k + 1) % 4]);
        m.tri(nose, a, c);
        m.tri(tail, c, a);
    }
    let half_span = b.wingspan / 2.0;
    let dihedral = b.wingspan * 0.06;
    for s in [-1.0, 1.0] {
        let root_lead = Point3::new(l * 0.15, s * w, 0.0);
        let root_trail = Point3::new(l * 0.15 - b.chord, s * w, 0.0);
        let tip_lead = Point3::new(l * 0.15 - b.sweep, s * half_span, dihedral);
        let tip_trail = Point3::new(l * 0.15 - b.sweep - b.chord * 0.6, s * half_span, dihedral);
        m.quad(root_lead, root_trail, tip_trail, tip_lead);
    }
    let tail_len = l * 0.3;
    m.tri(
        Point3::new(-l * 0.4, 0.0, 0.0),
        Point3::new(-l * 0.4 - tail_len, tail_len * 0.6, 0.0),
        Point3::new(-l * 0.4 - tail_len, -tail_len * 0.6, 0.0),
    );
    m.tris
}

#[cfg(test)]
mod tests {
    use super::*;
    use sha2::{Digest, Sha256};

    fn hash<T: Serialize>(v: &T) -> Vec<u8> {
        Sha256::digest(serde_json::to_vec(v).unwrap()).to_vec()
    }

    #[test]
    fn cardinalities() {
        let lib = build_asset_library(0);
        assert_eq!(lib.assets.len(), 23);
        assert_eq!(lib.by_class(ClassId::Drone).count(), 15);
        assert_eq!(
            lib.by_class(ClassId::Drone)
                .filter(|a| a.payload_kind != PayloadKind::None)
                .count(),
            8
        );
        assert_eq!(lib.by_class(ClassId::Bird).count(), 8);
        assert!(lib
            .by_class(ClassId::Bird)
            .all(|a| a.payload_kind == PayloadKind::None));
    }

    #[test]
    fn meshes_are_bounded_and_finite() {
        let lib = build_asset_library(3);
        for a in &lib.assets {
            assert!(!a.mesh.is_empty(), "{}", a.name);
            assert!(a
                .mesh
                .iter()
                .all(|t| t.0.iter().all(|v| v.iter().all(|c| c.is_finite()))));
            let d = a.diagonal();
            assert!(d > 0.1 && d < 3.0, "{} diagonal {d}", a.name);
        }
        let ids: std::collections::BTreeSet<_> = lib.assets.iter().map(|a| a.asset_id).collect();
        assert_eq!(ids.len(), 23);
    }

    #[test]
    fn same_seed_same_library() {
        assert_eq!(
            build_asset_library(0).to_json(),
            build_asset_library(0).to_json()
        );
    }

    #[test]
    fn seed_changes_colours_not_topology() {
        let (a, b) = (build_asset_library(0), build_asset_library(1));
        let meshes = |l: &AssetLibrary| l.assets.iter().map(|x| x.mesh.clone()).collect::<Vec<_>>();
        let colours = |l: &AssetLibrary| {
            l.assets
                .iter()
                .map(|x| (x.base_color, x.scale_range))
                .collect::<Vec<_>>()
        };
        assert_eq!(hash(&meshes(&a)), hash(&meshes(&b)));
        assert_ne!(hash(&colours(&a)), hash(&colours(&b)));
    }
}
