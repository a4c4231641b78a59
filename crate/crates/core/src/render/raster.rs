//! Triangle scan conversion.
//!
//! Vertices are snapped to a 1/256 px grid and edge functions are evaluated
//! in exact integer arithmetic, so a shared edge is owned by exactly one of
//! its two triangles under the top-left rule.

use super::FrameBundle;
use crate::scene::Rgb;

const SUBPIXEL_BITS: u32 = 8;
const SUBPIXEL: i64 = 1 << SUBPIXEL_BITS;
const HALF: i64 = SUBPIXEL / 2;

/// A projected vertex: pixel coordinates plus camera-space depth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScreenVertex {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ScreenVertex {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScreenTriangle(pub [ScreenVertex; 3]);

#[derive(Clone, Copy)]
struct Fixed {
    x: i64,
    y: i64,
}

fn snap(v: f64) -> i64 {
    (v * SUBPIXEL as f64).round() as i64
}

/// Twice the signed area; positive when `c` is on the inner side of `a -> b`
/// for the winding used below (clockwise on screen, y down).
#[inline]
fn edge(a: Fixed, b: Fixed, px: i64, py: i64) -> i128 {
    i128::from(b.x - a.x) * i128::from(py - a.y) - i128::from(b.y - a.y) * i128::from(px - a.x)
}

/// Top edges are horizontal with the interior below; left edges go upward.
#[inline]
fn is_top_left(a: Fixed, b: Fixed) -> bool {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    (dy == 0 && dx > 0) || dy < 0
}

/// Visits every pixel whose centre lies inside `tri` and whose interpolated
/// depth is strictly less than `depth[idx]`. The depth buffer is updated and
/// `write(idx, depth)` is called for each accepted pixel. Returns the number
/// of pixels written.
pub(crate) fn scan<F: FnMut(usize, f32)>(
    tri: &ScreenTriangle,
    width: u32,
    height: u32,
    depth: &mut [f32],
    mut write: F,
) -> usize {
    let v = tri.0;
    if v.iter()
        .any(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) || p.z <= 0.0)
    {
        return 0;
    }
    let mut p = v.map(|s| Fixed {
        x: snap(s.x),
        y: snap(s.y),
    });
    let mut inv_z = v.map(|s| 1.0 / s.z);
    let mut area = edge(p[0], p[1], p[2].x, p[2].y);
    if area == 0 {
        return 0;
    }
    if area < 0 {
        p.swap(1, 2);
        inv_z.swap(1, 2);
        area = -area;
    }

    let min_x = p.iter().map(|q| q.x).min().unwrap();
    let max_x = p.iter().map(|q| q.x).max().unwrap();
    let min_y = p.iter().map(|q| q.y).min().unwrap();
    let max_y = p.iter().map(|q| q.y).max().unwrap();
    // pixel i has centre i*SUBPIXEL + HALF
    let px_lo = ((min_x - HALF).div_euclid(SUBPIXEL)).max(0);
    let px_hi = ((max_x - HALF).div_euclid(SUBPIXEL) + 1).min(i64::from(width));
    let py_lo = ((min_y - HALF).div_euclid(SUBPIXEL)).max(0);
    let py_hi = ((max_y - HALF).div_euclid(SUBPIXEL) + 1).min(i64::from(height));
    if px_lo >= px_hi || py_lo >= py_hi {
        return 0;
    }

    // edge i is opposite vertex i
    let edges = [(p[1], p[2]), (p[2], p[0]), (p[0], p[1])];
    let bias: [i128; 3] = edges.map(|(a, b)| if is_top_left(a, b) { 0 } else { -1 });
    let step_x: [i128; 3] = edges.map(|(a, b)| -i128::from(b.y - a.y) * i128::from(SUBPIXEL));
    let step_y: [i128; 3] = edges.map(|(a, b)| i128::from(b.x - a.x) * i128::from(SUBPIXEL));

    let start_x = px_lo * SUBPIXEL + HALF;
    let start_y = py_lo * SUBPIXEL + HALF;
    let mut row = edges.map(|(a, b)| edge(a, b, start_x, start_y));
    let inv_area = 1.0 / area as f64;
    let mut written = 0;
    for py in py_lo..py_hi {
        let mut w = row;
        let base = py as usize * width as usize;
        for px in px_lo..px_hi {
            if w[0] + bias[0] >= 0 && w[1] + bias[1] >= 0 && w[2] + bias[2] >= 0 {
                let iz = (w[0] as f64 * inv_z[0] + w[1] as f64 * inv_z[1] + w[2] as f64 * inv_z[2])
                    * inv_area;
                let d = (1.0 / iz) as f32;
                let idx = base + px as usize;
                if d < depth[idx] {
                    depth[idx] = d;
                    write(idx, d);
                    written += 1;
                }
            }
            for k in 0..3 {
                w[k] += step_x[k];
            }
        }
        for k in 0..3 {
            row[k] += step_y[k];
        }
    }
    written
}

/// Rasterizes one projected triangle into all three buffers of `frame`.
///
/// Pixels whose centres fall inside the triangle (top-left rule) and whose
/// perspective-correct depth is strictly nearer than the stored depth take
/// `color`, `instance_id` and the new depth. Zero-area triangles are a no-op.
pub fn rasterize_triangle(
    tri: &ScreenTriangle,
    instance_id: u32,
    color: Rgb,
    frame: &mut FrameBundle,
) -> usize {
    let (width, height) = (frame.width, frame.height);
    let FrameBundle {
        rgb, segmap, depth, ..
    } = frame;
    scan(tri, width, height, depth, |idx, _| {
        rgb[idx] = color.0;
        segmap[idx] = instance_id;
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(w: u32, h: u32) -> FrameBundle {
        FrameBundle::new(w, h)
    }

    fn tri(pts: [(f64, f64); 3], z: f64) -> ScreenTriangle {
        ScreenTriangle(pts.map(|(x, y)| ScreenVertex::new(x, y, z)))
    }

    /// Independent point-in-triangle test with the same fill convention,
    /// evaluated in f64 on pixel centres (exact for these small integer inputs).
    fn oracle_inside(t: &[(f64, f64); 3], px: f64, py: f64) -> bool {
        let cross = (t[1].0 - t[0].0) * (t[2].1 - t[0].1) - (t[1].1 - t[0].1) * (t[2].0 - t[0].0);
        let (a, b, c) = if cross < 0.0 {
            (t[0], t[2], t[1])
        } else {
            (t[0], t[1], t[2])
        };
        let e = |a: (f64, f64), b: (f64, f64)| (b.0 - a.0) * (py - a.1) - (b.1 - a.1) * (px - a.0);
        let top_left = |a: (f64, f64), b: (f64, f64)| {
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            (dy == 0.0 && dx > 0.0) || dy < 0.0
        };
        [(b, c), (c, a), (a, b)].iter().all(|&(p, q)| {
            let w = e(p, q);
            w > 0.0 || (w == 0.0 && top_left(p, q))
        })
    }

    #[test]
    fn half_diagonal_matches_brute_force() {
        let pts = [(0.0, 0.0), (2.0, 0.0), (0.0, 2.0)];
        let mut f = frame(4, 4);
        rasterize_triangle(&tri(pts, 5.0), 3, Rgb::new(1, 2, 3), &mut f);
        for y in 0..4 {
            for x in 0..4 {
                let expect = oracle_inside(&pts, x as f64 + 0.5, y as f64 + 0.5);
                assert_eq!(f.segmap[y * 4 + x] == 3, expect, "pixel ({x},{y})");
            }
        }
        // centres of (1,0) and (0,1) lie on the hypotenuse, which is a bottom-right edge
        assert_eq!(f.segmap.iter().filter(|&&s| s == 3).count(), 1);
    }

    #[test]
    fn random_triangles_match_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..300 {
            // integer and half-integer vertices keep the f64 oracle exact
            let mut p = || {
                (
                    f64::from(rng.random_range(-4..40)) / 2.0,
                    f64::from(rng.random_range(-4..40)) / 2.0,
                )
            };
            let pts = [p(), p(), p()];
            let mut f = frame(16, 16);
            rasterize_triangle(&tri(pts, 2.0), 1, Rgb::new(9, 9, 9), &mut f);
            let area2 = (pts[1].0 - pts[0].0) * (pts[2].1 - pts[0].1)
                - (pts[1].1 - pts[0].1) * (pts[2].0 - pts[0].0);
            for y in 0..16 {
                for x in 0..16 {
                    let expect =
                        area2 != 0.0 && oracle_inside(&pts, x as f64 + 0.5, y as f64 + 0.5);
                    assert_eq!(f.segmap[y * 16 + x] == 1, expect, "{pts:?} pixel ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn occluded_triangle_changes_nothing() {
        let mut f = frame(8, 8);
        let near = tri([(0.0, 0.0), (8.0, 0.0), (0.0, 8.0)], 1.0);
        rasterize_triangle(&near, 1, Rgb::new(1, 1, 1), &mut f);
        let before = f.clone();
        let far = tri([(0.0, 0.0), (4.0, 0.0), (0.0, 4.0)], 2.0);
        assert_eq!(rasterize_triangle(&far, 2, Rgb::new(2, 2, 2), &mut f), 0);
        assert_eq!(f, before);
    }

    #[test]
    fn collinear_triangle_is_noop() {
        let mut f = frame(8, 8);
        let before = f.clone();
        let t = tri([(0.0, 0.0), (4.0, 4.0), (8.0, 8.0)], 1.0);
        assert_eq!(rasterize_triangle(&t, 1, Rgb::new(1, 1, 1), &mut f), 0);
        assert_eq!(f, before);
    }

    #[test]
    fn shared_edges_are_watertight() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            // a random quad split along a diagonal; every covered pixel is hit once
            let mut p = || {
                ScreenVertex::new(
                    rng.random_range(0.0..32.0),
                    rng.random_range(0.0..32.0),
                    3.0,
                )
            };
            let (a, b, c) = (p(), p(), p());
            let d = ScreenVertex::new(a.x + c.x - b.x, a.y + c.y - b.y, 3.0);
            let mut hits = vec![0u8; 32 * 32];
            let mut depth = vec![f32::INFINITY; 32 * 32];
            scan(&ScreenTriangle([a, b, c]), 32, 32, &mut depth, |i, _| {
                hits[i] += 1
            });
            depth.fill(f32::INFINITY);
            scan(&ScreenTriangle([a, c, d]), 32, 32, &mut depth, |i, _| {
                hits[i] += 1
            });
            assert!(hits.iter().all(|&h| h <= 1));
        }
    }

    #[test]
    fn depth_is_perspective_correct() {
        let mut f = frame(64, 1);
        // a span from z=1 at x=0 to z=3 at x=64; 1/z interpolates linearly
        let t = ScreenTriangle([
            ScreenVertex::new(0.0, -10.0, 1.0),
            ScreenVertex::new(64.0, -10.0, 3.0),
            ScreenVertex::new(0.0, 20.0, 1.0),
        ]);
        rasterize_triangle(&t, 1, Rgb::new(0, 0, 0), &mut f);
        // the z=3 vertex weight is x/64 everywhere since the other two share x=0
        let s = 32.5 / 64.0;
        let expect = 1.0 / ((1.0 - s) / 1.0 + s / 3.0);
        assert!((f64::from(f.depth[32]) - expect).abs() < 1e-4);
    }
}
