//! Segmentation map to YOLO labels: connected components, tight boxes,
//! size filtering and the label text format.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::ClassId;

/// Objects whose longer box side is below this are not annotated, pixels.
pub const MIN_EXTENT_PX: u32 = 5;
/// Boxes larger than this fraction of the image are flagged (numerator, denominator).
pub const MAX_AREA_FRACTION: (u64, u64) = (1, 5);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnotationError {
    #[error("segmentation id {0} is not in the scene's instance table")]
    UnknownId(u32),
    #[error("empty mask")]
    EmptyMask,
    #[error("box {0:?} does not fit a {1}x{2} image")]
    BoxOutOfBounds(PixelBox, u32, u32),
    #[error("segmentation map of {len} ids does not match {width}x{height}")]
    Dimensions { len: usize, width: u32, height: u32 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Half-open pixel rectangle: `[x_min, x_max) × [y_min, y_max)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PixelBox {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

impl PixelBox {
    pub fn new(x_min: u32, y_min: u32, x_max: u32, y_max: u32) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn width(&self) -> u32 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> u32 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width()) * u64::from(self.height())
    }

    pub fn max_side(&self) -> u32 {
        self.width().max(self.height())
    }

    pub fn is_valid_for(&self, width: u32, height: u32) -> bool {
        self.x_min < self.x_max
            && self.x_max <= width
            && self.y_min < self.y_max
            && self.y_max <= height
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        (self.x_min..self.x_max).contains(&x) && (self.y_min..self.y_max).contains(&y)
    }
}

/// One YOLO record; all geometry normalized by the image size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub class: ClassId,
    pub x_c: f64,
    pub y_c: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMask {
    pub instance_id: u32,
    pub class: ClassId,
    /// `(x, y)` in raster order.
    pub pixels: Vec<(u32, u32)>,
}

fn find(parent: &mut [u32], mut a: u32) -> u32 {
    while parent[a as usize] != a {
        let up = parent[parent[a as usize] as usize];
        parent[a as usize] = up;
        a = up;
    }
    a
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        // smaller label wins so roots follow raster order
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
}

/// Splits the nonzero pixels of `segmap` into 8-connected components of equal
/// id, in raster order of their first pixel.
pub fn connected_components(
    segmap: &[u32],
    width: u32,
    height: u32,
    table: &BTreeMap<u32, ClassId>,
) -> Result<Vec<InstanceMask>, AnnotationError> {
    let (w, h) = (width as usize, height as usize);
    if segmap.len() != w * h {
        return Err(AnnotationError::Dimensions {
            len: segmap.len(),
            width,
            height,
        });
    }
    const NONE: u32 = u32::MAX;
    let mut labels = vec![NONE; w * h];
    let mut parent: Vec<u32> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let id = segmap[i];
            if id == 0 {
                continue;
            }
            let mut label = NONE;
            // already-visited neighbours: W, NW, N, NE
            let mut neighbours = [None; 4];
            if x > 0 {
                neighbours[0] = Some(i - 1);
            }
            if y > 0 {
                if x > 0 {
                    neighbours[1] = Some(i - w - 1);
                }
                neighbours[2] = Some(i - w);
                if x + 1 < w {
                    neighbours[3] = Some(i - w + 1);
                }
            }
            for j in neighbours.into_iter().flatten() {
                if segmap[j] != id {
                    continue;
                }
                if label == NONE {
                    label = labels[j];
                } else {
                    union(&mut parent, label, labels[j]);
                }
            }
            if label == NONE {
                label = parent.len() as u32;
                parent.push(label);
            }
            labels[i] = label;
        }
    }

    let mut slot: Vec<u32> = vec![NONE; parent.len()];
    let mut masks: Vec<InstanceMask> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        if l == NONE {
            continue;
        }
        let root = find(&mut parent, l) as usize;
        if slot[root] == NONE {
            let id = segmap[i];
            let class = *table.get(&id).ok_or(AnnotationError::UnknownId(id))?;
            slot[root] = masks.len() as u32;
            masks.push(InstanceMask {
                instance_id: id,
                class,
                pixels: Vec::new(),
            });
        }
        masks[slot[root] as usize]
            .pixels
            .push(((i % w) as u32, (i / w) as u32));
    }
    Ok(masks)
}

pub fn tight_box(mask: &InstanceMask) -> Result<PixelBox, AnnotationError> {
    let (&(x0, y0), rest) = mask
        .pixels
        .split_first()
        .ok_or(AnnotationError::EmptyMask)?;
    let mut b = PixelBox::new(x0, y0, x0 + 1, y0 + 1);
    for &(x, y) in rest {
        b.x_min = b.x_min.min(x);
        b.y_min = b.y_min.min(y);
        b.x_max = b.x_max.max(x + 1);
        b.y_max = b.y_max.max(y + 1);
    }
    Ok(b)
}

/// Normalized centre and size. Each field is a single division of exact
/// integers, so it is the correctly rounded value of the rational.
pub fn to_yolo(
    b: &PixelBox,
    class: ClassId,
    width: u32,
    height: u32,
) -> Result<AnnotationRecord, AnnotationError> {
    if !b.is_valid_for(width, height) {
        return Err(AnnotationError::BoxOutOfBounds(*b, width, height));
    }
    let (wf, hf) = (f64::from(width), f64::from(height));
    Ok(AnnotationRecord {
        class,
        x_c: f64::from(b.x_min + b.x_max) / (2.0 * wf),
        y_c: f64::from(b.y_min + b.y_max) / (2.0 * hf),
        w: f64::from(b.width()) / wf,
        h: f64::from(b.height()) / hf,
    })
}

/// Inverse of [`to_yolo`], rounding each edge to the nearest pixel.
pub fn to_pixel_box(r: &AnnotationRecord, width: u32, height: u32) -> PixelBox {
    let (wf, hf) = (f64::from(width), f64::from(height));
    let px = |v: f64, max: f64| (v.clamp(0.0, max)).round() as u32;
    PixelBox {
        x_min: px((r.x_c - r.w / 2.0) * wf, wf),
        y_min: px((r.y_c - r.h / 2.0) * hf, hf),
        x_max: px((r.x_c + r.w / 2.0) * wf, wf),
        y_max: px((r.y_c + r.h / 2.0) * hf, hf),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FilterOutcome {
    pub kept: Vec<InstanceMask>,
    pub dropped: usize,
    /// Instance ids of kept masks whose box exceeds the area limit.
    pub oversize: Vec<u32>,
}

/// Drops masks whose box's longer side is under [`MIN_EXTENT_PX`] and flags
/// (keeps) those whose box exceeds a fifth of the image.
pub fn filter_instances(masks: Vec<InstanceMask>, width: u32, height: u32) -> FilterOutcome {
    let image_area = u64::from(width) * u64::from(height);
    let mut out = FilterOutcome::default();
    for m in masks {
        let Ok(b) = tight_box(&m) else {
            out.dropped += 1;
            continue;
        };
        if b.max_side() < MIN_EXTENT_PX {
            out.dropped += 1;
            continue;
        }
        if b.area() * MAX_AREA_FRACTION.1 > image_area * MAX_AREA_FRACTION.0 {
            log::warn!(
                "OVERSIZE instance {} box {}x{} exceeds 20% of {}x{}",
                m.instance_id,
                b.width(),
                b.height(),
                width,
                height
            );
            out.oversize.push(m.instance_id);
        }
        out.kept.push(m);
    }
    out
}

fn area_order(a: &AnnotationRecord, b: &AnnotationRecord) -> std::cmp::Ordering {
    (b.w * b.h)
        .total_cmp(&(a.w * a.h))
        .then(a.class.cmp(&b.class))
        .then(a.x_c.total_cmp(&b.x_c))
        .then(a.y_c.total_cmp(&b.y_c))
        .then(a.w.total_cmp(&b.w))
}

/// Label file text: one `class x_c y_c w h` line per record, largest box first.
pub fn serialize_labels(records: &[AnnotationRecord]) -> String {
    let mut sorted = records.to_vec();
    sorted.sort_by(area_order);
    let mut s = String::with_capacity(sorted.len() * 40);
    for r in &sorted {
        writeln!(
            s,
            "{} {:.6} {:.6} {:.6} {:.6}",
            r.class.index(),
            r.x_c,
            r.y_c,
            r.w,
            r.h
        )
        .unwrap();
    }
    s
}

pub fn parse_labels(text: &str) -> Result<Vec<AnnotationRecord>, AnnotationError> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let err = |message: String| AnnotationError::Parse {
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split(' ').collect();
            if fields.len() != 5 {
                return Err(err(format!("expected 5 fields, found {}", fields.len())));
            }
            let class = fields[0]
                .parse::<u8>()
                .ok()
                .and_then(ClassId::from_index)
                .ok_or_else(|| err(format!("bad class {:?}", fields[0])))?;
            let mut v = [0.0; 4];
            for (k, f) in fields[1..].iter().enumerate() {
                let x: f64 = f.parse().map_err(|_| err(format!("bad number {f:?}")))?;
                if !(0.0..=1.0).contains(&x) {
                    return Err(err(format!("value {x} outside [0, 1]")));
                }
                v[k] = x;
            }
            Ok(AnnotationRecord {
                class,
                x_c: v[0],
                y_c: v[1],
                w: v[2],
                h: v[3],
            })
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrameAnnotations {
    pub records: Vec<AnnotationRecord>,
    pub masks: Vec<InstanceMask>,
    pub boxes: Vec<PixelBox>,
    pub dropped: usize,
    pub oversize: Vec<u32>,
    /// Kept components per instance id; above 1 when occlusion splits an object.
    pub fragments: BTreeMap<u32, usize>,
}

impl FrameAnnotations {
    pub fn count(&self, class: ClassId) -> usize {
        self.records.iter().filter(|r| r.class == class).count()
    }

    pub fn label_text(&self) -> String {
        serialize_labels(&self.records)
    }
}

/// Full segmentation-to-labels pipeline for one frame.
pub fn annotate_frame(
    segmap: &[u32],
    width: u32,
    height: u32,
    table: &BTreeMap<u32, ClassId>,
) -> Result<FrameAnnotations, AnnotationError> {
    let masks = connected_components(segmap, width, height, table)?;
    let f = filter_instances(masks, width, height);
    let mut out = FrameAnnotations {
        dropped: f.dropped,
        oversize: f.oversize,
        ..Default::default()
    };
    for m in f.kept {
        let b = tight_box(&m)?;
        out.records.push(to_yolo(&b, m.class, width, height)?);
        *out.fragments.entry(m.instance_id).or_default() += 1;
        out.boxes.push(b);
        out.masks.push(m);
    }
    Ok(out)
}
