//! 4-connected region growing with a seed-referenced colour threshold.
//!
//! Pixels are scanned left to right, top to bottom. Every pixel that is still
//! unlabelled when the scan reaches it seeds a new region, numbered `1, 2, ...`
//! in the order seeds are met. The region then grows breadth-first: an
//! unlabelled 4-neighbour of any member joins when
//!
//! ```text
//! max(|r - r_seed|, |g - g_seed|, |b - b_seed|) < eta
//! ```
//!
//! The comparison is always against the seed, never against the neighbour
//! that reached it, so the partition does not depend on the growth order.
//! Each pixel is labelled at the moment it enters the work list, which bounds
//! the total number of insertions by the pixel count.

use std::collections::VecDeque;
use std::fmt;
use std::io;

use thiserror::Error;

use crate::frame_io::{Frame, Rgb};

/// Largest meaningful threshold: with `eta = 256` every neighbour passes.
pub const MAX_ETA: u16 = 256;

/// Segmentation threshold in `[0, 256]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Eta(u16);

impl Eta {
    pub fn new(value: u16) -> Result<Self, SegmentError> {
        if value > MAX_ETA {
            return Err(SegmentError::EtaOutOfRange(value));
        }
        Ok(Self(value))
    }

    pub fn get(self) -> u16 {
        self.0
    }
}

impl Default for Eta {
    /// 28, the value used for the reference segmentation.
    fn default() -> Self {
        Self(28)
    }
}

impl fmt::Display for Eta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SegmentError {
    #[error("eta must be in [0, {MAX_ETA}], got {0}")]
    EtaOutOfRange(u16),
    #[error("segmentation is {seg_w}x{seg_h} but frame is {frame_w}x{frame_h}")]
    DimensionMismatch {
        seg_w: usize,
        seg_h: usize,
        frame_w: usize,
        frame_h: usize,
    },
}

/// Chebyshev distance between two colours.
#[inline]
pub fn channel_distance(a: Rgb, b: Rgb) -> u8 {
    a[0].abs_diff(b[0])
        .max(a[1].abs_diff(b[1]))
        .max(a[2].abs_diff(b[2]))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    /// Row-major pixel index of each region's seed.
    seeds: Vec<u32>,
}

impl Segmentation {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major region ids, each in `1..=region_count()`.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label_at(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn region_count(&self) -> usize {
        self.seeds.len()
    }

    /// Seed pixel of `label`, which must be in `1..=region_count()`.
    pub fn seed(&self, label: u32) -> (usize, usize) {
        let i = self.seeds[label as usize - 1] as usize;
        (i % self.width, i / self.width)
    }

    /// Writes the label map as `x,y,label` rows in scan order, with header.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "label"])?;
        for (i, label) in self.labels.iter().enumerate() {
            let (x, y) = (i % self.width, i / self.width);
            w.write_record([x.to_string(), y.to_string(), label.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Segments `frame` and also returns how many pixels entered the work list.
pub fn segment_counted(frame: &Frame, eta: Eta) -> (Segmentation, usize) {
    let (w, h) = (frame.width(), frame.height());
    let pixels = frame.pixels();
    let eta = eta.get();
    assert!(
        u32::try_from(pixels.len()).is_ok(),
        "frame has more pixels than u32 labels can address"
    );
    let mut labels = vec![0u32; pixels.len()];
    let mut seeds: Vec<u32> = Vec::new();
    let mut queue: VecDeque<u32> = VecDeque::new();
    let mut insertions = 0usize;

    for start in 0..pixels.len() {
        if labels[start] != 0 {
            continue;
        }
        seeds.push(start as u32);
        let label = seeds.len() as u32;
        let seed_colour = pixels[start];
        labels[start] = label;
        queue.push_back(start as u32);
        insertions += 1;

        while let Some(i) = queue.pop_front() {
            let i = i as usize;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if labels[j] == 0 && u16::from(channel_distance(pixels[j], seed_colour)) < eta {
                    labels[j] = label;
                    queue.push_back(j as u32);
                    insertions += 1;
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
    }

    (
        Segmentation {
            width: w,
            height: h,
            labels,
            seeds,
        },
        insertions,
    )
}

pub fn segment(frame: &Frame, eta: Eta) -> Segmentation {
    segment_counted(frame, eta).0
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionStats {
    pub label: u32,
    pub pixel_count: usize,
    pub mean_rgb: [f64; 3],
    /// `(min_x, min_y, max_x, max_y)`, inclusive.
    pub bbox: (usize, usize, usize, usize),
    pub seed: (usize, usize),
}

/// Per-region pixel counts, exact channel means and bounding boxes, ordered
/// by label.
pub fn region_stats(
    segmentation: &Segmentation,
    frame: &Frame,
) -> Result<Vec<RegionStats>, SegmentError> {
    if segmentation.width != frame.width() || segmentation.height != frame.height() {
        return Err(SegmentError::DimensionMismatch {
            seg_w: segmentation.width,
            seg_h: segmentation.height,
            frame_w: frame.width(),
            frame_h: frame.height(),
        });
    }
    struct Acc {
        count: usize,
        sums: [u64; 3],
        bbox: (usize, usize, usize, usize),
    }
    let w = segmentation.width;
    let mut acc: Vec<Acc> = (1..=segmentation.region_count() as u32)
        .map(|label| segmentation.seed(label))
        .map(|(x, y)| Acc {
            count: 0,
            sums: [0; 3],
            bbox: (x, y, x, y),
        })
        .collect();

    for (i, (&label, px)) in segmentation.labels.iter().zip(frame.pixels()).enumerate() {
        let (x, y) = (i % w, i / w);
        let a = &mut acc[label as usize - 1];
        a.count += 1;
        for c in 0..3 {
            a.sums[c] += u64::from(px[c]);
        }
        a.bbox.0 = a.bbox.0.min(x);
        a.bbox.1 = a.bbox.1.min(y);
        a.bbox.2 = a.bbox.2.max(x);
        a.bbox.3 = a.bbox.3.max(y);
    }

    Ok(acc
        .into_iter()
        .zip(1u32..)
        .map(|(a, label)| {
            let n = a.count as f64;
            RegionStats {
                label,
                pixel_count: a.count,
                mean_rgb: a.sums.map(|s| s as f64 / n),
                bbox: a.bbox,
                seed: segmentation.seed(label),
            }
        })
        .collect())
}
