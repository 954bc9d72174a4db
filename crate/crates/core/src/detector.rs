//! Per-frame skin detection: segment, average each region, classify the
//! averages, then take the centroid of every pixel in a skin region.

use std::collections::BTreeMap;
use std::io;

use crate::frame_io::{mask_image, Frame};
use crate::segmentation::{region_stats, segment, Eta, RegionStats};
use crate::skin_mlp::{Mlp, DEFAULT_RHO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectConfig {
    pub eta: Eta,
    pub rho: f64,
    /// Regions with fewer pixels than this are never classified as skin.
    pub min_region: usize,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            eta: Eta::default(),
            rho: DEFAULT_RHO,
            min_region: 1,
        }
    }
}

/// Boolean grid, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn to_frame(&self) -> Frame {
        mask_image(self.width, self.height, &self.bits)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub skin_labels: Vec<u32>,
    pub skin_pixel_count: usize,
    pub mask: Mask,
    pub centroid: Option<(f64, f64)>,
    /// Network output for every region.
    pub scores: BTreeMap<u32, f64>,
    pub regions: Vec<RegionStats>,
}

impl Detection {
    pub fn is_skin(&self, label: u32) -> bool {
        self.skin_labels.binary_search(&label).is_ok()
    }

    /// `label,pixels,mean_r,mean_g,mean_b,score,is_skin`, one row per region.
    pub fn write_scores_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "label", "pixels", "mean_r", "mean_g", "mean_b", "score", "is_skin",
        ])?;
        for r in &self.regions {
            w.write_record([
                r.label.to_string(),
                r.pixel_count.to_string(),
                r.mean_rgb[0].to_string(),
                r.mean_rgb[1].to_string(),
                r.mean_rgb[2].to_string(),
                self.scores[&r.label].to_string(),
                u8::from(self.is_skin(r.label)).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean `(x, y)` of the set pixels, or `None` when the mask is empty.
/// Coordinates are summed as integers and divided once.
pub fn centroid(mask: &Mask) -> Option<(f64, f64)> {
    let (mut sx, mut sy, mut n) = (0u64, 0u64, 0u64);
    for (i, _) in mask.bits.iter().enumerate().filter(|(_, &b)| b) {
        sx += (i % mask.width) as u64;
        sy += (i / mask.width) as u64;
        n += 1;
    }
    (n > 0).then(|| (sx as f64 / n as f64, sy as f64 / n as f64))
}

pub fn detect(frame: &Frame, net: &Mlp, cfg: &DetectConfig) -> Detection {
    let seg = segment(frame, cfg.eta);
    let regions = region_stats(&seg, frame).expect("segmentation built from this frame");

    let mut scores = BTreeMap::new();
    let mut skin_labels = Vec::new();
    // Indexed by label; slot 0 unused.
    let mut is_skin = vec![false; regions.len() + 1];
    for r in &regions {
        let score = net.forward(r.mean_rgb);
        scores.insert(r.label, score);
        if r.pixel_count >= cfg.min_region && score > cfg.rho {
            skin_labels.push(r.label);
            is_skin[r.label as usize] = true;
        }
    }

    let mut mask = Mask::new(frame.width(), frame.height());
    for (bit, &label) in mask.bits.iter_mut().zip(seg.labels()) {
        *bit = is_skin[label as usize];
    }
    let skin_pixel_count = skin_labels
        .iter()
        .map(|&l| regions[l as usize - 1].pixel_count)
        .sum();
    let centroid = centroid(&mask);

    Detection {
        skin_labels,
        skin_pixel_count,
        mask,
        centroid,
        scores,
        regions,
    }
}
