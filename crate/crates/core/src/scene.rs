//! Deterministic synthetic imagery: cluttered non-skin backgrounds for the
//! simulator and the reference frame used for the golden segmentation.

use crate::frame_io::{Frame, Rgb};
use crate::rng::SplitMix64;
use crate::skin_mlp::REFERENCE_SKIN;

/// Background colours, all far (Chebyshev > 60) from every skin sample.
pub const CLUTTER_PALETTE: [Rgb; 8] = [
    [196, 64, 40],
    [210, 180, 70],
    [104, 170, 40],
    [150, 150, 150],
    [228, 124, 92],
    [120, 72, 40],
    [236, 228, 206],
    [170, 40, 110],
];

/// Per-pixel noise amplitude, kept well below the default threshold so each
/// tile segments as one region.
const NOISE: i16 = 6;

fn jitter(rng: &mut SplitMix64, c: Rgb) -> Rgb {
    c.map(|v| {
        let n = i16::from(rng.next_u8() % (2 * NOISE as u8 + 1)) - NOISE;
        (i16::from(v) + n).clamp(0, 255) as u8
    })
}

/// A patchwork of `tile`-pixel squares in palette colours with light noise.
pub fn clutter(width: usize, height: usize, tile: usize, seed: u64) -> Frame {
    let tile = tile.max(1);
    let tiles_x = width.div_ceil(tile);
    let tiles_y = height.div_ceil(tile);
    let mut rng = SplitMix64::new(seed);
    let colours: Vec<Rgb> = (0..tiles_x * tiles_y)
        .map(|_| CLUTTER_PALETTE[(rng.next_u64() % CLUTTER_PALETTE.len() as u64) as usize])
        .collect();
    Frame::from_fn(width, height, |x, y| {
        let c = colours[(y / tile) * tiles_x + x / tile];
        jitter(&mut rng, c)
    })
}

/// 320x240 test card: clutter, a horizontal colour ramp and two skin blobs.
pub fn reference_frame() -> Frame {
    let mut f = clutter(320, 240, 40, 0x5eed);
    for y in 180..220 {
        for x in 0..320 {
            let t = (x * 255 / 319) as u8;
            f.set(x, y, [t, 255 - t, 128]);
        }
    }
    let mut rng = SplitMix64::new(0xb10b);
    let skin = REFERENCE_SKIN[0];
    for y in 60..110 {
        for x in 40..90 {
            let (dx, dy) = (x as i64 - 65, y as i64 - 85);
            if dx * dx + dy * dy <= 24 * 24 {
                f.set(x, y, jitter(&mut rng, skin));
            }
        }
    }
    for y in 100..150 {
        for x in 200..240 {
            f.set(x, y, jitter(&mut rng, REFERENCE_SKIN[1]));
        }
    }
    f
}
