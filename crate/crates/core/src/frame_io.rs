//! RGB frames, binary PPM (P6) I/O and diagnostic renderings.
//!
//! Only the `P6` flavour with `maxval = 255` is accepted. Header tokens may
//! be separated by any ASCII whitespace and `#` starts a comment that runs to
//! the end of the line. Exactly one whitespace byte separates the maxval from
//! the raster.

use thiserror::Error;

use crate::segmentation::Segmentation;

/// One pixel, `[r, g, b]`.
pub type Rgb = [u8; 3];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameError {
    #[error("frame dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: usize, height: usize },
    #[error("pixel count {actual} does not match {width}x{height}")]
    PixelCount {
        width: usize,
        height: usize,
        actual: usize,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PpmError {
    #[error("unsupported magic {found:?}, expected \"P6\"")]
    UnsupportedMagic { found: String },
    #[error("missing {field} in header")]
    MissingField { field: &'static str },
    #[error("invalid {field} {token:?} at byte {offset}")]
    InvalidField {
        field: &'static str,
        token: String,
        offset: usize,
    },
    #[error("{field} must be positive")]
    ZeroDimension { field: &'static str },
    #[error("maxval must be 255, got {0}")]
    UnsupportedMaxval(u32),
    #[error("expected whitespace after maxval at byte {offset}")]
    MissingRasterSeparator { offset: usize },
    #[error("truncated pixel data: expected {expected} bytes from byte {offset}, found {found}")]
    Truncated {
        offset: usize,
        expected: usize,
        found: usize,
    },
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self, FrameError> {
        if width == 0 || height == 0 {
            return Err(FrameError::ZeroDimension { width, height });
        }
        if pixels.len() != width * height {
            return Err(FrameError::PixelCount {
                width,
                height,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// A frame where every pixel is `colour`.
    ///
    /// # Panics
    /// If either dimension is zero.
    pub fn filled(width: usize, height: usize, colour: Rgb) -> Self {
        assert!(width > 0 && height > 0, "frame dimensions must be positive");
        Self {
            width,
            height,
            pixels: vec![colour; width * height],
        }
    }

    /// Builds a frame by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Rgb) -> Self {
        assert!(width > 0 && height > 0, "frame dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Row-major pixel slice.
    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, colour: Rgb) {
        self.pixels[y * self.width + x] = colour;
    }

    /// Copies the `width`x`height` window whose top-left corner is `(x0, y0)`.
    ///
    /// # Panics
    /// If the window is empty or does not lie inside the frame.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Frame {
        assert!(
            x0 + width <= self.width && y0 + height <= self.height,
            "crop window {width}x{height}+{x0}+{y0} outside {}x{} frame",
            self.width,
            self.height
        );
        let mut pixels = Vec::with_capacity(width * height);
        for y in y0..y0 + height {
            let row = y * self.width;
            pixels.extend_from_slice(&self.pixels[row + x0..row + x0 + width]);
        }
        Frame::new(width, height, pixels).expect("non-empty crop")
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    /// Returns the next token and the byte offset it started at.
    fn token(&mut self) -> Option<(&'a [u8], usize)> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| (&self.bytes[start..self.pos], start))
    }

    fn number(&mut self, field: &'static str) -> Result<u32, PpmError> {
        let (tok, offset) = self.token().ok_or(PpmError::MissingField { field })?;
        let text = String::from_utf8_lossy(tok);
        if !tok.iter().all(u8::is_ascii_digit) {
            return Err(PpmError::InvalidField {
                field,
                token: text.into_owned(),
                offset,
            });
        }
        text.parse().map_err(|_| PpmError::InvalidField {
            field,
            token: text.into_owned(),
            offset,
        })
    }
}

/// Decodes a binary `P6` PPM with `maxval = 255`.
pub fn load_ppm(bytes: &[u8]) -> Result<Frame, PpmError> {
    let mut header = HeaderReader { bytes, pos: 0 };
    // The magic number must be the first two bytes of the file.
    let magic = &bytes[..bytes.len().min(2)];
    if magic != b"P6" {
        return Err(PpmError::UnsupportedMagic {
            found: String::from_utf8_lossy(magic).into_owned(),
        });
    }
    header.pos = 2;
    if !matches!(bytes.get(2), Some(b) if b.is_ascii_whitespace() || *b == b'#') {
        let (tok, _) = header.token().unwrap_or((b"", 0));
        return Err(PpmError::UnsupportedMagic {
            found: format!("P6{}", String::from_utf8_lossy(tok)),
        });
    }

    let width = header.number("width")? as usize;
    if width == 0 {
        return Err(PpmError::ZeroDimension { field: "width" });
    }
    let height = header.number("height")? as usize;
    if height == 0 {
        return Err(PpmError::ZeroDimension { field: "height" });
    }
    let maxval = header.number("maxval")?;
    if maxval != 255 {
        return Err(PpmError::UnsupportedMaxval(maxval));
    }
    match bytes.get(header.pos) {
        Some(b) if b.is_ascii_whitespace() => header.pos += 1,
        _ => {
            return Err(PpmError::MissingRasterSeparator { offset: header.pos });
        }
    }

    let offset = header.pos;
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or(PpmError::InvalidField {
            field: "width",
            token: width.to_string(),
            offset: 0,
        })?;
    let raster = &bytes[offset..];
    if raster.len() < expected {
        return Err(PpmError::Truncated {
            offset,
            expected,
            found: raster.len(),
        });
    }
    let pixels = raster[..expected]
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    Ok(Frame {
        width,
        height,
        pixels,
    })
}

pub fn save_ppm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", frame.width, frame.height).into_bytes();
    out.reserve(frame.pixels.len() * 3);
    for px in &frame.pixels {
        out.extend_from_slice(px);
    }
    out
}

/// Palette colour for a region id: the low 24 bits of `label * 0x9E3779B1`,
/// split as `0xRRGGBB`. Multiplication by an odd constant is a bijection
/// modulo 2^24, so labels below 2^24 never share a colour.
pub fn label_colour(label: u32) -> Rgb {
    let h = label.wrapping_mul(0x9E37_79B1) & 0x00FF_FFFF;
    [(h >> 16) as u8, (h >> 8) as u8, h as u8]
}

/// Renders each region in its palette colour.
pub fn false_colour(segmentation: &Segmentation) -> Frame {
    let pixels = segmentation
        .labels()
        .iter()
        .map(|&l| label_colour(l))
        .collect();
    Frame::new(segmentation.width(), segmentation.height(), pixels)
        .expect("segmentation dimensions are valid")
}

/// White where `mask` is set, black elsewhere.
pub fn mask_image(width: usize, height: usize, mask: &[bool]) -> Frame {
    let pixels = mask
        .iter()
        .map(|&m| if m { [255; 3] } else { [0; 3] })
        .collect();
    Frame::new(width, height, pixels).expect("mask matches dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_raster(header: &str, raster: &[u8]) -> Vec<u8> {
        let mut v = header.as_bytes().to_vec();
        v.extend_from_slice(raster);
        v
    }

    #[test]
    fn decodes_minimal_file() {
        let f = load_ppm(&with_raster("P6\n2 1\n255\n", &[255, 0, 0, 0, 255, 0])).unwrap();
        assert_eq!((f.width(), f.height()), (2, 1));
        assert_eq!(f.pixels(), &[[255, 0, 0], [0, 255, 0]]);
    }

    #[test]
    fn skips_comments_in_header() {
        let bytes = with_raster(
            "P6 # made by hand\n# another\n1\t1 # dims\n255\n",
            &[1, 2, 3],
        );
        assert_eq!(load_ppm(&bytes).unwrap().get(0, 0), [1, 2, 3]);
    }

    #[test]
    fn rejects_p5() {
        let err = load_ppm(&with_raster("P5\n1 1\n255\n", &[0])).unwrap_err();
        assert!(err.to_string().contains("unsupported magic"));
        assert!(matches!(err, PpmError::UnsupportedMagic { .. }));
    }

    #[test]
    fn rejects_magic_with_trailing_garbage() {
        let err = load_ppm(b"P61 1 255\n\0\0\0").unwrap_err();
        assert!(matches!(err, PpmError::UnsupportedMagic { .. }));
    }

    #[test]
    fn rejects_other_maxval() {
        let err = load_ppm(&with_raster("P6\n1 1\n65535\n", &[0; 6])).unwrap_err();
        assert_eq!(err, PpmError::UnsupportedMaxval(65535));
    }

    #[test]
    fn rejects_zero_dimension() {
        let err = load_ppm(b"P6\n0 4\n255\n").unwrap_err();
        assert_eq!(err, PpmError::ZeroDimension { field: "width" });
        let err = load_ppm(b"P6\n4 0\n255\n").unwrap_err();
        assert_eq!(err, PpmError::ZeroDimension { field: "height" });
    }

    #[test]
    fn reports_truncation_offset() {
        let err = load_ppm(&with_raster("P6\n2 2\n255\n", &[0; 5])).unwrap_err();
        assert_eq!(
            err,
            PpmError::Truncated {
                offset: 11,
                expected: 12,
                found: 5
            }
        );
    }

    #[test]
    fn reports_bad_header_token() {
        let err = load_ppm(b"P6\n2 x\n255\n").unwrap_err();
        assert_eq!(
            err,
            PpmError::InvalidField {
                field: "height",
                token: "x".into(),
                offset: 5
            }
        );
        let err = load_ppm(b"P6\n2 2\n").unwrap_err();
        assert_eq!(err, PpmError::MissingField { field: "maxval" });
    }

    #[test]
    fn encodes_minimal_frame() {
        let bytes = save_ppm(&Frame::filled(1, 1, [0, 0, 0]));
        assert_eq!(bytes, b"P6\n1 1\n255\n\0\0\0");
    }

    #[test]
    fn full_size_round_trip() {
        let f = Frame::from_fn(320, 240, |x, y| [x as u8, y as u8, (x ^ y) as u8]);
        let back = load_ppm(&save_ppm(&f)).unwrap();
        assert_eq!(back.len(), 76_800);
        assert_eq!(back, f);
    }

    #[test]
    fn crop_copies_window() {
        let f = Frame::from_fn(5, 4, |x, y| [x as u8, y as u8, 0]);
        let c = f.crop(1, 2, 3, 2);
        assert_eq!((c.width(), c.height()), (3, 2));
        assert_eq!(c.get(0, 0), [1, 2, 0]);
        assert_eq!(c.get(2, 1), [3, 3, 0]);
    }

    #[test]
    fn new_checks_pixel_count() {
        assert!(matches!(
            Frame::new(2, 2, vec![[0; 3]; 3]),
            Err(FrameError::PixelCount { .. })
        ));
        assert!(matches!(
            Frame::new(0, 2, vec![]),
            Err(FrameError::ZeroDimension { .. })
        ));
    }

    #[test]
    fn palette_has_no_collisions_below_4096() {
        let mut seen = std::collections::HashSet::new();
        for l in 1..=4096 {
            assert!(seen.insert(label_colour(l)), "collision at label {l}");
        }
    }
}
