use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageReader};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Placement of a mask crop inside its source image, in normalized `[0, 1]` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OriginBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl OriginBox {
    pub fn is_within_unit_frame(&self) -> bool {
        let eps = 1e-9;
        self.x >= -eps
            && self.y >= -eps
            && self.w >= 0.0
            && self.h >= 0.0
            && self.x + self.w <= 1.0 + eps
            && self.y + self.h <= 1.0 + eps
    }
}

/// Row-major occupancy grid with at least one set pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width * height != bits.len() {
            return Err(Error::InvalidArgument(format!(
                "mask {width}x{height} needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        if !bits.iter().any(|&b| b) {
            return Err(Error::EmptyMask);
        }
        Ok(BinaryMask { width, height, bits })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Like [`get`](Self::get) but false outside the grid.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height && self.get(x as usize, y as usize)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Coordinates of every set pixel, row-major.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }

    /// Smallest `(x, y, w, h)` rectangle containing every set pixel.
    pub fn content_bounds(&self) -> (usize, usize, usize, usize) {
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for (x, y) in self.pixels() {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        (x0, y0, x1 - x0 + 1, y1 - y0 + 1)
    }

    /// Crops the grid to the extent of its set pixels.
    pub fn cropped(&self) -> BinaryMask {
        let (x0, y0, w, h) = self.content_bounds();
        BinaryMask::from_fn(w, h, |x, y| self.get(x0 + x, y0 + y)).expect("crop keeps set pixels")
    }

    pub fn mirrored_horizontally(&self) -> BinaryMask {
        BinaryMask::from_fn(self.width, self.height, |x, y| self.get(self.width - 1 - x, y)).expect("non-empty")
    }

    /// Nearest-neighbor resample by a uniform scale factor.
    pub fn scaled(&self, scale: f64) -> Result<BinaryMask> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad mask scale {scale}")));
        }
        let w = ((self.width as f64 * scale).round() as usize).max(1);
        let h = ((self.height as f64 * scale).round() as usize).max(1);
        let sx = self.width as f64 / w as f64;
        let sy = self.height as f64 / h as f64;
        BinaryMask::from_fn(w, h, |x, y| {
            let ox = (((x as f64 + 0.5) * sx) as usize).min(self.width - 1);
            let oy = (((y as f64 + 0.5) * sy) as usize).min(self.height - 1);
            self.get(ox, oy)
        })
    }

    /// Reads an 8-bit graymap; any nonzero sample is foreground.
    pub fn load_pgm(path: &Path) -> Result<Self> {
        let bad = |reason: String| Error::InvalidArgument(format!("{}: {reason}", path.display()));
        let img = ImageReader::open(path)
            .map_err(|e| Error::io(path, e))?
            .with_guessed_format()
            .map_err(|e| Error::io(path, e))?
            .decode()
            .map_err(|e| bad(e.to_string()))?
            .to_luma8();
        let (w, h) = img.dimensions();
        let bits = img.as_raw().iter().map(|&v| v != 0).collect();
        Self::new(w as usize, h as usize, bits)
    }

    /// Encodes the mask as binary PGM (P5), foreground 255.
    pub fn to_pgm_bytes(&self) -> Vec<u8> {
        let raw: Vec<u8> = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        let mut out = Vec::new();
        PnmEncoder::new(&mut out)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&raw, self.width as u32, self.height as u32, ExtendedColorType::L8)
            .expect("in-memory PGM encoding");
        out
    }
}
