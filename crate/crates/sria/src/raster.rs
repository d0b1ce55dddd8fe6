//! Owned row-major pixel containers and PNG I/O.
//!
//! All rasters store pixel `(x, y)` at index `y * width + x`; `(0, 0)` is the
//! top-left corner. Constructors validate buffer lengths and reject
//! zero-sized rasters so downstream code never re-checks.

use std::io::BufWriter;
use std::path::Path;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};

fn check_dims(width: u32, height: u32, len: usize, channels: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::ZeroSizedRaster { width, height });
    }
    if len != width as usize * height as usize * channels {
        return Err(Error::BadBufferLength { width, height, len });
    }
    Ok(())
}

/// PNG encode with a fast, deterministic parameter set. Identical pixels
/// always produce identical bytes, which the reproducibility guarantees
/// lean on.
fn write_png(path: &Path, data: &[u8], width: u32, height: u32, color: ExtendedColorType) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let enc = PngEncoder::new_with_quality(BufWriter::new(file), CompressionType::Fast, FilterType::Adaptive);
    enc.write_image(data, width, height, color).map_err(|e| Error::image(path, e))
}

fn open_image(path: &Path) -> Result<image::DynamicImage> {
    image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::image(path, e))
}

/// Single-channel 8-bit image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len(), 1)?;
        Ok(Self { width, height, data })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: u8) {
        self.data[(y * self.width + x) as usize] = v;
    }

    /// Loads any PNG/color image and converts it to 8-bit luma.
    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        let img = open_image(path.as_ref())?.to_luma8();
        Self::new(img.width(), img.height(), img.into_raw())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        write_png(path.as_ref(), &self.data, self.width, self.height, ExtendedColorType::L8)
    }
}

/// Boolean mask over a pixel grid. On disk it is a single-channel PNG whose
/// foreground is 255 and background 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height, bits.len(), 1)?;
        Ok(Self { width, height, bits })
    }

    pub fn filled(width: u32, height: u32, value: bool) -> Result<Self> {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.bits[(y * self.width + x) as usize] = v;
    }

    pub fn count_true(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Tight bounds of the foreground as `(x_min, y_min, x_max, y_max)` with
    /// exclusive max edges, or `None` for an all-background mask.
    pub fn tight_bounds(&self) -> Option<(u32, u32, u32, u32)> {
        let mut bounds: Option<(u32, u32, u32, u32)> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    bounds = Some(match bounds {
                        None => (x, y, x + 1, y + 1),
                        Some((x0, y0, x1, y1)) => {
                            (x0.min(x), y0.min(y), x1.max(x + 1), y1.max(y + 1))
                        }
                    });
                }
            }
        }
        bounds
    }

    /// Loads a mask image; any luma value of 128 or more counts as foreground.
    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        let img = open_image(path.as_ref())?.to_luma8();
        let bits = img.as_raw().iter().map(|&v| v >= 128).collect();
        Self::new(img.width(), img.height(), bits)
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let data: Vec<u8> = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        write_png(path.as_ref(), &data, self.width, self.height, ExtendedColorType::L8)
    }
}

/// Per-pixel foreground probabilities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftMask {
    width: u32,
    height: u32,
    probs: Vec<f64>,
}

impl SoftMask {
    pub fn new(width: u32, height: u32, probs: Vec<f64>) -> Result<Self> {
        check_dims(width, height, probs.len(), 1)?;
        if let Some(bad) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidParameter(format!(
                "soft mask probability {bad} outside [0, 1]"
            )));
        }
        Ok(Self { width, height, probs })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.probs[(y * self.width + x) as usize]
    }
}

/// Interleaved 8-bit RGB raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbRaster {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RgbRaster {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len(), 3)?;
        Ok(Self { width, height, data })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            data.extend_from_slice(&rgb);
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = ((y * self.width + x) * 3) as usize;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = ((y * self.width + x) * 3) as usize;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Bilinear resize. Sample positions align pixel centers of the two
    /// grids, so resizing to the same dimensions is the identity.
    pub fn resized(&self, width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroSizedRaster { width, height });
        }
        if width == self.width && height == self.height {
            return Ok(self.clone());
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let mut data = vec![0u8; width as usize * height as usize * 3];
        for y in 0..height {
            let gy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (self.height - 1) as f64);
            let y0 = gy.floor() as u32;
            let y1 = (y0 + 1).min(self.height - 1);
            let fy = gy - y0 as f64;
            for x in 0..width {
                let gx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (self.width - 1) as f64);
                let x0 = gx.floor() as u32;
                let x1 = (x0 + 1).min(self.width - 1);
                let fx = gx - x0 as f64;
                let mut px = [0u8; 3];
                for c in 0..3 {
                    let v00 = self.get(x0, y0)[c] as f64;
                    let v10 = self.get(x1, y0)[c] as f64;
                    let v01 = self.get(x0, y1)[c] as f64;
                    let v11 = self.get(x1, y1)[c] as f64;
                    let top = v00 + (v10 - v00) * fx;
                    let bot = v01 + (v11 - v01) * fx;
                    px[c] = (top + (bot - top) * fy).round().clamp(0.0, 255.0) as u8;
                }
                let i = ((y * width + x) * 3) as usize;
                data[i..i + 3].copy_from_slice(&px);
            }
        }
        Self::new(width, height, data)
    }

    /// Loads any PNG/color image and converts it to 8-bit RGB.
    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        let img = open_image(path.as_ref())?.to_rgb8();
        Self::new(img.width(), img.height(), img.into_raw())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        write_png(path.as_ref(), &self.data, self.width, self.height, ExtendedColorType::Rgb8)
    }
}

/// Saves an interleaved RGBA buffer; used for cutout files.
pub(crate) fn save_rgba_png(path: &Path, data: &[u8], width: u32, height: u32) -> Result<()> {
    check_dims(width, height, data.len(), 4)?;
    write_png(path, data, width, height, ExtendedColorType::Rgba8)
}

/// Loads an image preserving its alpha channel.
pub(crate) fn load_rgba_png(path: &Path) -> Result<(u32, u32, Vec<u8>)> {
    let img = open_image(path)?.to_rgba8();
    Ok((img.width(), img.height(), img.into_raw()))
}
