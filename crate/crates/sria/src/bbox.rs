//! Axis-aligned bounding boxes.
//!
//! Min edges are inclusive, max edges exclusive: the box `[0, 4) x [0, 4)`
//! covers the 16 pixels whose indices are 0..=3 on both axes. Coordinates are
//! `f64` so the same type serves exact pixel-grid boxes and fractional boxes
//! recovered from normalized annotation files.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    /// Errors unless `x_min < x_max`, `y_min < y_max`, and all coordinates
    /// are finite.
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let finite =
            x_min.is_finite() && y_min.is_finite() && x_max.is_finite() && y_max.is_finite();
        if !finite || x_min >= x_max || y_min >= y_max {
            return Err(Error::DegenerateBox { x_min, y_min, x_max, y_max });
        }
        Ok(Self { x_min, y_min, x_max, y_max })
    }

    /// Exact pixel-grid box: covers columns `x_min..x_max` and rows
    /// `y_min..y_max`.
    pub fn from_pixel_bounds(x_min: u32, y_min: u32, x_max: u32, y_max: u32) -> Result<Self> {
        Self::new(x_min as f64, y_min as f64, x_max as f64, y_max as f64)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// True when the box lies inside a `width` x `height` raster.
    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.x_min >= 0.0
            && self.y_min >= 0.0
            && self.x_max <= width as f64
            && self.y_max <= height as f64
    }
}
