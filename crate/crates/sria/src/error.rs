//! Crate-wide error type.
//!
//! Placement rejection ([`Error::TruncationBelowFloor`]) is retriable: the
//! compositor resamples offsets when it sees it. Everything else is a real
//! failure of input data, configuration, or I/O.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: u32,
        left_height: u32,
        right_width: u32,
        right_height: u32,
    },

    #[error("raster of {width}x{height} pixels does not match a buffer of {len} elements")]
    BadBufferLength { width: u32, height: u32, len: usize },

    #[error("zero-sized raster ({width}x{height})")]
    ZeroSizedRaster { width: u32, height: u32 },

    #[error("mask has no foreground pixels")]
    EmptyMask,

    #[error("degenerate box [{x_min}, {x_max}) x [{y_min}, {y_max})")]
    DegenerateBox { x_min: f64, y_min: f64, x_max: f64, y_max: f64 },

    #[error("box [{x_min}, {x_max}) x [{y_min}, {y_max}) falls outside a {width}x{height} raster")]
    BoxOutOfBounds {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
        width: u32,
        height: u32,
    },

    #[error("{0}")]
    InvalidParameter(String),

    #[error("scale {scale} collapses a {width}x{height} cutout below one pixel")]
    ScaleCollapse { scale: f64, width: u32, height: u32 },

    #[error("placement keeps {visible_fraction:.4} of the object in frame, below the floor {floor:.4}")]
    TruncationBelowFloor { visible_fraction: f64, floor: f64 },

    #[error("no instance could be placed within the configured constraints")]
    NoInstancesPlaced,

    #[error("class {class:?} has no cutouts")]
    EmptyClass { class: String },

    #[error("class index {index} exceeds the supported maximum {max}")]
    ClassIndexRange { index: u32, max: u32 },

    #[error("catalog has no backgrounds")]
    NoBackgrounds,

    #[error("catalog has no object classes")]
    NoClasses,

    #[error("missing required directory {}", path.display())]
    MissingLayout { path: PathBuf },

    #[error("no ground-truth boxes supplied")]
    NoGroundTruth,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    /// Process exit code when this error terminates the CLI: usage mistakes
    /// exit with 1, data and I/O failures with 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn image(path: impl Into<PathBuf>, source: image::ImageError) -> Self {
        Error::Image { path: path.into(), source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json { path: path.into(), source }
    }
}
