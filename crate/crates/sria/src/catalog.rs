//! Object cutouts, background plates, and the on-disk catalog layout.
//!
//! A catalog directory looks like:
//!
//! ```text
//! catalog/
//!   objects/
//!     <class name>/
//!       <id>.png + <id>_mask.png   # photo plus binary mask, or
//!       <id>_rgba.png              # pre-cut alpha-matted patch
//!   backgrounds/
//!     *.png
//!     tags.json                    # optional: {"file.png": ["tag", ...]}
//! ```
//!
//! Class indices are assigned by sorted directory name, so reloading the same
//! tree always yields the same dense, stable indexing.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{self, BinaryMask, RgbRaster};

/// Largest supported class index; the catalog holds at most 31 classes.
pub const MAX_CLASS_INDEX: u32 = 30;

/// Reference vocabulary for airport foreign-object-debris datasets.
pub const FOD_CLASS_NAMES: [&str; 31] = [
    "Battery",
    "Bolt washer",
    "Bolt",
    "Clamp part",
    "Fuel cap",
    "Metal part",
    "Nut",
    "Plastic part",
    "Rock",
    "Washer",
    "Wire",
    "Wrench",
    "Cutter",
    "Label",
    "Luggage tag",
    "Nail",
    "Pliers",
    "Metal sheet",
    "Hose",
    "Adjustable clamp",
    "Adjustable wrench",
    "Bolt nut",
    "Hammer",
    "Luggage part",
    "Paint chip",
    "Pen",
    "Screw",
    "Screw driver",
    "Soda can",
    "Wood",
    "Tape",
];

/// The FOD reference vocabulary as ready-made class ids.
pub fn fod_classes() -> Vec<ClassId> {
    FOD_CLASS_NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| ClassId::new(i as u32, *name).unwrap())
        .collect()
}

/// A class label: dense index plus human-readable name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassId {
    index: u32,
    name: String,
}

impl ClassId {
    /// Errors when `index` exceeds [`MAX_CLASS_INDEX`].
    pub fn new(index: u32, name: impl Into<String>) -> Result<Self> {
        if index > MAX_CLASS_INDEX {
            return Err(Error::ClassIndexRange { index, max: MAX_CLASS_INDEX });
        }
        Ok(Self { index, name: name.into() })
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// An alpha-matted object patch.
///
/// Invariants enforced at construction: the alpha channel is strictly 0 or
/// 255, at least one pixel is opaque, and the crop is tight (opaque pixels
/// touch all four edges).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cutout {
    class_id: ClassId,
    width: u32,
    height: u32,
    rgba: Vec<u8>,
    source_id: String,
}

impl Cutout {
    /// Builds a cutout from an interleaved RGBA buffer. Alpha is binarized at
    /// 128 and the buffer is cropped to the opaque extent. Errors when no
    /// pixel remains opaque.
    pub fn from_rgba(
        class_id: ClassId,
        width: u32,
        height: u32,
        rgba: Vec<u8>,
        source_id: impl Into<String>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroSizedRaster { width, height });
        }
        if rgba.len() != width as usize * height as usize * 4 {
            return Err(Error::BadBufferLength { width, height, len: rgba.len() });
        }

        let alpha_at = |x: u32, y: u32| rgba[((y * width + x) * 4 + 3) as usize] >= 128;
        let mut bounds: Option<(u32, u32, u32, u32)> = None;
        for y in 0..height {
            for x in 0..width {
                if alpha_at(x, y) {
                    bounds = Some(match bounds {
                        None => (x, y, x + 1, y + 1),
                        Some((x0, y0, x1, y1)) => {
                            (x0.min(x), y0.min(y), x1.max(x + 1), y1.max(y + 1))
                        }
                    });
                }
            }
        }
        let (x0, y0, x1, y1) = bounds.ok_or(Error::EmptyMask)?;

        let (w, h) = (x1 - x0, y1 - y0);
        let mut cropped = Vec::with_capacity((w * h * 4) as usize);
        for y in y0..y1 {
            for x in x0..x1 {
                let i = ((y * width + x) * 4) as usize;
                cropped.extend_from_slice(&rgba[i..i + 3]);
                cropped.push(if rgba[i + 3] >= 128 { 255 } else { 0 });
            }
        }
        Ok(Self { class_id, width: w, height: h, rgba: cropped, source_id: source_id.into() })
    }

    pub fn class_id(&self) -> &ClassId {
        &self.class_id
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Interleaved RGBA pixels; alpha is strictly 0 or 255.
    pub fn rgba(&self) -> &[u8] {
        &self.rgba
    }

    /// Where this cutout came from, e.g. a catalog-relative file path.
    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn with_source_id(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }

    pub fn alpha_at(&self, x: u32, y: u32) -> bool {
        self.rgba[((y * self.width + x) * 4 + 3) as usize] == 255
    }

    pub fn color_at(&self, x: u32, y: u32) -> [u8; 3] {
        let i = ((y * self.width + x) * 4) as usize;
        [self.rgba[i], self.rgba[i + 1], self.rgba[i + 2]]
    }

    /// Number of opaque pixels.
    pub fn alpha_count(&self) -> u64 {
        self.rgba.chunks_exact(4).filter(|px| px[3] == 255).count() as u64
    }

    /// The opaque footprint as a standalone mask.
    pub fn alpha_mask(&self) -> BinaryMask {
        let bits = self.rgba.chunks_exact(4).map(|px| px[3] == 255).collect();
        BinaryMask::new(self.width, self.height, bits).unwrap()
    }

    pub fn save_rgba_png(&self, path: impl AsRef<Path>) -> Result<()> {
        raster::save_rgba_png(path.as_ref(), &self.rgba, self.width, self.height)
    }

    pub fn load_rgba_png(path: impl AsRef<Path>, class_id: ClassId) -> Result<Self> {
        let path = path.as_ref();
        let (w, h, rgba) = raster::load_rgba_png(path)?;
        Self::from_rgba(class_id, w, h, rgba, path.display().to_string())
    }
}

/// A background plate to paste objects onto.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Background {
    pub rgb: RgbRaster,
    /// Free-form surface descriptors ("yellow-lines", "cracks", ...).
    pub tags: Vec<String>,
    pub source_id: String,
}

impl Background {
    pub fn new(rgb: RgbRaster, tags: Vec<String>, source_id: impl Into<String>) -> Self {
        Self { rgb, tags, source_id: source_id.into() }
    }

    pub fn width(&self) -> u32 {
        self.rgb.width()
    }

    pub fn height(&self) -> u32 {
        self.rgb.height()
    }

    pub fn load_png(path: impl AsRef<Path>, tags: Vec<String>) -> Result<Self> {
        let path = path.as_ref();
        Ok(Self::new(RgbRaster::load_png(path)?, tags, path.display().to_string()))
    }
}

/// One object class and its cutouts.
#[derive(Clone, Debug)]
pub struct CatalogClass {
    pub id: ClassId,
    pub cutouts: Vec<Cutout>,
}

/// Everything synthesis draws from: per-class cutouts plus backgrounds.
#[derive(Clone, Debug, Default)]
pub struct Catalog {
    pub classes: Vec<CatalogClass>,
    pub backgrounds: Vec<Background>,
}

impl Catalog {
    pub fn class_by_name(&self, name: &str) -> Option<&CatalogClass> {
        self.classes.iter().find(|c| c.id.name() == name)
    }

    pub fn total_cutouts(&self) -> usize {
        self.classes.iter().map(|c| c.cutouts.len()).sum()
    }
}

/// Cuts the masked object out of `img`: the result is the tight crop of the
/// mask's foreground, with color copied from the image and alpha 255 exactly
/// on foreground pixels.
pub fn extract_cutout(img: &RgbRaster, mask: &BinaryMask, cls: &ClassId) -> Result<Cutout> {
    if img.width() != mask.width() || img.height() != mask.height() {
        return Err(Error::DimensionMismatch {
            left_width: img.width(),
            left_height: img.height(),
            right_width: mask.width(),
            right_height: mask.height(),
        });
    }
    let (x0, y0, x1, y1) = mask.tight_bounds().ok_or(Error::EmptyMask)?;
    let (w, h) = (x1 - x0, y1 - y0);
    let mut rgba = Vec::with_capacity((w * h * 4) as usize);
    for y in y0..y1 {
        for x in x0..x1 {
            let [r, g, b] = img.get(x, y);
            rgba.extend_from_slice(&[r, g, b, if mask.get(x, y) { 255 } else { 0 }]);
        }
    }
    Cutout::from_rgba(cls.clone(), w, h, rgba, "")
}

fn sorted_entries(dir: &Path, keep: impl Fn(&Path) -> bool) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if keep(&path) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn file_name(path: &Path) -> String {
    path.file_name().unwrap_or_default().to_string_lossy().into_owned()
}

/// Loads a catalog directory (layout in the module docs). Classes are indexed
/// by sorted directory name; a class directory without usable cutouts is kept
/// (and later skipped by synthesis) with a warning.
pub fn load_catalog(root: impl AsRef<Path>) -> Result<Catalog> {
    let root = root.as_ref();
    let objects_dir = root.join("objects");
    let backgrounds_dir = root.join("backgrounds");
    for dir in [&objects_dir, &backgrounds_dir] {
        if !dir.is_dir() {
            return Err(Error::MissingLayout { path: dir.clone() });
        }
    }

    let class_dirs = sorted_entries(&objects_dir, |p| p.is_dir())?;
    if class_dirs.is_empty() {
        return Err(Error::NoClasses);
    }
    if class_dirs.len() as u32 > MAX_CLASS_INDEX + 1 {
        return Err(Error::ClassIndexRange {
            index: class_dirs.len() as u32 - 1,
            max: MAX_CLASS_INDEX,
        });
    }

    let mut classes = Vec::new();
    for (index, dir) in class_dirs.iter().enumerate() {
        let id = ClassId::new(index as u32, file_name(dir))?;
        let files = sorted_entries(dir, |p| {
            p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"))
        })?;
        let mut cutouts = Vec::new();
        for file in &files {
            let name = file_name(file);
            let rel = format!("objects/{}/{}", id.name(), name);
            if name.ends_with("_mask.png") {
                continue; // consumed together with its photo
            }
            if name.ends_with("_rgba.png") {
                let (w, h, rgba) = raster::load_rgba_png(file)?;
                cutouts.push(Cutout::from_rgba(id.clone(), w, h, rgba, rel)?);
                continue;
            }
            let mask_path = file.with_file_name(format!(
                "{}_mask.png",
                file.file_stem().unwrap_or_default().to_string_lossy()
            ));
            if !mask_path.is_file() {
                log::warn!("{}: no companion {} — skipped", file.display(), file_name(&mask_path));
                continue;
            }
            let img = RgbRaster::load_png(file)?;
            let mask = BinaryMask::load_png(&mask_path)?;
            cutouts.push(extract_cutout(&img, &mask, &id)?.with_source_id(rel));
        }
        if cutouts.is_empty() {
            log::warn!("class {:?} has no usable cutouts", id.name());
        }
        classes.push(CatalogClass { id, cutouts });
    }

    let tags_path = backgrounds_dir.join("tags.json");
    let tags: BTreeMap<String, Vec<String>> = if tags_path.is_file() {
        let text = std::fs::read_to_string(&tags_path).map_err(|e| Error::io(&tags_path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(&tags_path, e))?
    } else {
        BTreeMap::new()
    };

    let mut backgrounds = Vec::new();
    for file in sorted_entries(&backgrounds_dir, |p| {
        p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"))
    })? {
        let name = file_name(&file);
        let file_tags = tags.get(&name).cloned().unwrap_or_default();
        let rgb = RgbRaster::load_png(&file)?;
        backgrounds.push(Background::new(rgb, file_tags, format!("backgrounds/{name}")));
    }
    if backgrounds.is_empty() {
        return Err(Error::NoBackgrounds);
    }

    Ok(Catalog { classes, backgrounds })
}
