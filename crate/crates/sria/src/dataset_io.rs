//! Dataset serialization and related plumbing.
//!
//! * **Detector text labels** — one object per line, `class cx cy w h`
//!   normalized to `[0, 1]` at six decimal places, LF-terminated; prediction
//!   files carry a sixth confidence column.
//! * **COCO-style JSON** — `images` / `annotations` / `categories` arrays
//!   with absolute-pixel `[x, y, w, h]` boxes, dense 1-based ids, keys
//!   sorted, two-space indentation.
//! * **Mix-up** — pixel blends `λ·x₁ + (1−λ)·x₂` (or binary-mask selection)
//!   with weighted-union labels.
//! * **[`DatasetWriter`]** / [`dataset_stats`] — the on-disk dataset layout
//!   (`images/`, `labels/`, `coco.json`, `manifest.json`, `meta/`) and its
//!   recount-based statistics report.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bbox::BoundingBox;
use crate::catalog::ClassId;
use crate::error::{Error, Result};
use crate::raster::{BinaryMask, RgbRaster};
use crate::scheduler::{BatchImage, DatasetManifest};

/// One axis-aligned box annotation, pinned to the image it annotates so the
/// normalized form is always well defined.
#[derive(Clone, Debug, PartialEq)]
pub struct Annotation {
    class_id: ClassId,
    bbox: BoundingBox,
    image_width: u32,
    image_height: u32,
}

impl Annotation {
    /// Errors unless the box lies within the image.
    pub fn new(class_id: ClassId, bbox: BoundingBox, image_width: u32, image_height: u32) -> Result<Self> {
        if !bbox.fits_within(image_width, image_height) {
            return Err(Error::BoxOutOfBounds {
                x_min: bbox.x_min,
                y_min: bbox.y_min,
                x_max: bbox.x_max,
                y_max: bbox.y_max,
                width: image_width,
                height: image_height,
            });
        }
        Ok(Self { class_id, bbox, image_width, image_height })
    }

    pub fn class_id(&self) -> &ClassId {
        &self.class_id
    }

    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    pub fn image_size(&self) -> (u32, u32) {
        (self.image_width, self.image_height)
    }

    /// `(cx, cy, w, h)`, each in `[0, 1]`.
    pub fn normalized(&self) -> (f64, f64, f64, f64) {
        let w = self.image_width as f64;
        let h = self.image_height as f64;
        (
            (self.bbox.x_min + self.bbox.x_max) / 2.0 / w,
            (self.bbox.y_min + self.bbox.y_max) / 2.0 / h,
            self.bbox.width() / w,
            self.bbox.height() / h,
        )
    }
}

/// One parsed label line in normalized coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabelRecord {
    pub class_index: u32,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    /// Present exactly when the file is a prediction file.
    pub confidence: Option<f64>,
}

impl LabelRecord {
    /// The record's box in normalized `[0, 1]` coordinates, clamped against
    /// six-decimal rounding spill at the image border.
    pub fn normalized_bbox(&self) -> Result<BoundingBox> {
        BoundingBox::new(
            (self.cx - self.w / 2.0).max(0.0),
            (self.cy - self.h / 2.0).max(0.0),
            (self.cx + self.w / 2.0).min(1.0),
            (self.cy + self.h / 2.0).min(1.0),
        )
    }
}

/// Renders annotations as detector text. All annotations must agree on the
/// image dimensions; an empty slice yields an empty string.
pub fn write_detector_txt(annotations: &[Annotation]) -> Result<String> {
    if let Some(first) = annotations.first() {
        if let Some(odd) = annotations.iter().find(|a| a.image_size() != first.image_size()) {
            let (lw, lh) = first.image_size();
            let (rw, rh) = odd.image_size();
            return Err(Error::DimensionMismatch {
                left_width: lw,
                left_height: lh,
                right_width: rw,
                right_height: rh,
            });
        }
    }
    let mut out = String::new();
    for ann in annotations {
        let (cx, cy, w, h) = ann.normalized();
        out.push_str(&format!(
            "{} {cx:.6} {cy:.6} {w:.6} {h:.6}\n",
            ann.class_id.index()
        ));
    }
    Ok(out)
}

/// Renders mix-up labels: the detector format plus a sixth weight column.
pub fn write_weighted_txt(labels: &[(Annotation, f64)]) -> Result<String> {
    let mut out = String::new();
    for (ann, weight) in labels {
        let (cx, cy, w, h) = ann.normalized();
        out.push_str(&format!(
            "{} {cx:.6} {cy:.6} {w:.6} {h:.6} {weight:.6}\n",
            ann.class_id.index()
        ));
    }
    Ok(out)
}

fn parse_fraction(path: &Path, line_no: usize, field: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line: line_no,
        message: format!("{field} {raw:?} is not a number"),
    })?;
    if !v.is_finite() || !(0.0..=1.0).contains(&v) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: format!("{field} {v} outside [0, 1]"),
        });
    }
    Ok(v)
}

/// Strict label-line parser. Ground-truth files must have exactly five
/// fields per line; prediction files exactly six (trailing confidence).
pub fn read_label_records(path: impl AsRef<Path>, with_confidence: bool) -> Result<Vec<LabelRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_label_records(&text, path, with_confidence)
}

fn parse_label_records(text: &str, path: &Path, with_confidence: bool) -> Result<Vec<LabelRecord>> {
    let expected = if with_confidence { 6 } else { 5 };
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != expected {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        let class_index: u32 = fields[0].parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: format!("class index {:?} is not a non-negative integer", fields[0]),
        })?;
        let cx = parse_fraction(path, line_no, "cx", fields[1])?;
        let cy = parse_fraction(path, line_no, "cy", fields[2])?;
        let w = parse_fraction(path, line_no, "w", fields[3])?;
        let h = parse_fraction(path, line_no, "h", fields[4])?;
        if w <= 0.0 || h <= 0.0 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("degenerate box ({w} x {h})"),
            });
        }
        let confidence = if with_confidence {
            Some(parse_fraction(path, line_no, "confidence", fields[5])?)
        } else {
            None
        };
        records.push(LabelRecord { class_index, cx, cy, w, h, confidence });
    }
    Ok(records)
}

/// Reads a ground-truth label file into annotations against the given image
/// dimensions. Class names are synthesized as `class_<index>`.
pub fn read_detector_txt(
    path: impl AsRef<Path>,
    image_width: u32,
    image_height: u32,
) -> Result<Vec<Annotation>> {
    let path = path.as_ref();
    read_label_records(path, false)?
        .into_iter()
        .map(|rec| {
            let cls = ClassId::new(rec.class_index, format!("class_{}", rec.class_index))?;
            let nb = rec.normalized_bbox()?;
            let bbox = BoundingBox::new(
                nb.x_min * image_width as f64,
                nb.y_min * image_height as f64,
                nb.x_max * image_width as f64,
                nb.y_max * image_height as f64,
            )?;
            Annotation::new(cls, bbox, image_width, image_height)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// COCO-style JSON
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocoImage {
    pub id: u64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocoAnnotation {
    pub id: u64,
    pub image_id: u64,
    pub category_id: u32,
    /// Absolute pixels, `[x, y, w, h]`.
    pub bbox: [f64; 4],
    #[serde(default)]
    pub area: f64,
    #[serde(default)]
    pub iscrowd: u8,
    /// Detection confidence; present only in prediction files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocoCategory {
    pub id: u32,
    pub name: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CocoDataset {
    pub images: Vec<CocoImage>,
    pub annotations: Vec<CocoAnnotation>,
    pub categories: Vec<CocoCategory>,
}

/// Builds a COCO dataset with dense 1-based image and annotation ids;
/// category id is class index + 1. `entries` are `(file_name, annotations)`.
pub fn coco_from_annotations(
    entries: &[(String, Vec<Annotation>)],
    categories: &BTreeMap<u32, String>,
) -> CocoDataset {
    let mut ds = CocoDataset {
        categories: categories
            .iter()
            .map(|(&idx, name)| CocoCategory { id: idx + 1, name: name.clone() })
            .collect(),
        ..Default::default()
    };
    let mut next_ann = 1u64;
    for (i, (file_name, annotations)) in entries.iter().enumerate() {
        let image_id = i as u64 + 1;
        let (width, height) = annotations
            .first()
            .map(|a| a.image_size())
            .unwrap_or((0, 0));
        ds.images.push(CocoImage { id: image_id, file_name: file_name.clone(), width, height });
        for ann in annotations {
            let b = ann.bbox();
            ds.annotations.push(CocoAnnotation {
                id: next_ann,
                image_id,
                category_id: ann.class_id().index() + 1,
                bbox: [b.x_min, b.y_min, b.width(), b.height()],
                area: b.area(),
                iscrowd: 0,
                score: None,
            });
            next_ann += 1;
        }
    }
    ds
}

/// Canonical JSON bytes: keys sorted, two-space indentation, trailing
/// newline. Serializing through `serde_json::Value` is what sorts the keys.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)
        .map_err(|e| Error::json(PathBuf::from("<memory>"), e))?;
    let mut text = serde_json::to_string_pretty(&v)
        .map_err(|e| Error::json(PathBuf::from("<memory>"), e))?;
    text.push('\n');
    Ok(text)
}

pub fn write_coco_json(ds: &CocoDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_canonical_json(ds)?).map_err(|e| Error::io(path, e))
}

pub fn read_coco_json(path: impl AsRef<Path>) -> Result<CocoDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

// ---------------------------------------------------------------------------
// Mix-up
// ---------------------------------------------------------------------------

/// A blended training sample: the mixed raster plus both images' boxes
/// weighted `λ` (first image) and `1 − λ` (second).
#[derive(Clone, Debug)]
pub struct MixupSample {
    pub image: RgbRaster,
    pub labels: Vec<(Annotation, f64)>,
    pub lambda: f64,
}

fn check_same_size(a: (u32, u32), b: (u32, u32)) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            left_width: a.0,
            left_height: a.1,
            right_width: b.0,
            right_height: b.1,
        });
    }
    Ok(())
}

/// Pixel blend `λ·a + (1−λ)·b`, rounded to the nearest byte. With a mask the
/// blend degenerates to bit-exact selection: mask-true pixels come from `a`,
/// the rest from `b`. `λ = 1` and `λ = 0` are bit-exact endpoint copies.
pub fn mixup_image(
    a: &RgbRaster,
    b: &RgbRaster,
    lambda: f64,
    mask: Option<&BinaryMask>,
) -> Result<RgbRaster> {
    if !lambda.is_finite() || !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("lambda {lambda} outside [0, 1]")));
    }
    check_same_size((a.width(), a.height()), (b.width(), b.height()))?;
    if let Some(m) = mask {
        check_same_size((a.width(), a.height()), (m.width(), m.height()))?;
        let data = a
            .data()
            .iter()
            .zip(b.data())
            .enumerate()
            .map(|(i, (&pa, &pb))| if m.bits()[i / 3] { pa } else { pb })
            .collect();
        return RgbRaster::new(a.width(), a.height(), data);
    }
    if lambda == 1.0 {
        return Ok(a.clone());
    }
    if lambda == 0.0 {
        return Ok(b.clone());
    }
    let wb = 1.0 - lambda;
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&pa, &pb)| (lambda * pa as f64 + wb * pb as f64).round() as u8)
        .collect();
    RgbRaster::new(a.width(), a.height(), data)
}

/// Blends two annotated images. Annotations must match their image's
/// dimensions; the output carries the union of both label sets with weights
/// `λ` and `1 − λ`.
pub fn mixup(
    a: &RgbRaster,
    a_labels: &[Annotation],
    b: &RgbRaster,
    b_labels: &[Annotation],
    lambda: f64,
    mask: Option<&BinaryMask>,
) -> Result<MixupSample> {
    for ann in a_labels {
        check_same_size(ann.image_size(), (a.width(), a.height()))?;
    }
    for ann in b_labels {
        check_same_size(ann.image_size(), (b.width(), b.height()))?;
    }
    let image = mixup_image(a, b, lambda, mask)?;
    let mut labels = Vec::with_capacity(a_labels.len() + b_labels.len());
    labels.extend(a_labels.iter().cloned().map(|ann| (ann, lambda)));
    labels.extend(b_labels.iter().cloned().map(|ann| (ann, 1.0 - lambda)));
    Ok(MixupSample { image, labels, lambda })
}

/// Draws a mixing weight from Beta(alpha, alpha) — uniform at the default
/// `alpha = 1`. Uses Jöhnk's rejection method, fine for alpha of order one.
pub fn sample_lambda(rng: &mut impl Rng, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidParameter(format!("alpha {alpha} must be positive")));
    }
    if alpha == 1.0 {
        return Ok(rng.random());
    }
    loop {
        let u = rng.random::<f64>().powf(1.0 / alpha);
        let v = rng.random::<f64>().powf(1.0 / alpha);
        let s = u + v;
        if s > 0.0 && s <= 1.0 {
            return Ok(u / s);
        }
    }
}

// ---------------------------------------------------------------------------
// Dataset writing
// ---------------------------------------------------------------------------

/// Writes the on-disk dataset layout:
///
/// ```text
/// out/
///   images/<stem>.png          composited canvases
///   labels/<stem>.txt          detector text annotations
///   meta/<stem>.json           placement + augmentation audit record
///   meta/alphas/<stem>_<k>.png per-instance transformed alpha masks
///   coco.json                  COCO-style annotations (written by finish)
///   manifest.json              per-class tallies (written by finish)
/// ```
///
/// Creating a writer on a non-empty directory that does not contain a
/// `manifest.json` marker is refused; a directory holding a previous dataset
/// is wiped and rewritten.
pub struct DatasetWriter {
    root: PathBuf,
    entries: Vec<(String, Vec<Annotation>)>,
    categories: BTreeMap<u32, String>,
}

impl DatasetWriter {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        if root.exists() {
            let occupied = fs::read_dir(&root)
                .map_err(|e| Error::io(&root, e))?
                .next()
                .is_some();
            if occupied && !root.join("manifest.json").exists() {
                return Err(Error::Usage(format!(
                    "output directory {} is not empty and does not look like a dataset \
                     (no manifest.json); refusing to overwrite",
                    root.display()
                )));
            }
            if occupied {
                for sub in ["images", "labels", "meta"] {
                    let p = root.join(sub);
                    if p.exists() {
                        fs::remove_dir_all(&p).map_err(|e| Error::io(&p, e))?;
                    }
                }
                for f in ["coco.json", "manifest.json"] {
                    let p = root.join(f);
                    if p.exists() {
                        fs::remove_file(&p).map_err(|e| Error::io(&p, e))?;
                    }
                }
            }
        }
        for sub in ["images", "labels", "meta/alphas"] {
            let p = root.join(sub);
            fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
        Ok(Self { root, entries: Vec::new(), categories: BTreeMap::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Pre-registers classes so `coco.json` lists categories even for
    /// classes that produced no images.
    pub fn register_class(&mut self, index: u32, name: &str) {
        self.categories.insert(index, name.to_string());
    }

    /// Writes one generated image: raster, labels, and the audit record.
    pub fn add(&mut self, item: &BatchImage) -> Result<()> {
        let canvas = &item.image.canvas;
        let (w, h) = (canvas.width(), canvas.height());
        let stem = &item.stem;

        canvas.save_png(self.root.join("images").join(format!("{stem}.png")))?;

        let class_id = ClassId::new(item.class_index, item.class_name.clone())?;
        let annotations: Vec<Annotation> = item
            .image
            .instances
            .iter()
            .map(|inst| Annotation::new(class_id.clone(), inst.bbox, w, h))
            .collect::<Result<_>>()?;
        let labels_path = self.root.join("labels").join(format!("{stem}.txt"));
        fs::write(&labels_path, write_detector_txt(&annotations)?)
            .map_err(|e| Error::io(&labels_path, e))?;

        let mut instance_meta = Vec::new();
        for (k, inst) in item.image.instances.iter().enumerate() {
            let alpha_rel = format!("alphas/{stem}_{k}.png");
            inst.cutout.alpha_mask().save_png(self.root.join("meta").join(&alpha_rel))?;
            instance_meta.push(serde_json::json!({
                "alpha": alpha_rel,
                "offset": [inst.offset.0, inst.offset.1],
                "rotation_deg": inst.params.rotation_deg,
                "scale": inst.params.scale,
                "perspective_tilt": inst.params.perspective_tilt,
                "flip_h": inst.params.flip_h,
                "visible_fraction": inst.visible_fraction,
                "occluded_fraction": inst.occluded_fraction,
                "bbox": inst.bbox,
            }));
        }
        let meta = serde_json::json!({
            "background_id": item.image.background_id,
            "batch_id": item.batch_id,
            "canvas": [w, h],
            "class": item.class_name,
            "class_index": item.class_index,
            "seed": item.image.seed,
            "instances": instance_meta,
        });
        let meta_path = self.root.join("meta").join(format!("{stem}.json"));
        fs::write(&meta_path, to_canonical_json(&meta)?).map_err(|e| Error::io(&meta_path, e))?;

        self.categories
            .entry(item.class_index)
            .or_insert_with(|| item.class_name.clone());
        self.entries.push((format!("{stem}.png"), annotations));
        Ok(())
    }

    /// Writes `coco.json` and `manifest.json` and finalizes the dataset.
    pub fn finish(self, manifest: &DatasetManifest) -> Result<()> {
        let coco = coco_from_annotations(&self.entries, &self.categories);
        write_coco_json(&coco, self.root.join("coco.json"))?;
        let manifest_path = self.root.join("manifest.json");
        let mut f = fs::File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        f.write_all(to_canonical_json(manifest)?.as_bytes())
            .map_err(|e| Error::io(&manifest_path, e))?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsRow {
    pub class: String,
    pub index: u32,
    pub masks_used: u64,
    pub images: u64,
    pub instances: u64,
}

/// Recount-based dataset statistics; totals are column sums.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsReport {
    pub rows: Vec<StatsRow>,
    pub total_masks: u64,
    pub total_images: u64,
    pub total_instances: u64,
}

impl StatsReport {
    pub fn table(&self) -> String {
        let name_w = self
            .rows
            .iter()
            .map(|r| r.class.len())
            .chain(["Class".len(), "TOTAL".len()])
            .max()
            .unwrap_or(5);
        let mut out = format!(
            "{:<name_w$}  {:>8}  {:>8}  {:>9}\n",
            "Class", "Masks", "Images", "Instances"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<name_w$}  {:>8}  {:>8}  {:>9}\n",
                r.class, r.masks_used, r.images, r.instances
            ));
        }
        out.push_str(&format!(
            "{:<name_w$}  {:>8}  {:>8}  {:>9}\n",
            "TOTAL", self.total_masks, self.total_images, self.total_instances
        ));
        out
    }
}

pub(crate) fn sorted_dir_files(dir: &Path, extension: &str) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if !dir.exists() {
        return Ok(files);
    }
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some(extension) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Recounts a dataset directory: label files are re-parsed (a malformed file
/// is an error naming it), class names and mask counts come from
/// `manifest.json` and `coco.json` when present.
pub fn dataset_stats(root: impl AsRef<Path>) -> Result<StatsReport> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::MissingLayout { path: root.to_path_buf() });
    }

    // Names and mask counts, when recorded.
    let mut names: BTreeMap<u32, String> = BTreeMap::new();
    let mut masks: BTreeMap<u32, u64> = BTreeMap::new();
    let manifest_path = root.join("manifest.json");
    if manifest_path.exists() {
        let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let manifest: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| Error::json(&manifest_path, e))?;
        for row in &manifest.per_class {
            names.insert(row.index, row.class.clone());
            masks.insert(row.index, row.masks_used);
        }
    }
    let coco_path = root.join("coco.json");
    if coco_path.exists() {
        for cat in read_coco_json(&coco_path)?.categories {
            names.entry(cat.id.saturating_sub(1)).or_insert(cat.name);
        }
    }

    // Independent recount from the label files themselves.
    let mut images: BTreeMap<u32, u64> = BTreeMap::new();
    let mut instances: BTreeMap<u32, u64> = BTreeMap::new();
    for path in sorted_dir_files(&root.join("labels"), "txt")? {
        let records = read_label_records(&path, false)?;
        let mut seen = std::collections::BTreeSet::new();
        for rec in records {
            *instances.entry(rec.class_index).or_default() += 1;
            seen.insert(rec.class_index);
        }
        for idx in seen {
            *images.entry(idx).or_default() += 1;
        }
    }

    let mut all_indices: Vec<u32> = names
        .keys()
        .chain(images.keys())
        .chain(instances.keys())
        .copied()
        .collect();
    all_indices.sort_unstable();
    all_indices.dedup();

    let rows: Vec<StatsRow> = all_indices
        .into_iter()
        .map(|idx| StatsRow {
            class: names.get(&idx).cloned().unwrap_or_else(|| format!("class_{idx}")),
            index: idx,
            masks_used: masks.get(&idx).copied().unwrap_or(0),
            images: images.get(&idx).copied().unwrap_or(0),
            instances: instances.get(&idx).copied().unwrap_or(0),
        })
        .collect();

    Ok(StatsReport {
        total_masks: rows.iter().map(|r| r.masks_used).sum(),
        total_images: rows.iter().map(|r| r.images).sum(),
        total_instances: rows.iter().map(|r| r.instances).sum(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Cutout;
    use crate::compositor::{derive_bbox, visible_fraction, AnnotatedImage, PlacedInstance};
    use crate::scheduler::ClassTally;
    use crate::transforms::AugmentParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cls(index: u32, name: &str) -> ClassId {
        ClassId::new(index, name).unwrap()
    }

    fn ann(index: u32, x0: f64, y0: f64, x1: f64, y1: f64, dims: (u32, u32)) -> Annotation {
        Annotation::new(
            cls(index, &format!("class_{index}")),
            BoundingBox::new(x0, y0, x1, y1).unwrap(),
            dims.0,
            dims.1,
        )
        .unwrap()
    }

    #[test]
    fn centered_half_box_normalizes_to_all_halves() {
        let a = ann(0, 25.0, 25.0, 75.0, 75.0, (100, 100));
        let text = write_detector_txt(std::slice::from_ref(&a)).unwrap();
        assert_eq!(text, "0 0.500000 0.500000 0.500000 0.500000\n");
    }

    #[test]
    fn empty_annotation_list_writes_an_empty_file() {
        assert_eq!(write_detector_txt(&[]).unwrap(), "");
    }

    #[test]
    fn out_of_image_boxes_are_rejected_at_construction() {
        let b = BoundingBox::new(10.0, 10.0, 120.0, 40.0).unwrap();
        assert!(matches!(
            Annotation::new(cls(0, "c"), b, 100, 100),
            Err(Error::BoxOutOfBounds { .. })
        ));
    }

    #[test]
    fn label_round_trip_is_exact_to_the_rounding_tolerance() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.txt");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (w, h) = (300u32, 200u32);
        for _ in 0..200 {
            let x0 = rng.random_range(0.0..(w as f64 - 2.0));
            let y0 = rng.random_range(0.0..(h as f64 - 2.0));
            let x1 = rng.random_range((x0 + 1.0)..=(w as f64));
            let y1 = rng.random_range((y0 + 1.0)..=(h as f64));
            let original = vec![ann(rng.random_range(0..=30), x0, y0, x1, y1, (w, h))];
            fs::write(&path, write_detector_txt(&original).unwrap()).unwrap();
            let back = read_detector_txt(&path, w, h).unwrap();
            assert_eq!(back.len(), 1);
            let (b0, b1) = (original[0].bbox(), back[0].bbox());
            // Six decimals in normalized units: absolute error below
            // 2 * 5e-7 * max(W, H), comfortably under half a pixel.
            for (u, v) in [
                (b0.x_min, b1.x_min),
                (b0.y_min, b1.y_min),
                (b0.x_max, b1.x_max),
                (b0.y_max, b1.y_max),
            ] {
                assert!((u - v).abs() < 5e-4 * 300.0, "{u} vs {v}");
            }
            assert_eq!(original[0].class_id().index(), back[0].class_id().index());
        }
    }

    #[test]
    fn strict_parsing_rejects_malformed_lines() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, text: &str| {
            let p = dir.path().join(name);
            fs::write(&p, text).unwrap();
            p
        };
        // Wrong field counts.
        let p = write("four.txt", "0 0.5 0.5 0.2\n");
        assert!(matches!(read_label_records(&p, false), Err(Error::Parse { line: 1, .. })));
        let p = write("six.txt", "0 0.5 0.5 0.2 0.2 0.9\n");
        assert!(read_label_records(&p, false).is_err());
        // Predictions require the confidence column.
        assert!(read_label_records(&p, true).is_ok());
        let p = write("five.txt", "0 0.5 0.5 0.2 0.2\n");
        assert!(read_label_records(&p, true).is_err());
        // Bad values.
        let p = write("nan.txt", "0 x 0.5 0.2 0.2\n");
        assert!(read_label_records(&p, false).is_err());
        let p = write("range.txt", "0 1.5 0.5 0.2 0.2\n");
        assert!(read_label_records(&p, false).is_err());
        let p = write("degenerate.txt", "0 0.5 0.5 0.000000 0.2\n");
        assert!(read_label_records(&p, false).is_err());
        let p = write("conf.txt", "0 0.5 0.5 0.2 0.2 1.5\n");
        assert!(read_label_records(&p, true).is_err());
        // Line numbers point at the offender.
        let p = write("second.txt", "0 0.5 0.5 0.2 0.2\n0 0.5 0.5 0.2\n");
        match read_label_records(&p, false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected a parse error, got {other:?}"),
        }
        // Blank lines are tolerated.
        let p = write("blank.txt", "\n0 0.5 0.5 0.2 0.2\n\n");
        assert_eq!(read_label_records(&p, false).unwrap().len(), 1);
    }

    #[test]
    fn coco_emission_is_sorted_dense_and_round_trips() {
        let entries = vec![
            ("a.png".to_string(), vec![ann(0, 0.0, 0.0, 10.0, 5.0, (60, 40))]),
            (
                "b.png".to_string(),
                vec![
                    ann(1, 5.0, 5.0, 20.0, 25.0, (60, 40)),
                    ann(0, 30.0, 10.0, 50.0, 30.0, (60, 40)),
                ],
            ),
        ];
        let mut categories = BTreeMap::new();
        categories.insert(0, "Widget".to_string());
        categories.insert(1, "Gadget".to_string());
        let ds = coco_from_annotations(&entries, &categories);

        assert_eq!(ds.images.iter().map(|i| i.id).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(ds.annotations.iter().map(|a| a.id).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(ds.annotations[0].bbox, [0.0, 0.0, 10.0, 5.0]);
        assert_eq!(ds.annotations[0].area, 50.0);
        assert_eq!(ds.annotations[1].category_id, 2);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("coco.json");
        write_coco_json(&ds, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        // Keys are sorted: within an annotation object, "area" precedes
        // "bbox" precedes "category_id"; top level lists annotations first.
        let pos = |needle: &str| text.find(needle).unwrap_or_else(|| panic!("{needle} missing"));
        assert!(pos("\"annotations\"") < pos("\"categories\""));
        assert!(pos("\"categories\"") < pos("\"images\""));
        assert!(pos("\"area\"") < pos("\"bbox\""));
        assert!(text.ends_with('\n'));
        // Two-space indentation.
        assert!(text.contains("\n  \"annotations\""));

        let back = read_coco_json(&path).unwrap();
        assert_eq!(back, ds);

        // Canonical form is a fixed point: re-serializing the parsed value
        // reproduces the bytes.
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let again = format!("{}\n", serde_json::to_string_pretty(&value).unwrap());
        assert_eq!(again, text);
    }

    #[test]
    fn coco_and_detector_txt_describe_the_same_boxes() {
        let anns = vec![
            ann(0, 3.0, 4.0, 33.0, 24.0, (120, 90)),
            ann(2, 50.25, 10.5, 100.75, 80.25, (120, 90)),
        ];
        let text = write_detector_txt(&anns).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.txt");
        fs::write(&path, &text).unwrap();
        let from_txt = read_detector_txt(&path, 120, 90).unwrap();

        let ds = coco_from_annotations(
            &[("img.png".to_string(), anns.clone())],
            &BTreeMap::from([(0, "a".to_string()), (2, "b".to_string())]),
        );
        for (parsed, coco) in from_txt.iter().zip(&ds.annotations) {
            let b = parsed.bbox();
            assert!((b.x_min - coco.bbox[0]).abs() < 1e-3);
            assert!((b.y_min - coco.bbox[1]).abs() < 1e-3);
            assert!((b.width() - coco.bbox[2]).abs() < 2e-3);
            assert!((b.height() - coco.bbox[3]).abs() < 2e-3);
            assert_eq!(parsed.class_id().index() + 1, coco.category_id);
        }
    }

    fn gradient_raster(w: u32, h: u32, offset: u8) -> RgbRaster {
        let mut data = Vec::new();
        for y in 0..h {
            for x in 0..w {
                data.extend_from_slice(&[
                    (x as u8).wrapping_mul(7).wrapping_add(offset),
                    (y as u8).wrapping_mul(11).wrapping_add(offset),
                    offset,
                ]);
            }
        }
        RgbRaster::new(w, h, data).unwrap()
    }

    #[test]
    fn mixup_endpoints_are_bit_exact() {
        let a = gradient_raster(8, 6, 0);
        let b = gradient_raster(8, 6, 100);
        assert_eq!(mixup_image(&a, &b, 1.0, None).unwrap().data(), a.data());
        assert_eq!(mixup_image(&a, &b, 0.0, None).unwrap().data(), b.data());
    }

    #[test]
    fn mixup_blends_constants_linearly() {
        let a = RgbRaster::filled(4, 4, [100, 100, 100]).unwrap();
        let b = RgbRaster::filled(4, 4, [200, 200, 200]).unwrap();
        let mixed = mixup_image(&a, &b, 0.5, None).unwrap();
        assert!(mixed.data().iter().all(|&v| v == 150));
    }

    #[test]
    fn mask_mixing_is_pure_selection() {
        let a = gradient_raster(6, 4, 0);
        let b = gradient_raster(6, 4, 90);
        let mut mask = BinaryMask::filled(6, 4, false).unwrap();
        for y in 0..4 {
            for x in 0..3 {
                mask.set(x, y, true);
            }
        }
        let mixed = mixup_image(&a, &b, 0.3, Some(&mask)).unwrap();
        for y in 0..4 {
            for x in 0..6 {
                let want = if x < 3 { a.get(x, y) } else { b.get(x, y) };
                assert_eq!(mixed.get(x, y), want);
            }
        }
    }

    #[test]
    fn mixup_is_symmetric_under_lambda_reflection() {
        let a = gradient_raster(9, 7, 3);
        let b = gradient_raster(9, 7, 61);
        // Dyadic weights make 1 - (1 - lambda) == lambda exactly.
        for lambda in [0.0, 0.125, 0.375, 0.5, 0.625, 0.875, 1.0] {
            let ab = mixup_image(&a, &b, lambda, None).unwrap();
            let ba = mixup_image(&b, &a, 1.0 - lambda, None).unwrap();
            assert_eq!(ab.data(), ba.data(), "lambda {lambda}");
        }
    }

    #[test]
    fn mixup_validates_inputs() {
        let a = gradient_raster(4, 4, 0);
        let b = gradient_raster(5, 4, 0);
        assert!(matches!(
            mixup_image(&a, &b, 0.5, None),
            Err(Error::DimensionMismatch { .. })
        ));
        let b = gradient_raster(4, 4, 0);
        assert!(mixup_image(&a, &b, 1.2, None).is_err());
        assert!(mixup_image(&a, &b, f64::NAN, None).is_err());
        let mask = BinaryMask::filled(3, 3, true).unwrap();
        assert!(mixup_image(&a, &b, 0.5, Some(&mask)).is_err());
    }

    #[test]
    fn mixup_labels_are_the_weighted_union() {
        let a = gradient_raster(10, 10, 0);
        let b = gradient_raster(10, 10, 50);
        let la = vec![ann(0, 0.0, 0.0, 4.0, 4.0, (10, 10))];
        let lb = vec![ann(1, 5.0, 5.0, 9.0, 9.0, (10, 10))];
        let sample = mixup(&a, &la, &b, &lb, 0.25, None).unwrap();
        assert_eq!(sample.labels.len(), 2);
        assert_eq!(sample.labels[0].1, 0.25);
        assert_eq!(sample.labels[1].1, 0.75);
        let text = write_weighted_txt(&sample.labels).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].ends_with("0.250000"));
        assert!(lines[1].ends_with("0.750000"));
        assert_eq!(lines[0].split_whitespace().count(), 6);

        // Annotations must belong to their image.
        let foreign = vec![ann(0, 0.0, 0.0, 4.0, 4.0, (12, 10))];
        assert!(mixup(&a, &foreign, &b, &lb, 0.25, None).is_err());
    }

    #[test]
    fn lambda_sampling_is_bounded_and_uniform_at_alpha_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 4000;
        let mut sum = 0.0;
        for _ in 0..n {
            let l = sample_lambda(&mut rng, 1.0).unwrap();
            assert!((0.0..=1.0).contains(&l));
            sum += l;
        }
        assert!((sum / n as f64 - 0.5).abs() < 0.02);
        for _ in 0..500 {
            let l = sample_lambda(&mut rng, 0.4).unwrap();
            assert!((0.0..=1.0).contains(&l));
        }
        assert!(sample_lambda(&mut rng, 0.0).is_err());
        assert!(sample_lambda(&mut rng, -1.0).is_err());
    }

    /// Builds a one-instance BatchImage by hand for writer tests.
    fn toy_batch_image(stem: &str, class_index: u32, class_name: &str) -> BatchImage {
        let id = cls(class_index, class_name);
        let mut rgba = Vec::new();
        for _ in 0..6 * 4 {
            rgba.extend_from_slice(&[250, 10, 10, 255]);
        }
        let cutout = Cutout::from_rgba(id, 6, 4, rgba, "toy").unwrap();
        let mut canvas = RgbRaster::filled(32, 24, [0, 0, 0]).unwrap();
        let offset = (5, 7);
        crate::compositor::paste(&mut canvas, &cutout, offset);
        let inst = PlacedInstance {
            visible_fraction: visible_fraction(&cutout, offset, 32, 24),
            occluded_fraction: 0.0,
            bbox: derive_bbox(&cutout, offset, 32, 24).unwrap(),
            params: AugmentParams::identity(),
            offset,
            cutout,
        };
        BatchImage {
            image: AnnotatedImage {
                canvas,
                instances: vec![inst],
                background_id: "bg/toy".into(),
                seed: 7,
            },
            stem: stem.to_string(),
            class_index,
            class_name: class_name.to_string(),
            batch_id: 1,
            index_in_batch: 0,
        }
    }

    fn toy_manifest() -> DatasetManifest {
        DatasetManifest {
            per_class: vec![ClassTally {
                class: "Widget".into(),
                index: 0,
                masks_used: 1,
                images_produced: 2,
                instances: 2,
            }],
            total_masks: 1,
            total_images: 2,
            total_instances: 2,
            seed: 7,
            config_hash: "h".into(),
        }
    }

    #[test]
    fn writer_lays_out_the_dataset_and_stats_recounts_it() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("out");
        let mut writer = DatasetWriter::create(&root).unwrap();
        writer.add(&toy_batch_image("c00_widget_b1_000", 0, "Widget")).unwrap();
        writer.add(&toy_batch_image("c00_widget_b1_001", 0, "Widget")).unwrap();
        writer.finish(&toy_manifest()).unwrap();

        for p in [
            "images/c00_widget_b1_000.png",
            "labels/c00_widget_b1_000.txt",
            "meta/c00_widget_b1_000.json",
            "meta/alphas/c00_widget_b1_000_0.png",
            "coco.json",
            "manifest.json",
        ] {
            assert!(root.join(p).exists(), "{p} missing");
        }

        let stats = dataset_stats(&root).unwrap();
        assert_eq!(stats.rows.len(), 1);
        assert_eq!(stats.rows[0].class, "Widget");
        assert_eq!(stats.rows[0].images, 2);
        assert_eq!(stats.rows[0].instances, 2);
        assert_eq!(stats.rows[0].masks_used, 1);
        assert_eq!(stats.total_images, 2);
        let table = stats.table();
        assert!(table.lines().next().unwrap().contains("Class"));
        assert!(table.lines().last().unwrap().starts_with("TOTAL"));

        // The meta record carries everything an auditor needs.
        let meta: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(root.join("meta/c00_widget_b1_000.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(meta["canvas"], serde_json::json!([32, 24]));
        assert_eq!(meta["instances"][0]["offset"], serde_json::json!([5, 7]));
        assert!(meta["instances"][0]["bbox"]["x_min"].is_number());
    }

    #[test]
    fn writer_refuses_foreign_directories_but_replaces_its_own() {
        let dir = tempfile::tempdir().unwrap();
        let foreign = dir.path().join("foreign");
        fs::create_dir_all(&foreign).unwrap();
        fs::write(foreign.join("precious.txt"), "data").unwrap();
        assert!(matches!(DatasetWriter::create(&foreign), Err(Error::Usage(_))));
        assert!(foreign.join("precious.txt").exists());

        let own = dir.path().join("own");
        let mut w = DatasetWriter::create(&own).unwrap();
        w.add(&toy_batch_image("c00_widget_b1_000", 0, "Widget")).unwrap();
        w.finish(&toy_manifest()).unwrap();
        // Recreating wipes the previous dataset contents.
        let w2 = DatasetWriter::create(&own).unwrap();
        assert!(!own.join("images/c00_widget_b1_000.png").exists());
        assert!(!own.join("coco.json").exists());
        drop(w2);
    }

    #[test]
    fn stats_handles_empty_and_corrupt_datasets() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("empty");
        fs::create_dir_all(root.join("labels")).unwrap();
        let report = dataset_stats(&root).unwrap();
        assert!(report.rows.is_empty());
        assert_eq!(report.total_images, 0);

        fs::write(root.join("labels/bad.txt"), "0 0.5 0.5\n").unwrap();
        match dataset_stats(&root) {
            Err(Error::Parse { path, .. }) => {
                assert!(path.to_string_lossy().contains("bad.txt"))
            }
            other => panic!("expected a parse error naming the file, got {other:?}"),
        }

        assert!(dataset_stats(dir.path().join("nonexistent")).is_err());
    }
}
