//! Detection metrics: IoU, greedy confidence-ordered matching,
//! precision–recall curves, interpolated average precision, and the
//! mAP@0.5 / mAP@0.5:0.95 report.
//!
//! Conventions: detections are processed in descending confidence; each
//! claims the unmatched ground truth of highest IoU at or above the
//! threshold (ties go to the lowest ground-truth index); AP uses 101-point
//! interpolation by default with all-point interpolation available for
//! cross-checking; classes absent from the ground truth are excluded from
//! mean AP; scalar precision/recall are micro-averaged at a stated
//! confidence operating point.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use crate::bbox::BoundingBox;
use crate::dataset_io::{self, read_coco_json, read_label_records};
use crate::error::{Error, Result};

/// Confidence cutoff for the scalar precision/recall numbers.
pub const CONFIDENCE_OPERATING_POINT: f64 = 0.25;
/// IoU threshold for the scalar precision/recall numbers.
pub const IOU_OPERATING_POINT: f64 = 0.5;

/// The ten mAP thresholds 0.50, 0.55, …, 0.95.
pub fn map_thresholds() -> [f64; 10] {
    std::array::from_fn(|i| (50 + 5 * i) as f64 / 100.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub image_id: String,
    pub class_id: u32,
    pub bbox: BoundingBox,
    pub confidence: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub image_id: String,
    pub class_id: u32,
    pub bbox: BoundingBox,
}

/// Intersection over union; 0 for disjoint boxes.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let ih = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = iw * ih;
    if inter == 0.0 {
        return 0.0;
    }
    inter / (a.area() + b.area() - inter)
}

/// Greedy matching result; indices refer to the input slices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchOutcome {
    /// `(detection index, ground-truth index)` pairs.
    pub true_positives: Vec<(usize, usize)>,
    pub false_positives: Vec<usize>,
    pub unmatched_gt: Vec<usize>,
}

/// Matches detections of one image and class against its ground truths:
/// descending confidence (stable on ties), each detection claiming the
/// still-unmatched ground truth of highest IoU `>= iou_threshold`, lowest
/// index on IoU ties. No ground truth is ever claimed twice.
pub fn match_detections(
    detections: &[Detection],
    ground_truths: &[GroundTruth],
    iou_threshold: f64,
) -> MatchOutcome {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| detections[b].confidence.total_cmp(&detections[a].confidence));

    let mut taken = vec![false; ground_truths.len()];
    let mut outcome = MatchOutcome::default();
    for di in order {
        let mut best: Option<(f64, usize)> = None;
        for (gi, gt) in ground_truths.iter().enumerate() {
            if taken[gi] {
                continue;
            }
            let overlap = iou(&detections[di].bbox, &gt.bbox);
            if overlap < iou_threshold {
                continue;
            }
            // Strict `>` keeps the lowest ground-truth index on ties.
            if best.map_or(true, |(b, _)| overlap > b) {
                best = Some((overlap, gi));
            }
        }
        match best {
            Some((_, gi)) => {
                taken[gi] = true;
                outcome.true_positives.push((di, gi));
            }
            None => outcome.false_positives.push(di),
        }
    }
    outcome.unmatched_gt = (0..ground_truths.len()).filter(|&gi| !taken[gi]).collect();
    outcome
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PRPoint {
    pub confidence: f64,
    pub recall: f64,
    pub precision: f64,
}

/// Cumulative precision–recall points in descending-confidence order.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PRCurve {
    pub points: Vec<PRPoint>,
    pub total_gt: usize,
}

/// Builds the PR curve for one class at one IoU threshold. Detections are
/// matched per image, then pooled and ranked by confidence globally.
pub fn pr_curve(
    detections: &[Detection],
    ground_truths: &[GroundTruth],
    class_id: u32,
    iou_threshold: f64,
) -> PRCurve {
    // Group this class's boxes per image, keyed deterministically.
    let mut groups: BTreeMap<&str, (Vec<Detection>, Vec<GroundTruth>)> = BTreeMap::new();
    for det in detections.iter().filter(|d| d.class_id == class_id) {
        groups.entry(&det.image_id).or_default().0.push(det.clone());
    }
    let mut total_gt = 0usize;
    for gt in ground_truths.iter().filter(|g| g.class_id == class_id) {
        groups.entry(&gt.image_id).or_default().1.push(gt.clone());
        total_gt += 1;
    }

    let mut flagged: Vec<(f64, bool)> = Vec::new();
    for (dets, gts) in groups.values() {
        let outcome = match_detections(dets, gts, iou_threshold);
        for &(di, _) in &outcome.true_positives {
            flagged.push((dets[di].confidence, true));
        }
        for &di in &outcome.false_positives {
            flagged.push((dets[di].confidence, false));
        }
    }
    flagged.sort_by(|a, b| b.0.total_cmp(&a.0)); // stable: ties keep image order

    let mut points = Vec::with_capacity(flagged.len());
    let (mut tp, mut fp) = (0usize, 0usize);
    for (confidence, is_tp) in flagged {
        if is_tp {
            tp += 1;
        } else {
            fp += 1;
        }
        points.push(PRPoint {
            confidence,
            recall: if total_gt > 0 { tp as f64 / total_gt as f64 } else { 0.0 },
            precision: tp as f64 / (tp + fp) as f64,
        });
    }
    PRCurve { points, total_gt }
}

/// AP interpolation scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Interpolation {
    /// Precision envelope sampled at recall 0.00, 0.01, …, 1.00 and averaged.
    Points101,
    /// Exact area under the precision envelope.
    AllPoints,
}

/// Max precision over points with recall at or above `r`; 0 past the curve.
fn envelope(curve: &PRCurve, r: f64) -> f64 {
    curve
        .points
        .iter()
        .filter(|p| p.recall >= r)
        .map(|p| p.precision)
        .fold(0.0, f64::max)
}

/// Interpolated average precision of one class's curve; 0 when the class has
/// no ground truths or no detections.
pub fn average_precision(curve: &PRCurve, interpolation: Interpolation) -> f64 {
    if curve.total_gt == 0 || curve.points.is_empty() {
        return 0.0;
    }
    match interpolation {
        Interpolation::Points101 => {
            (0..=100).map(|k| envelope(curve, k as f64 / 100.0)).sum::<f64>() / 101.0
        }
        Interpolation::AllPoints => {
            let mut recalls: Vec<f64> = curve.points.iter().map(|p| p.recall).collect();
            recalls.sort_by(f64::total_cmp);
            recalls.dedup();
            let mut ap = 0.0;
            let mut prev = 0.0;
            for r in recalls {
                ap += (r - prev) * envelope(curve, r);
                prev = r;
            }
            ap
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdAp {
    pub threshold: f64,
    pub ap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassEval {
    pub class_index: u32,
    pub ap_by_threshold: Vec<ThresholdAp>,
    pub ap_50: f64,
    pub ap_50_95: f64,
}

/// The full evaluation report: per-class APs across the threshold range plus
/// micro-averaged precision/recall at the confidence operating point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_class: Vec<ClassEval>,
    pub map_50: f64,
    pub map_50_95: f64,
    pub precision: f64,
    pub recall: f64,
    pub confidence_operating_point: f64,
    pub iou_operating_point: f64,
    pub interpolation: Interpolation,
}

impl EvalReport {
    /// Fixed-width console table; `names` maps class indices to display
    /// names where known.
    pub fn table(&self, names: &BTreeMap<u32, String>) -> String {
        let label = |idx: u32| {
            names.get(&idx).cloned().unwrap_or_else(|| format!("class_{idx}"))
        };
        let name_w = self
            .per_class
            .iter()
            .map(|c| label(c.class_index).len())
            .chain(["Class".len(), "mAP".len()])
            .max()
            .unwrap_or(5);
        let mut out = format!("{:<name_w$}  {:>8}  {:>13}\n", "Class", "AP@0.50", "AP@0.50:0.95");
        for c in &self.per_class {
            out.push_str(&format!(
                "{:<name_w$}  {:>8.3}  {:>13.3}\n",
                label(c.class_index),
                c.ap_50,
                c.ap_50_95
            ));
        }
        out.push_str(&format!(
            "{:<name_w$}  {:>8.3}  {:>13.3}\n",
            "mAP", self.map_50, self.map_50_95
        ));
        out.push_str(&format!(
            "precision {:.3}  recall {:.3}  (confidence >= {}, IoU {})\n",
            self.precision,
            self.recall,
            self.confidence_operating_point,
            self.iou_operating_point
        ));
        out
    }
}

/// Evaluates detections against ground truths over the 0.50:0.95 threshold
/// range. Classes never seen in the ground truth are excluded from the mean;
/// zero ground truths overall is an error; confidences must lie in `[0, 1]`.
pub fn map_range(
    detections: &[Detection],
    ground_truths: &[GroundTruth],
    interpolation: Interpolation,
) -> Result<EvalReport> {
    if ground_truths.is_empty() {
        return Err(Error::NoGroundTruth);
    }
    if let Some(bad) = detections
        .iter()
        .find(|d| !d.confidence.is_finite() || !(0.0..=1.0).contains(&d.confidence))
    {
        return Err(Error::InvalidParameter(format!(
            "detection confidence {} outside [0, 1]",
            bad.confidence
        )));
    }

    let classes: BTreeSet<u32> = ground_truths.iter().map(|g| g.class_id).collect();
    let thresholds = map_thresholds();
    let mut per_class = Vec::with_capacity(classes.len());
    for &class_id in &classes {
        let ap_by_threshold: Vec<ThresholdAp> = thresholds
            .iter()
            .map(|&threshold| ThresholdAp {
                threshold,
                ap: average_precision(
                    &pr_curve(detections, ground_truths, class_id, threshold),
                    interpolation,
                ),
            })
            .collect();
        let ap_50 = ap_by_threshold[0].ap;
        let ap_50_95 =
            ap_by_threshold.iter().map(|t| t.ap).sum::<f64>() / ap_by_threshold.len() as f64;
        per_class.push(ClassEval { class_index: class_id, ap_by_threshold, ap_50, ap_50_95 });
    }
    let n = per_class.len() as f64;
    let map_50 = per_class.iter().map(|c| c.ap_50).sum::<f64>() / n;
    let map_50_95 = per_class.iter().map(|c| c.ap_50_95).sum::<f64>() / n;

    // Micro precision/recall at the operating point; every detection above
    // the cutoff counts, including those of classes missing from the ground
    // truth (they are false positives).
    let eligible: Vec<&Detection> = detections
        .iter()
        .filter(|d| d.confidence >= CONFIDENCE_OPERATING_POINT)
        .collect();
    let mut groups: BTreeMap<(&str, u32), (Vec<Detection>, Vec<GroundTruth>)> = BTreeMap::new();
    for det in &eligible {
        groups
            .entry((&det.image_id, det.class_id))
            .or_default()
            .0
            .push((*det).clone());
    }
    for gt in ground_truths {
        groups.entry((&gt.image_id, gt.class_id)).or_default().1.push(gt.clone());
    }
    let mut tp = 0usize;
    for (dets, gts) in groups.values() {
        tp += match_detections(dets, gts, IOU_OPERATING_POINT).true_positives.len();
    }
    let det_count = eligible.len();
    let precision = if det_count > 0 { tp as f64 / det_count as f64 } else { 0.0 };
    let recall = tp as f64 / ground_truths.len() as f64;

    Ok(EvalReport {
        per_class,
        map_50,
        map_50_95,
        precision,
        recall,
        confidence_operating_point: CONFIDENCE_OPERATING_POINT,
        iou_operating_point: IOU_OPERATING_POINT,
        interpolation,
    })
}

// ---------------------------------------------------------------------------
// Input loading
// ---------------------------------------------------------------------------

fn stem_of(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Reads a directory of ground-truth label files (`<image_id>.txt`, five
/// fields per line); boxes stay in normalized coordinates.
pub fn read_gt_tree(dir: impl AsRef<Path>) -> Result<Vec<GroundTruth>> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::MissingLayout { path: dir.to_path_buf() });
    }
    let mut out = Vec::new();
    for path in dataset_io::sorted_dir_files(dir, "txt")? {
        let image_id = stem_of(&path);
        for rec in read_label_records(&path, false)? {
            out.push(GroundTruth {
                image_id: image_id.clone(),
                class_id: rec.class_index,
                bbox: rec.normalized_bbox()?,
            });
        }
    }
    Ok(out)
}

/// Reads a directory of prediction files (`<image_id>.txt`, six fields per
/// line with trailing confidence); boxes stay in normalized coordinates.
pub fn read_pred_tree(dir: impl AsRef<Path>) -> Result<Vec<Detection>> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::MissingLayout { path: dir.to_path_buf() });
    }
    let mut out = Vec::new();
    for path in dataset_io::sorted_dir_files(dir, "txt")? {
        let image_id = stem_of(&path);
        for rec in read_label_records(&path, true)? {
            out.push(Detection {
                image_id: image_id.clone(),
                class_id: rec.class_index,
                bbox: rec.normalized_bbox()?,
                confidence: rec.confidence.expect("prediction records carry confidence"),
            });
        }
    }
    Ok(out)
}

struct CocoBoxes {
    /// (image_id, class_id, bbox, score) per annotation.
    rows: Vec<(String, u32, BoundingBox, Option<f64>)>,
}

fn read_coco_boxes(path: &Path) -> Result<CocoBoxes> {
    let ds = read_coco_json(path)?;
    let image_names: BTreeMap<u64, String> = ds
        .images
        .iter()
        .map(|img| (img.id, stem_of(Path::new(&img.file_name))))
        .collect();
    let mut rows = Vec::with_capacity(ds.annotations.len());
    for (i, ann) in ds.annotations.iter().enumerate() {
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        if ann.category_id == 0 {
            return Err(err("category_id 0 (ids are 1-based)".into()));
        }
        let [x, y, w, h] = ann.bbox;
        let bbox = BoundingBox::new(x, y, x + w, y + h)
            .map_err(|e| err(format!("bad bbox: {e}")))?;
        let image_id = image_names
            .get(&ann.image_id)
            .cloned()
            .unwrap_or_else(|| ann.image_id.to_string());
        rows.push((image_id, ann.category_id - 1, bbox, ann.score));
    }
    Ok(CocoBoxes { rows })
}

/// Ground truths from a COCO-style JSON file (absolute-pixel boxes).
pub fn read_gt_coco(path: impl AsRef<Path>) -> Result<Vec<GroundTruth>> {
    Ok(read_coco_boxes(path.as_ref())?
        .rows
        .into_iter()
        .map(|(image_id, class_id, bbox, _)| GroundTruth { image_id, class_id, bbox })
        .collect())
}

/// Detections from a COCO-style JSON file; every annotation must carry a
/// `score`.
pub fn read_pred_coco(path: impl AsRef<Path>) -> Result<Vec<Detection>> {
    let path = path.as_ref();
    read_coco_boxes(path)?
        .rows
        .into_iter()
        .enumerate()
        .map(|(i, (image_id, class_id, bbox, score))| {
            let confidence = score.ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: "prediction annotation has no score".into(),
            })?;
            Ok(Detection { image_id, class_id, bbox, confidence })
        })
        .collect()
}

/// Loads ground truths from either a label-file directory or a COCO JSON
/// file. Both sides of an evaluation must use the same coordinate
/// convention (normalized for label trees, absolute pixels for COCO).
pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<Vec<GroundTruth>> {
    let path = path.as_ref();
    if path.is_dir() {
        read_gt_tree(path)
    } else {
        read_gt_coco(path)
    }
}

/// Counterpart of [`load_ground_truth`] for predictions.
pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<Detection>> {
    let path = path.as_ref();
    if path.is_dir() {
        read_pred_tree(path)
    } else {
        read_pred_coco(path)
    }
}
