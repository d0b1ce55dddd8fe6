//! Score a detector: IoU matching, PR curves, AP, and the mAP range.
//!
//! Builds a small ground-truth set and a simulated detector whose quality
//! varies by class (tight boxes, loose boxes, misses, and false alarms),
//! then reports AP at IoU 0.5, the 0.50:0.95 range, and the operating-point
//! precision/recall.
//!
//! Run with: `cargo run --example evaluate_detections`

use std::collections::BTreeMap;

use anyhow::Result;
use sria::bbox::BoundingBox;
use sria::dataset_io::to_canonical_json;
use sria::evaluator::{iou, map_range, Detection, GroundTruth, Interpolation};

fn b(x: f64, y: f64, w: f64, h: f64) -> BoundingBox {
    BoundingBox::new(x, y, x + w, y + h).expect("positive extent")
}

fn main() -> Result<()> {
    // Ground truth: two images, three classes.
    let gts = vec![
        GroundTruth { image_id: "img0".into(), class_id: 0, bbox: b(10.0, 10.0, 30.0, 20.0) },
        GroundTruth { image_id: "img0".into(), class_id: 1, bbox: b(60.0, 15.0, 25.0, 25.0) },
        GroundTruth { image_id: "img0".into(), class_id: 2, bbox: b(100.0, 40.0, 20.0, 30.0) },
        GroundTruth { image_id: "img1".into(), class_id: 0, bbox: b(20.0, 50.0, 28.0, 18.0) },
        GroundTruth { image_id: "img1".into(), class_id: 1, bbox: b(70.0, 60.0, 22.0, 26.0) },
    ];

    // A detector: class 0 is sharp, class 1 is sloppy, class 2 is missed,
    // plus a stray false alarm.
    let dets = vec![
        Detection { image_id: "img0".into(), class_id: 0, bbox: b(10.0, 10.0, 30.0, 20.0), confidence: 0.95 },
        Detection { image_id: "img1".into(), class_id: 0, bbox: b(21.0, 51.0, 28.0, 18.0), confidence: 0.90 },
        Detection { image_id: "img0".into(), class_id: 1, bbox: b(64.0, 20.0, 25.0, 25.0), confidence: 0.75 },
        Detection { image_id: "img1".into(), class_id: 1, bbox: b(78.0, 68.0, 22.0, 26.0), confidence: 0.60 },
        Detection { image_id: "img0".into(), class_id: 1, bbox: b(5.0, 80.0, 15.0, 15.0), confidence: 0.40 },
    ];

    println!("pairwise IoU of the first ground truth vs each detection on img0:");
    for det in dets.iter().filter(|d| d.image_id == "img0") {
        println!(
            "  class {} conf {:.2}: IoU {:.3}",
            det.class_id,
            det.confidence,
            iou(&gts[0].bbox, &det.bbox)
        );
    }
    println!();

    let report = map_range(&dets, &gts, Interpolation::Points101)?;
    let names: BTreeMap<u32, String> =
        [(0, "bolt".into()), (1, "hose".into()), (2, "rock".into())].into_iter().collect();
    print!("{}", report.table(&names));
    println!();
    println!("as JSON:");
    print!("{}", to_canonical_json(&report)?);
    Ok(())
}
