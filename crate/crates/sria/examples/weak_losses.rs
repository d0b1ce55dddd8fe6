//! Box-supervised mask losses: train a mask head from boxes alone.
//!
//! The projection loss compares a soft mask's row/column max-projections
//! against the box's axis indicators; the pairwise loss pulls color-similar
//! neighbor pixels toward the same label. Together they let box annotations
//! supervise a segmentation head. This demo shows how both losses rank
//! candidate masks of a two-tone scene.
//!
//! Run with: `cargo run --example weak_losses`

use anyhow::Result;
use sria::bbox::BoundingBox;
use sria::mask_lab::{pairwise_loss, projection_loss, PairwiseLossConfig};
use sria::raster::{RgbRaster, SoftMask};

fn main() -> Result<()> {
    let (w, h) = (24u32, 18u32);
    // A red square (the object) on a gray plate.
    let object = BoundingBox::new(6.0, 4.0, 18.0, 14.0)?;
    let mut img = RgbRaster::filled(w, h, [120, 120, 120])?;
    for y in 4..14 {
        for x in 6..18 {
            img.set(x, y, [190, 40, 40]);
        }
    }

    let mask_from = |f: &dyn Fn(u32, u32) -> f64| -> SoftMask {
        let probs = (0..w * h).map(|i| f(i % w, i / w)).collect();
        SoftMask::new(w, h, probs).expect("valid probabilities")
    };
    let inside =
        |x: u32, y: u32| f64::from(x) + 0.5 >= 6.0 && f64::from(x) + 0.5 <= 18.0 && f64::from(y) + 0.5 >= 4.0 && f64::from(y) + 0.5 <= 14.0;

    let candidates: Vec<(&str, SoftMask)> = vec![
        ("exact box indicator", mask_from(&|x, y| if inside(x, y) { 1.0 } else { 0.0 })),
        ("eroded (misses the rim)", mask_from(&|x, y| {
            if x >= 8 && x < 16 && y >= 6 && y < 12 {
                1.0
            } else {
                0.0
            }
        })),
        ("dilated (leaks onto the plate)", mask_from(&|x, y| {
            if x >= 4 && x < 20 && y >= 2 && y < 16 {
                1.0
            } else {
                0.0
            }
        })),
        ("uniform 0.5 (uncommitted)", mask_from(&|_, _| 0.5)),
    ];

    let cfg = PairwiseLossConfig::default();
    println!("{:<30} {:>12} {:>12}", "candidate mask", "projection", "pairwise");
    for (label, mask) in &candidates {
        let proj = projection_loss(mask, &object)?;
        let pair = pairwise_loss(&img, mask, &cfg)?;
        println!("{label:<30} {proj:>12.6} {pair:>12.6}");
    }
    println!();
    println!("The exact indicator zeroes the projection loss; committed masks");
    println!("aligned with color boundaries drive the pairwise loss toward 0.");
    Ok(())
}
