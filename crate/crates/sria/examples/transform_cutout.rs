//! Randomize a cutout's geometry: flip, scale, rotate, perspective-tilt.
//!
//! Every paste can vary the object's appearance through these transforms;
//! this demo applies each one separately to an arrow-shaped cutout (so the
//! orientation is visible), then applies a full random draw from the
//! training ranges, and saves every variant.
//!
//! Run with: `cargo run --example transform_cutout`

use std::path::PathBuf;

use anyhow::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sria::catalog::{ClassId, Cutout};
use sria::transforms::{
    flip_cutout, perspective_warp, rotate_cutout, scale_cutout, AugmentParams, AugmentRanges,
};

fn output_dir(name: &str) -> Result<PathBuf> {
    let target = std::env::var("CARGO_TARGET_DIR").unwrap_or_else(|_| "target".into());
    let dir = PathBuf::from(target).join("example-output").join(name);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// A rightward arrow, so flips and rotations are visually obvious.
fn arrow(class: &ClassId) -> Result<Cutout> {
    let (w, h) = (40u32, 24u32);
    let mut rgba = vec![0u8; (w * h * 4) as usize];
    for y in 0..h {
        for x in 0..w {
            let in_shaft = y >= 9 && y < 15 && x < 26;
            let dy = i64::from(y) - 12;
            let in_head = x >= 26 && dy.abs() <= i64::from(w - x) * 12 / 14 && x < w;
            if in_shaft || in_head {
                let o = ((y * w + x) * 4) as usize;
                rgba[o] = 220;
                rgba[o + 1] = 90 + (x * 3) as u8;
                rgba[o + 2] = 60;
                rgba[o + 3] = 255;
            }
        }
    }
    Ok(Cutout::from_rgba(class.clone(), w, h, rgba, "arrow")?)
}

fn main() -> Result<()> {
    let class = ClassId::new(0, "arrow")?;
    let base = arrow(&class)?;
    let dir = output_dir("transform_cutout")?;
    base.save_rgba_png(dir.join("base.png"))?;
    println!("base:        {}x{}", base.width(), base.height());

    let flipped = flip_cutout(&base);
    flipped.save_rgba_png(dir.join("flipped.png"))?;
    println!("flipped:     {}x{} (mirror, bit-exact colors)", flipped.width(), flipped.height());

    let scaled = scale_cutout(&base, 0.4)?;
    scaled.save_rgba_png(dir.join("scaled_0.4.png"))?;
    println!("scaled 0.4:  {}x{}", scaled.width(), scaled.height());

    for angle in [30.0, 90.0, -45.0] {
        let rotated = rotate_cutout(&base, angle)?;
        rotated.save_rgba_png(dir.join(format!("rotated_{angle}.png")))?;
        println!("rotated {angle:>5}: {}x{}", rotated.width(), rotated.height());
    }

    let warped = perspective_warp(&base, 0.04)?;
    warped.save_rgba_png(dir.join("warped.png"))?;
    println!("warped 0.04: {}x{} (top edge pinched)", warped.width(), warped.height());

    // A full parameter draw from the training ranges (rotation, scale, tilt).
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let params: AugmentParams = AugmentRanges::default().sample(&mut rng, true, true);
    let augmented = params.apply(&base)?;
    augmented.save_rgba_png(dir.join("random_draw.png"))?;
    println!(
        "random draw: {}x{} (rotation {:.1} deg, scale {:.2}, tilt {:.5})",
        augmented.width(),
        augmented.height(),
        params.rotation_deg,
        params.scale,
        params.perspective_tilt
    );

    println!("wrote {}", dir.display());
    Ok(())
}
