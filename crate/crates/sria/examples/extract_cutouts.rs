//! Cut an object out of a photograph using its binary mask.
//!
//! The cutout is an alpha-matted RGBA patch, cropped tight to the mask, that
//! later stages paste onto new backgrounds. This demo photographs a "wrench"
//! (a synthetic L-shape), masks it, extracts the cutout, and saves all three
//! images.
//!
//! Run with: `cargo run --example extract_cutouts`

use std::path::PathBuf;

use anyhow::Result;
use sria::catalog::{extract_cutout, ClassId};
use sria::raster::{BinaryMask, RgbRaster};

fn output_dir(name: &str) -> Result<PathBuf> {
    let target = std::env::var("CARGO_TARGET_DIR").unwrap_or_else(|_| "target".into());
    let dir = PathBuf::from(target).join("example-output").join(name);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn main() -> Result<()> {
    let (w, h) = (80u32, 60u32);
    let mut photo = RgbRaster::filled(w, h, [70, 75, 80])?;
    let mut mask = BinaryMask::filled(w, h, false)?;

    // An L-shaped tool: vertical shaft plus horizontal head.
    let shape = |x: u32, y: u32| (20..28).contains(&x) && (10..48).contains(&y)
        || (20..52).contains(&x) && (40..48).contains(&y);
    for y in 0..h {
        for x in 0..w {
            if shape(x, y) {
                photo.set(x, y, [200, 170, 60]);
                mask.set(x, y, true);
            }
        }
    }

    let class = ClassId::new(11, "Wrench")?;
    let cutout = extract_cutout(&photo, &mask, &class)?;
    println!("class:         {} (index {})", cutout.class_id().name(), cutout.class_id().index());
    println!("cutout size:   {}x{} (tight crop)", cutout.width(), cutout.height());
    println!("opaque pixels: {}", cutout.alpha_count());

    let dir = output_dir("extract_cutouts")?;
    photo.save_png(dir.join("photo.png"))?;
    mask.save_png(dir.join("mask.png"))?;
    cutout.save_rgba_png(dir.join("cutout_rgba.png"))?;
    println!("wrote {}", dir.display());
    Ok(())
}
