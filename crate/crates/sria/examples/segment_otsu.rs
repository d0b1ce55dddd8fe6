//! Threshold a grayscale photograph into a foreground mask.
//!
//! Builds a synthetic "object on a plate" image (bright blob, dark
//! background, a little noise), picks the threshold that maximizes
//! between-class variance, and writes both images next to the target
//! directory.
//!
//! Run with: `cargo run --example segment_otsu`

use std::path::PathBuf;

use anyhow::Result;
use sria::mask_lab::otsu_threshold;
use sria::raster::GrayImage;

fn output_dir(name: &str) -> Result<PathBuf> {
    let target = std::env::var("CARGO_TARGET_DIR").unwrap_or_else(|_| "target".into());
    let dir = PathBuf::from(target).join("example-output").join(name);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn main() -> Result<()> {
    let (w, h) = (96u32, 72u32);
    let mut img = GrayImage::filled(w, h, 0)?;
    for y in 0..h {
        for x in 0..w {
            // Dark plate with mild texture.
            let noise = ((x * 7 + y * 13) % 23) as u8;
            let mut v = 38 + noise;
            // Bright elliptical object.
            let dx = (f64::from(x) - 40.0) / 22.0;
            let dy = (f64::from(y) - 34.0) / 15.0;
            if dx * dx + dy * dy <= 1.0 {
                v = 195 + ((x * 3 + y * 5) % 17) as u8;
            }
            img.set(x, y, v);
        }
    }

    let result = otsu_threshold(&img);
    println!("chosen threshold: {}", result.threshold);
    println!("degenerate (constant image): {}", result.degenerate);
    let foreground = result.mask.bits().iter().filter(|b| **b).count();
    println!(
        "foreground pixels: {foreground} of {} ({:.1}%)",
        w * h,
        100.0 * foreground as f64 / f64::from(w * h)
    );

    let dir = output_dir("segment_otsu")?;
    img.save_png(dir.join("plate.png"))?;
    result.mask.save_png(dir.join("mask.png"))?;
    println!("wrote {}", dir.display());
    Ok(())
}
