//! Mix two labeled images into one convex-combination training sample.
//!
//! The blended image is `lambda * a + (1 - lambda) * b` per channel; the
//! label set is the union of both inputs with weights `lambda` and
//! `1 - lambda`. A binary mask turns blending into per-pixel selection.
//!
//! Run with: `cargo run --example mixup_blend`

use std::path::PathBuf;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sria::bbox::BoundingBox;
use sria::catalog::ClassId;
use sria::dataset_io::{mixup, sample_lambda, write_weighted_txt, Annotation};
use sria::raster::{BinaryMask, RgbRaster};

fn output_dir(name: &str) -> Result<PathBuf> {
    let target = std::env::var("CARGO_TARGET_DIR").unwrap_or_else(|_| "target".into());
    let dir = PathBuf::from(target).join("example-output").join(name);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn scene(w: u32, h: u32, base: [u8; 3], box_at: (u32, u32), tint: [u8; 3]) -> RgbRaster {
    let mut img = RgbRaster::filled(w, h, base).expect("valid dimensions");
    for y in box_at.1..box_at.1 + 20 {
        for x in box_at.0..box_at.0 + 24 {
            img.set(x, y, tint);
        }
    }
    img
}

fn main() -> Result<()> {
    let (w, h) = (96u32, 72u32);
    let img_a = scene(w, h, [60, 70, 90], (10, 12), [220, 80, 50]);
    let img_b = scene(w, h, [110, 95, 70], (50, 34), [40, 180, 90]);
    let labels_a = vec![Annotation::new(
        ClassId::new(0, "crate")?,
        BoundingBox::new(10.0, 12.0, 34.0, 32.0)?,
        w,
        h,
    )?];
    let labels_b = vec![Annotation::new(
        ClassId::new(1, "drum")?,
        BoundingBox::new(50.0, 34.0, 74.0, 54.0)?,
        w,
        h,
    )?];

    let dir = output_dir("mixup_blend")?;
    img_a.save_png(dir.join("a.png"))?;
    img_b.save_png(dir.join("b.png"))?;

    // A lambda drawn from the symmetric Beta prior (alpha = 1 -> uniform).
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let lambda = sample_lambda(&mut rng, 1.0)?;
    println!("sampled lambda: {lambda:.4}");

    let blended = mixup(&img_a, &labels_a, &img_b, &labels_b, lambda, None)?;
    blended.image.save_png(dir.join("blended.png"))?;
    println!("blended labels (class, weight):");
    for (ann, weight) in &blended.labels {
        println!(
            "  {} ({})  weight {weight:.4}",
            ann.class_id().name(),
            ann.class_id().index()
        );
    }
    std::fs::write(dir.join("blended.txt"), write_weighted_txt(&blended.labels)?)?;

    // Mask mixing: left half from a, right half from b, no blending at all.
    let mask = BinaryMask::new(w, h, (0..w * h).map(|i| i % w < w / 2).collect())?;
    let split = mixup(&img_a, &labels_a, &img_b, &labels_b, 0.5, Some(&mask))?;
    split.image.save_png(dir.join("split.png"))?;
    println!("mask mix: left half of 'a' stitched to right half of 'b' (bit-exact)");

    // Random masks give patchwork samples.
    let noise = BinaryMask::new(w, h, (0..w * h).map(|_| rng.random::<bool>()).collect())?;
    let speckle = mixup(&img_a, &labels_a, &img_b, &labels_b, 0.5, Some(&noise))?;
    speckle.image.save_png(dir.join("speckle.png"))?;

    println!("wrote {}", dir.display());
    Ok(())
}
