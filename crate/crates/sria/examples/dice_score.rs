//! Score mask overlap with the Dice coefficient `2|A∩B| / (|A|+|B|)`.
//!
//! Compares a reference disc against a shifted copy, a dilated copy, and a
//! disjoint one, printing the score for each.
//!
//! Run with: `cargo run --example dice_score`

use anyhow::Result;
use sria::mask_lab::dice;
use sria::raster::BinaryMask;

fn disc(w: u32, h: u32, cx: f64, cy: f64, r: f64) -> BinaryMask {
    let bits = (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64 + 0.5, (i / w) as f64 + 0.5);
            (x - cx).powi(2) + (y - cy).powi(2) <= r * r
        })
        .collect();
    BinaryMask::new(w, h, bits).expect("valid dimensions")
}

fn main() -> Result<()> {
    let (w, h) = (64, 48);
    let reference = disc(w, h, 30.0, 24.0, 12.0);

    let cases = [
        ("identical", disc(w, h, 30.0, 24.0, 12.0)),
        ("shifted by 3 px", disc(w, h, 33.0, 24.0, 12.0)),
        ("shifted by 10 px", disc(w, h, 40.0, 24.0, 12.0)),
        ("dilated +25%", disc(w, h, 30.0, 24.0, 15.0)),
        ("disjoint", disc(w, h, 8.0, 8.0, 6.0)),
    ];

    println!("Dice coefficient against the reference disc:");
    for (label, mask) in &cases {
        println!("  {label:<16} {:.4}", dice(&reference, mask)?);
    }
    Ok(())
}
