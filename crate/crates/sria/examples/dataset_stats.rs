//! Recount a generated dataset: images and instances per class.
//!
//! Statistics are recomputed from the label files on disk (not trusted from
//! the manifest), so the report doubles as an integrity check. This demo
//! synthesizes a small dataset, then recounts it and prints the table plus
//! the JSON form.
//!
//! Run with: `cargo run --example dataset_stats`

use std::path::PathBuf;

use anyhow::Result;
use sria::catalog::{Background, Catalog, CatalogClass, ClassId, Cutout};
use sria::dataset_io::{dataset_stats, to_canonical_json, DatasetWriter};
use sria::raster::RgbRaster;
use sria::scheduler::{run_all, SynthesisConfig};

fn output_dir(name: &str) -> Result<PathBuf> {
    let target = std::env::var("CARGO_TARGET_DIR").unwrap_or_else(|_| "target".into());
    let dir = PathBuf::from(target).join("example-output").join(name);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn square(class: &ClassId, side: u32, tint: [u8; 3]) -> Result<Cutout> {
    let mut rgba = Vec::with_capacity((side * side * 4) as usize);
    for _ in 0..side * side {
        rgba.extend_from_slice(&[tint[0], tint[1], tint[2], 255]);
    }
    Ok(Cutout::from_rgba(class.clone(), side, side, rgba, "square")?)
}

fn main() -> Result<()> {
    // Assemble a catalog in memory: class k gets k+2 cutouts.
    let mut catalog = Catalog::default();
    for (index, name) in ["nut", "rock", "tape"].iter().enumerate() {
        let id = ClassId::new(index as u32, *name)?;
        let cutouts = (0..index + 2)
            .map(|k| square(&id, 10 + 4 * k as u32, [60 + 60 * index as u8, 120, 180]))
            .collect::<Result<Vec<_>>>()?;
        catalog.classes.push(CatalogClass { id, cutouts });
    }
    catalog.backgrounds.push(Background::new(
        RgbRaster::filled(200, 150, [80, 85, 90])?,
        vec!["plain".into()],
        "plate",
    ));

    let config = SynthesisConfig {
        per_batch_cap: 6,
        canvas_size: Some((200, 150)),
        master_seed: 7,
        ..Default::default()
    };
    let dataset_dir = output_dir("dataset_stats")?.join("dataset");
    let mut writer = DatasetWriter::create(&dataset_dir)?;
    for class in &catalog.classes {
        writer.register_class(class.id.index(), class.id.name());
    }
    let manifest = run_all(&config, &catalog, |item| writer.add(&item))?;
    writer.finish(&manifest)?;

    let report = dataset_stats(&dataset_dir)?;
    println!("recounted from {}:", dataset_dir.display());
    println!();
    print!("{}", report.table());
    println!();
    println!("as JSON:");
    print!("{}", to_canonical_json(&report)?);
    Ok(())
}
