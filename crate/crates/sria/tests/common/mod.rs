//! Helpers shared by the integration suites: deterministic toy catalogs
//! (in memory and on disk), whole-tree hashing, and small independent
//! parsers used to cross-check the library's own readers and writers.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};
use sria::catalog::{Background, Catalog, CatalogClass, ClassId, Cutout};
use sria::raster::RgbRaster;

/// Tiny standalone mixing function so the helpers stay independent of the
/// library's own seeding scheme.
pub fn mix(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn channel(seed: u64, x: u32, y: u32, c: u32) -> u8 {
    (mix(seed ^ ((u64::from(x) << 40) | (u64::from(y) << 16) | u64::from(c))) >> 56) as u8
}

/// A deterministic elliptical cutout inscribed in `w`x`h`: opaque inside the
/// ellipse (so the patch touches all four edges and is already tight),
/// transparent outside, with per-pixel pseudo-random colors.
pub fn toy_cutout(class: &ClassId, w: u32, h: u32, seed: u64) -> Cutout {
    assert!(w >= 1 && h >= 1);
    let (cx, cy) = (f64::from(w) / 2.0, f64::from(h) / 2.0);
    let (rx, ry) = (f64::from(w) / 2.0, f64::from(h) / 2.0);
    let mut rgba = Vec::with_capacity((w * h * 4) as usize);
    for y in 0..h {
        for x in 0..w {
            let dx = (f64::from(x) + 0.5 - cx) / rx;
            let dy = (f64::from(y) + 0.5 - cy) / ry;
            let inside = dx * dx + dy * dy <= 1.0;
            rgba.push(channel(seed, x, y, 0));
            rgba.push(channel(seed, x, y, 1));
            rgba.push(channel(seed, x, y, 2));
            rgba.push(if inside { 255 } else { 0 });
        }
    }
    Cutout::from_rgba(class.clone(), w, h, rgba, format!("toy_{}_{seed}", class.name()))
        .expect("toy cutout dimensions are valid")
}

/// A deterministic gradient background.
pub fn toy_background(w: u32, h: u32, seed: u64) -> Background {
    let mut data = Vec::with_capacity((w * h * 3) as usize);
    let bias = (mix(seed) >> 56) as u8;
    for y in 0..h {
        for x in 0..w {
            data.push(((x * 200) / w.max(1)) as u8 ^ bias);
            data.push(((y * 200) / h.max(1)) as u8);
            data.push(bias.wrapping_add(64));
        }
    }
    let rgb = RgbRaster::new(w, h, data).unwrap();
    Background::new(rgb, Vec::new(), format!("toybg_{seed}"))
}

/// In-memory catalog: `classes` gives (name, cutout count); cutout sizes vary
/// deterministically in roughly 10..=34 pixels per side.
pub fn toy_catalog(classes: &[(&str, usize)], backgrounds: usize, bg: (u32, u32)) -> Catalog {
    let mut catalog = Catalog::default();
    for (index, (name, count)) in classes.iter().enumerate() {
        let id = ClassId::new(index as u32, *name).unwrap();
        let mut cutouts = Vec::new();
        for k in 0..*count {
            let s = mix((index as u64) << 32 | k as u64);
            let w = 10 + (s % 25) as u32;
            let h = 10 + ((s >> 8) % 25) as u32;
            cutouts.push(toy_cutout(&id, w, h, s));
        }
        catalog.classes.push(CatalogClass { id, cutouts });
    }
    for b in 0..backgrounds {
        catalog.backgrounds.push(toy_background(bg.0, bg.1, b as u64));
    }
    catalog
}

/// Writes a catalog directory tree (`objects/<class>/*_rgba.png` plus
/// `backgrounds/*.png`) that `load_catalog` accepts.
pub fn write_disk_catalog(
    root: &Path,
    classes: &[(&str, usize)],
    backgrounds: usize,
    bg: (u32, u32),
) {
    for (index, (name, count)) in classes.iter().enumerate() {
        let dir = root.join("objects").join(name);
        fs::create_dir_all(&dir).unwrap();
        let id = ClassId::new(index as u32, *name).unwrap();
        for k in 0..*count {
            let s = mix((index as u64) << 32 | k as u64);
            let w = 8 + (s % 18) as u32;
            let h = 8 + ((s >> 8) % 18) as u32;
            toy_cutout(&id, w, h, s)
                .save_rgba_png(dir.join(format!("cut_{k:03}_rgba.png")))
                .unwrap();
        }
    }
    let bg_dir = root.join("backgrounds");
    fs::create_dir_all(&bg_dir).unwrap();
    for b in 0..backgrounds {
        let background = toy_background(bg.0, bg.1, b as u64);
        background.rgb.save_png(bg_dir.join(format!("bg_{b:02}.png"))).unwrap();
    }
}

/// SHA-256 over every file in a tree: sorted relative paths, each mixed in as
/// `path NUL length NUL bytes`. Two trees hash equal iff they have identical
/// file sets with identical contents.
pub fn tree_hash(root: &Path) -> String {
    let mut files: Vec<_> = walkdir::WalkDir::new(root)
        .into_iter()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().is_file())
        .map(|e| e.path().strip_prefix(root).unwrap().to_path_buf())
        .collect();
    files.sort();
    let mut hasher = Sha256::new();
    for rel in files {
        let bytes = fs::read(root.join(&rel)).unwrap();
        hasher.update(rel.to_string_lossy().as_bytes());
        hasher.update([0]);
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update([0]);
        hasher.update(&bytes);
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Independent detector-txt parser: whitespace-split floats, one row per
/// non-blank line. The first field of each row is the class index.
pub fn parse_label_text(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(|t| t.parse::<f64>().unwrap()).collect())
        .collect()
}

/// Minimal independent COCO scan via raw JSON values (no library types).
pub struct CocoScan {
    /// image id -> (file name, width, height)
    pub images: BTreeMap<u64, (String, u64, u64)>,
    /// (annotation id, image id, category id, xywh, score)
    pub annotations: Vec<(u64, u64, u64, [f64; 4], Option<f64>)>,
    /// category id -> name
    pub categories: BTreeMap<u64, String>,
}

pub fn scan_coco(path: &Path) -> CocoScan {
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let images = value["images"]
        .as_array()
        .unwrap()
        .iter()
        .map(|im| {
            (
                im["id"].as_u64().unwrap(),
                (
                    im["file_name"].as_str().unwrap().to_string(),
                    im["width"].as_u64().unwrap(),
                    im["height"].as_u64().unwrap(),
                ),
            )
        })
        .collect();
    let annotations = value["annotations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| {
            let b = a["bbox"].as_array().unwrap();
            (
                a["id"].as_u64().unwrap(),
                a["image_id"].as_u64().unwrap(),
                a["category_id"].as_u64().unwrap(),
                [
                    b[0].as_f64().unwrap(),
                    b[1].as_f64().unwrap(),
                    b[2].as_f64().unwrap(),
                    b[3].as_f64().unwrap(),
                ],
                a.get("score").and_then(|s| s.as_f64()),
            )
        })
        .collect();
    let categories = value["categories"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["id"].as_u64().unwrap(), c["name"].as_str().unwrap().to_string()))
        .collect();
    CocoScan { images, annotations, categories }
}

/// Reads a PNG written by the library back as raw (width, height, rgba)
/// without using library raster types.
pub fn read_png_rgba(path: &Path) -> (u32, u32, Vec<u8>) {
    let img = image::open(path).unwrap().to_rgba8();
    let (w, h) = img.dimensions();
    (w, h, img.into_raw())
}
