//! Drives whole-dataset synthesis: for every class, six batches are run,
//! each enabling a distinct subset of the augmentation flags
//! {rotation, scale, occlusion, truncation, multi-instance}. Per-batch image
//! counts are capped (default 65, so at most 390 images per class), and the
//! run is reproducible from a single master seed regardless of worker count:
//! per-image seeds are drawn sequentially from a per-(class, batch) stream,
//! then images are generated in parallel and emitted in index order.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catalog::{Background, Catalog, CatalogClass};
use crate::compositor::{synthesize_image, AnnotatedImage, Constraints, DEFAULT_CANVAS};
use crate::error::{Error, Result};
use crate::seed;
use crate::transforms::AugmentRanges;

/// One batch's augmentation flag subset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchRecipe {
    /// Batch number, 1 through 6 for the standard set.
    pub id: u32,
    pub use_rotation: bool,
    pub use_scale: bool,
    pub use_occlusion: bool,
    pub use_truncation: bool,
    /// Multiple instances per image (count uniform in the configured range)
    /// instead of exactly one.
    pub use_instances: bool,
}

impl BatchRecipe {
    pub fn label(&self) -> String {
        format!("b{}", self.id)
    }

    /// Constraints actually enforced under this recipe: a disabled truncation
    /// flag forbids any clipping (floor 1.0) and a disabled occlusion flag
    /// forbids any overlap (cap 0.0).
    pub fn effective_constraints(&self, base: &Constraints) -> Constraints {
        Constraints {
            truncation_floor: if self.use_truncation { base.truncation_floor } else { 1.0 },
            occlusion_cap: if self.use_occlusion { base.occlusion_cap } else { 0.0 },
        }
    }
}

/// The six shipped batch recipes:
/// 1 = occlusion+truncation, 2 = rotation+scale+occlusion+truncation,
/// 3 = instances+truncation, 4 = scale+rotation+instances+truncation,
/// 5 = rotation+truncation+occlusion, 6 = scale+truncation+occlusion.
pub fn standard_recipes() -> [BatchRecipe; 6] {
    let off = BatchRecipe {
        id: 0,
        use_rotation: false,
        use_scale: false,
        use_occlusion: false,
        use_truncation: true, // clipping is permitted in every batch
        use_instances: false,
    };
    [
        BatchRecipe { id: 1, use_occlusion: true, ..off },
        BatchRecipe { id: 2, use_rotation: true, use_scale: true, use_occlusion: true, ..off },
        BatchRecipe { id: 3, use_instances: true, ..off },
        BatchRecipe { id: 4, use_rotation: true, use_scale: true, use_instances: true, ..off },
        BatchRecipe { id: 5, use_rotation: true, use_occlusion: true, ..off },
        BatchRecipe { id: 6, use_scale: true, use_occlusion: true, ..off },
    ]
}

fn default_cap() -> u32 {
    65
}

fn default_instance_range() -> (u32, u32) {
    (1, 6)
}

fn default_canvas() -> Option<(u32, u32)> {
    Some(DEFAULT_CANVAS)
}

/// Full synthesis configuration; the JSON config file mirrors these field
/// names, and every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    /// Restrict synthesis to these class names (exact match); `null` means
    /// every class in the catalog.
    pub classes: Option<Vec<String>>,
    /// Upper bound on images per (class, batch); counts are drawn uniformly
    /// from `[1, per_batch_cap]`.
    pub per_batch_cap: u32,
    /// Force every (class, batch) to exactly this count instead of drawing
    /// one at random. Must not exceed `per_batch_cap`.
    pub fixed_per_batch: Option<u32>,
    pub ranges: AugmentRanges,
    pub constraints: Constraints,
    /// Inclusive instance-count bounds for multi-instance batches.
    pub instance_range: (u32, u32),
    pub master_seed: u64,
    /// Backgrounds are resized to this canvas; `null` keeps each
    /// background's native size.
    pub canvas_size: Option<(u32, u32)>,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            classes: None,
            per_batch_cap: default_cap(),
            fixed_per_batch: None,
            ranges: AugmentRanges::default(),
            constraints: Constraints::default(),
            instance_range: default_instance_range(),
            master_seed: 0,
            canvas_size: default_canvas(),
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.per_batch_cap == 0 {
            return Err(Error::InvalidConfig("per_batch_cap must be at least 1".into()));
        }
        if let Some(n) = self.fixed_per_batch {
            if n == 0 || n > self.per_batch_cap {
                return Err(Error::InvalidConfig(format!(
                    "fixed_per_batch {n} outside [1, {}]",
                    self.per_batch_cap
                )));
            }
        }
        self.ranges.validate()?;
        self.constraints.validate()?;
        let (lo, hi) = self.instance_range;
        if lo == 0 || lo > hi {
            return Err(Error::InvalidConfig(format!(
                "instance_range ({lo}, {hi}) must satisfy 1 <= lo <= hi"
            )));
        }
        if let Some((w, h)) = self.canvas_size {
            if w == 0 || h == 0 {
                return Err(Error::InvalidConfig("canvas_size dimensions must be positive".into()));
            }
        }
        if let Some(classes) = &self.classes {
            if classes.is_empty() {
                return Err(Error::InvalidConfig(
                    "classes, when given, must name at least one class".into(),
                ));
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical (sorted-key) JSON encoding; recorded in
    /// the manifest so a dataset can be traced back to its exact settings.
    pub fn config_hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = value.to_string(); // object keys sort deterministically
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Per-class tally row of the manifest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTally {
    pub class: String,
    pub index: u32,
    /// Cutouts available to the class in the source catalog.
    pub masks_used: u64,
    pub images_produced: u64,
    pub instances: u64,
}

/// Whole-run accounting: per-class rows plus exact totals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub per_class: Vec<ClassTally>,
    pub total_masks: u64,
    pub total_images: u64,
    pub total_instances: u64,
    pub seed: u64,
    pub config_hash: String,
}

impl DatasetManifest {
    /// Human-readable per-class table with a TOTAL row.
    pub fn table(&self) -> String {
        let name_w = self
            .per_class
            .iter()
            .map(|r| r.class.len())
            .chain(["Class".len(), "TOTAL".len()])
            .max()
            .unwrap_or(5);
        let mut out = format!("{:<name_w$}  {:>8}  {:>8}\n", "Class", "Masks", "Images");
        for row in &self.per_class {
            out.push_str(&format!(
                "{:<name_w$}  {:>8}  {:>8}\n",
                row.class, row.masks_used, row.images_produced
            ));
        }
        out.push_str(&format!(
            "{:<name_w$}  {:>8}  {:>8}\n",
            "TOTAL", self.total_masks, self.total_images
        ));
        out
    }
}

/// One generated image plus the identifiers that name its files on disk.
#[derive(Clone, Debug)]
pub struct BatchImage {
    pub image: AnnotatedImage,
    /// File stem, e.g. `c04_fuel-cap_b3_017`.
    pub stem: String,
    pub class_index: u32,
    pub class_name: String,
    pub batch_id: u32,
    pub index_in_batch: u32,
}

/// Lowercases and maps every non-alphanumeric run into `-` for file stems.
fn slug(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut pending_dash = false;
    for ch in name.chars() {
        if ch.is_ascii_alphanumeric() {
            if pending_dash && !out.is_empty() {
                out.push('-');
            }
            pending_dash = false;
            out.push(ch.to_ascii_lowercase());
        } else {
            pending_dash = true;
        }
    }
    if out.is_empty() {
        out.push('x');
    }
    out
}

/// Generates one image from its own seed: picks a background and a cutout,
/// samples per-instance augmentations, and composites. `Ok(None)` means the
/// image was dropped because nothing could be placed.
fn generate_one(
    recipe: &BatchRecipe,
    class: &CatalogClass,
    backgrounds: &[Background],
    config: &SynthesisConfig,
    image_seed: u64,
) -> Result<Option<AnnotatedImage>> {
    let mut rng = seed::rng_from(image_seed);
    let background = &backgrounds[rng.random_range(0..backgrounds.len())];
    let cutout = &class.cutouts[rng.random_range(0..class.cutouts.len())];
    let count = if recipe.use_instances {
        rng.random_range(config.instance_range.0..=config.instance_range.1)
    } else {
        1
    };

    let mut picks = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let params = config.ranges.sample(&mut rng, recipe.use_rotation, recipe.use_scale);
        match params.apply(cutout) {
            Ok(transformed) => picks.push((transformed, params)),
            Err(Error::ScaleCollapse { .. }) => {
                log::debug!(
                    "dropping an instance of {}: cutout vanishes at scale {:.3}",
                    class.id.name(),
                    params.scale
                );
            }
            Err(e) => return Err(e),
        }
    }
    if picks.is_empty() {
        log::warn!("dropping an image of {}: every instance collapsed", class.id.name());
        return Ok(None);
    }

    // Hand the compositor a background at the configured canvas size.
    let resized;
    let background = match config.canvas_size {
        Some((w, h)) if background.width() != w || background.height() != h => {
            resized = Background::new(
                background.rgb.resized(w, h)?,
                background.tags.clone(),
                background.source_id.clone(),
            );
            &resized
        }
        _ => background,
    };

    let constraints = recipe.effective_constraints(&config.constraints);
    match synthesize_image(background, picks, &constraints, image_seed, &mut rng) {
        Ok(image) => Ok(Some(image)),
        Err(Error::NoInstancesPlaced) => {
            log::warn!("dropping an image of {}: no instance could be placed", class.id.name());
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Runs one batch for one class. Per-image seeds come sequentially from
/// `batch_rng`; generation then proceeds in parallel over the current rayon
/// pool, and results are returned in image-index order, so the output is
/// identical for any worker count.
pub fn run_batch(
    recipe: &BatchRecipe,
    class: &CatalogClass,
    backgrounds: &[Background],
    count: u32,
    config: &SynthesisConfig,
    batch_rng: &mut ChaCha8Rng,
) -> Result<Vec<BatchImage>> {
    if class.cutouts.is_empty() {
        return Err(Error::EmptyClass { class: class.id.name().to_string() });
    }
    if backgrounds.is_empty() {
        return Err(Error::NoBackgrounds);
    }
    let seeds: Vec<u64> = (0..count).map(|_| batch_rng.random()).collect();
    let generated: Vec<Option<AnnotatedImage>> = seeds
        .par_iter()
        .map(|&s| generate_one(recipe, class, backgrounds, config, s))
        .collect::<Result<_>>()?;

    let class_slug = slug(class.id.name());
    Ok(generated
        .into_iter()
        .flatten()
        .enumerate()
        .map(|(idx, image)| BatchImage {
            stem: format!(
                "c{:02}_{}_{}_{:03}",
                class.id.index(),
                class_slug,
                recipe.label(),
                idx
            ),
            image,
            class_index: class.id.index(),
            class_name: class.id.name().to_string(),
            batch_id: recipe.id,
            index_in_batch: idx as u32,
        })
        .collect())
}

/// Runs all six batches for every selected class, feeding each finished image
/// to `sink` in deterministic order, and returns the manifest.
///
/// Classes with zero cutouts are skipped with a warning (their tally row
/// records zero images).
pub fn run_all(
    config: &SynthesisConfig,
    catalog: &Catalog,
    mut sink: impl FnMut(BatchImage) -> Result<()>,
) -> Result<DatasetManifest> {
    config.validate()?;
    if catalog.backgrounds.is_empty() {
        return Err(Error::NoBackgrounds);
    }

    let selected: Vec<&CatalogClass> = match &config.classes {
        None => catalog.classes.iter().collect(),
        Some(names) => names
            .iter()
            .map(|name| {
                catalog.class_by_name(name).ok_or_else(|| {
                    Error::InvalidConfig(format!("class {name:?} not present in the catalog"))
                })
            })
            .collect::<Result<_>>()?,
    };
    if selected.is_empty() {
        return Err(Error::NoClasses);
    }

    // Resize backgrounds once up front so per-image generation never has to.
    let backgrounds: Vec<Background> = match config.canvas_size {
        Some((w, h)) => catalog
            .backgrounds
            .iter()
            .map(|b| {
                Ok(Background::new(b.rgb.resized(w, h)?, b.tags.clone(), b.source_id.clone()))
            })
            .collect::<Result<_>>()?,
        None => catalog.backgrounds.clone(),
    };

    let recipes = standard_recipes();
    let mut per_class = Vec::with_capacity(selected.len());
    for class in selected {
        let mut tally = ClassTally {
            class: class.id.name().to_string(),
            index: class.id.index(),
            masks_used: class.cutouts.len() as u64,
            images_produced: 0,
            instances: 0,
        };
        if class.cutouts.is_empty() {
            log::warn!("class {} has no cutouts; skipping", class.id.name());
            per_class.push(tally);
            continue;
        }
        for recipe in &recipes {
            let mut batch_rng =
                seed::rng(config.master_seed, &[1, class.id.index() as u64, recipe.id as u64]);
            let count = match config.fixed_per_batch {
                Some(n) => n,
                None => batch_rng.random_range(1..=config.per_batch_cap),
            };
            for item in run_batch(recipe, class, &backgrounds, count, config, &mut batch_rng)? {
                tally.images_produced += 1;
                tally.instances += item.image.instances.len() as u64;
                sink(item)?;
            }
        }
        per_class.push(tally);
    }

    Ok(DatasetManifest {
        total_masks: per_class.iter().map(|r| r.masks_used).sum(),
        total_images: per_class.iter().map(|r| r.images_produced).sum(),
        total_instances: per_class.iter().map(|r| r.instances).sum(),
        seed: config.master_seed,
        config_hash: config.config_hash(),
        per_class,
    })
}
