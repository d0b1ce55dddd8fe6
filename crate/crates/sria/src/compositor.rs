//! Pastes cutouts onto backgrounds with hard overwrite (no blending), under
//! two placement constraints:
//!
//! * **visibility floor** — the in-frame fraction of a cutout's opaque area
//!   must be at least `truncation_floor`;
//! * **coverage cap** — no earlier instance may end up with more than
//!   `occlusion_cap` of its in-frame opaque area covered by later pastes.
//!
//! Offsets are resampled until a candidate satisfies both, up to
//! [`MAX_PLACEMENT_TRIES`] attempts; a candidate that never fits is dropped.
//! Bounding boxes are derived from the in-frame opaque pixels alone, so a
//! partially occluded object keeps its full visible-extent box.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bbox::BoundingBox;
use crate::catalog::{Background, Cutout};
use crate::error::{Error, Result};
use crate::raster::{BinaryMask, RgbRaster};
use crate::transforms::AugmentParams;

/// Canvas dimensions used when a configuration does not override them.
pub const DEFAULT_CANVAS: (u32, u32) = (300, 300);

/// Offset proposals per instance before it is dropped.
pub const MAX_PLACEMENT_TRIES: u32 = 20;

/// Placement constraints; defaults match the standard synthesis recipes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    /// Minimum in-frame fraction of a cutout's opaque area (1.0 forbids any
    /// truncation by the frame).
    pub truncation_floor: f64,
    /// Maximum fraction of an earlier instance's in-frame opaque area that
    /// later pastes may cover (0.0 forbids overlap entirely).
    pub occlusion_cap: f64,
}

impl Default for Constraints {
    fn default() -> Self {
        Self { truncation_floor: 0.25, occlusion_cap: 0.6 }
    }
}

impl Constraints {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("truncation_floor", self.truncation_floor),
            ("occlusion_cap", self.occlusion_cap),
        ] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// One accepted paste and its audit record.
#[derive(Clone, Debug)]
pub struct PlacedInstance {
    /// Cutout exactly as pasted (already augmented).
    pub cutout: Cutout,
    /// Augmentation that produced [`Self::cutout`] from the library original.
    pub params: AugmentParams,
    /// Canvas position of the cutout's top-left corner; may be negative or
    /// reach past the frame when the instance is truncated.
    pub offset: (i64, i64),
    /// In-frame opaque pixels / total opaque pixels.
    pub visible_fraction: f64,
    /// Fraction of in-frame opaque pixels covered by later instances.
    pub occluded_fraction: f64,
    /// Tight box around the in-frame opaque pixels.
    pub bbox: BoundingBox,
}

impl PlacedInstance {
    /// Canvas-sized mask of this instance's in-frame opaque pixels.
    pub fn canvas_alpha(&self, width: u32, height: u32) -> Result<BinaryMask> {
        let mut mask = BinaryMask::filled(width, height, false)?;
        for (cx, cy, _, _) in in_frame_alpha(&self.cutout, self.offset, width, height) {
            mask.set(cx, cy, true);
        }
        Ok(mask)
    }
}

/// A composited training image with its per-instance annotations.
#[derive(Clone, Debug)]
pub struct AnnotatedImage {
    pub canvas: RgbRaster,
    pub instances: Vec<PlacedInstance>,
    pub background_id: String,
    pub seed: u64,
}

/// Iterates the cutout's opaque pixels that land inside a `width x height`
/// frame at `offset`, yielding `(canvas_x, canvas_y, cutout_x, cutout_y)`.
fn in_frame_alpha(
    cutout: &Cutout,
    offset: (i64, i64),
    width: u32,
    height: u32,
) -> impl Iterator<Item = (u32, u32, u32, u32)> + '_ {
    let (w, h) = (width as i64, height as i64);
    (0..cutout.height()).flat_map(move |y| {
        (0..cutout.width()).filter_map(move |x| {
            let (cx, cy) = (offset.0 + x as i64, offset.1 + y as i64);
            if cx >= 0 && cx < w && cy >= 0 && cy < h && cutout.alpha_at(x, y) {
                Some((cx as u32, cy as u32, x, y))
            } else {
                None
            }
        })
    })
}

/// In-frame opaque pixels / total opaque pixels for a hypothetical placement.
pub fn visible_fraction(cutout: &Cutout, offset: (i64, i64), width: u32, height: u32) -> f64 {
    let visible = in_frame_alpha(cutout, offset, width, height).count() as u64;
    visible as f64 / cutout.alpha_count() as f64
}

/// Tight box around the in-frame opaque pixels; `None` when nothing lands in
/// frame.
pub fn derive_bbox(
    cutout: &Cutout,
    offset: (i64, i64),
    width: u32,
    height: u32,
) -> Option<BoundingBox> {
    let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0u32, 0u32);
    let mut any = false;
    for (cx, cy, _, _) in in_frame_alpha(cutout, offset, width, height) {
        any = true;
        x0 = x0.min(cx);
        y0 = y0.min(cy);
        x1 = x1.max(cx);
        y1 = y1.max(cy);
    }
    if !any {
        return None;
    }
    Some(
        BoundingBox::from_pixel_bounds(x0, y0, x1 + 1, y1 + 1)
            .expect("non-empty pixel extent yields a valid box"),
    )
}

/// Fraction of `subject`'s in-frame opaque pixels covered by the union of the
/// `occluders` placements. Zero when the subject has no in-frame pixels.
pub fn occluded_fraction(
    subject: (&Cutout, (i64, i64)),
    occluders: &[(&Cutout, (i64, i64))],
    width: u32,
    height: u32,
) -> f64 {
    let mut visible = 0u64;
    let mut covered = 0u64;
    for (cx, cy, _, _) in in_frame_alpha(subject.0, subject.1, width, height) {
        visible += 1;
        let hit = occluders.iter().any(|&(oc, ooff)| {
            let (ox, oy) = (cx as i64 - ooff.0, cy as i64 - ooff.1);
            ox >= 0
                && oy >= 0
                && (ox as u32) < oc.width()
                && (oy as u32) < oc.height()
                && oc.alpha_at(ox as u32, oy as u32)
        });
        if hit {
            covered += 1;
        }
    }
    if visible == 0 {
        0.0
    } else {
        covered as f64 / visible as f64
    }
}

/// Overwrites the canvas with the cutout's opaque pixels (no blending).
pub fn paste(canvas: &mut RgbRaster, cutout: &Cutout, offset: (i64, i64)) {
    let (w, h) = (canvas.width(), canvas.height());
    for (cx, cy, x, y) in in_frame_alpha(cutout, offset, w, h) {
        canvas.set(cx, cy, cutout.color_at(x, y));
    }
}

/// Proposes a top-left offset biased so roughly a `floor` fraction of the
/// cutout's width and height can stay in frame. The proposal is necessary but
/// not sufficient — the caller still checks the actual opaque-pixel fractions.
pub fn sample_offset(
    rng: &mut impl Rng,
    canvas: (u32, u32),
    cutout: (u32, u32),
    floor: f64,
) -> (i64, i64) {
    let range = |frame: u32, size: u32| -> (i64, i64) {
        let lo = -(((1.0 - floor) * size as f64).floor() as i64);
        let hi = frame as i64 - (floor * size as f64).ceil() as i64;
        if lo <= hi {
            (lo, hi)
        } else {
            // Oversized cutout: center it.
            let c = (frame as i64 - size as i64) / 2;
            (c, c)
        }
    };
    let (x_lo, x_hi) = range(canvas.0, cutout.0);
    let (y_lo, y_hi) = range(canvas.1, cutout.1);
    (rng.random_range(x_lo..=x_hi), rng.random_range(y_lo..=y_hi))
}

/// Composites the picked (already augmented) cutouts onto the background.
///
/// Instances are placed in order; each gets up to [`MAX_PLACEMENT_TRIES`]
/// offset proposals and is dropped if none satisfies the visibility floor and
/// the coverage cap of every earlier instance. Later instances paint over
/// earlier ones. Errors with [`Error::NoInstancesPlaced`] when every pick was
/// dropped.
pub fn synthesize_image(
    background: &Background,
    picks: Vec<(Cutout, AugmentParams)>,
    constraints: &Constraints,
    seed: u64,
    rng: &mut impl Rng,
) -> Result<AnnotatedImage> {
    constraints.validate()?;
    let (w, h) = (background.rgb.width(), background.rgb.height());
    let mut accepted: Vec<(Cutout, AugmentParams, (i64, i64))> = Vec::new();

    for (cutout, params) in picks {
        for _ in 0..MAX_PLACEMENT_TRIES {
            let offset = sample_offset(
                rng,
                (w, h),
                (cutout.width(), cutout.height()),
                constraints.truncation_floor,
            );
            let visible = visible_fraction(&cutout, offset, w, h);
            if visible < constraints.truncation_floor || visible == 0.0 {
                continue;
            }
            // Would accepting this paste push any earlier instance past the
            // coverage cap? Later-accepted pastes already on the stack count
            // too.
            let fits = accepted.iter().enumerate().all(|(i, (earlier, _, eoff))| {
                let mut occluders: Vec<(&Cutout, (i64, i64))> = accepted[i + 1..]
                    .iter()
                    .map(|(c, _, o)| (c, *o))
                    .collect();
                occluders.push((&cutout, offset));
                occluded_fraction((earlier, *eoff), &occluders, w, h) <= constraints.occlusion_cap
            });
            if fits {
                accepted.push((cutout, params, offset));
                break;
            }
        }
    }

    if accepted.is_empty() {
        return Err(Error::NoInstancesPlaced);
    }

    let mut canvas = background.rgb.clone();
    for (cutout, _, offset) in &accepted {
        paste(&mut canvas, cutout, *offset);
    }

    let instances = accepted
        .iter()
        .enumerate()
        .map(|(i, (cutout, params, offset))| {
            let occluders: Vec<(&Cutout, (i64, i64))> =
                accepted[i + 1..].iter().map(|(c, _, o)| (c, *o)).collect();
            PlacedInstance {
                cutout: cutout.clone(),
                params: *params,
                offset: *offset,
                visible_fraction: visible_fraction(cutout, *offset, w, h),
                occluded_fraction: occluded_fraction((cutout, *offset), &occluders, w, h),
                bbox: derive_bbox(cutout, *offset, w, h)
                    .expect("accepted instance has in-frame pixels"),
            }
        })
        .collect();

    Ok(AnnotatedImage {
        canvas,
        instances,
        background_id: background.source_id.clone(),
        seed,
    })
}
