//! Mask extraction and mask quality: Otsu thresholding, the Dice overlap
//! score, and two losses that supervise a soft mask from nothing but a
//! bounding box (a projection consistency term and a color-driven pairwise
//! smoothness term).

use serde::{Deserialize, Serialize};

use crate::bbox::BoundingBox;
use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GrayImage, RgbRaster, SoftMask};

/// Smoothing constant added to soft-Dice numerators and denominators so the
/// loss stays defined when either side is empty.
pub const SOFT_DICE_SMOOTHING: f64 = 1e-6;

/// Outcome of automatic thresholding.
#[derive(Clone, Debug)]
pub struct OtsuResult {
    /// Chosen threshold; foreground is every pixel strictly above it.
    pub threshold: u8,
    /// Foreground mask (`pixel > threshold`).
    pub mask: BinaryMask,
    /// Set when the image is constant, in which case no threshold separates
    /// anything; `threshold` then equals the constant value and the mask is
    /// empty.
    pub degenerate: bool,
}

/// Picks the threshold maximizing between-class variance over the 256-bin
/// histogram. Ties resolve to the smallest maximizing threshold.
pub fn otsu_threshold(img: &GrayImage) -> OtsuResult {
    let mut hist = [0u64; 256];
    for &v in img.data() {
        hist[v as usize] += 1;
    }
    let total = img.data().len() as f64;
    let total_sum: f64 = hist.iter().enumerate().map(|(v, &n)| v as f64 * n as f64).sum();

    let lo = img.data().iter().copied().min().unwrap();
    let hi = img.data().iter().copied().max().unwrap();
    if lo == hi {
        let mask = BinaryMask::filled(img.width(), img.height(), false).unwrap();
        return OtsuResult { threshold: lo, mask, degenerate: true };
    }

    let mut best_t = 0u8;
    let mut best_var = f64::NEG_INFINITY;
    let mut count_below = 0.0; // pixels <= t
    let mut sum_below = 0.0;
    for t in 0..256usize {
        count_below += hist[t] as f64;
        sum_below += t as f64 * hist[t] as f64;
        let count_above = total - count_below;
        if count_below == 0.0 || count_above == 0.0 {
            continue;
        }
        let mean_below = sum_below / count_below;
        let mean_above = (total_sum - sum_below) / count_above;
        let w0 = count_below / total;
        let w1 = count_above / total;
        let var = w0 * w1 * (mean_below - mean_above) * (mean_below - mean_above);
        if var > best_var {
            best_var = var;
            best_t = t as u8;
        }
    }

    let bits = img.data().iter().map(|&v| v > best_t).collect();
    let mask = BinaryMask::new(img.width(), img.height(), bits).unwrap();
    OtsuResult { threshold: best_t, mask, degenerate: false }
}

/// Dice coefficient `2|A ∩ B| / (|A| + |B|)`. Two empty masks count as a
/// perfect match (1.0). Errors on mismatched dimensions.
pub fn dice(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch {
            left_width: a.width(),
            left_height: a.height(),
            right_width: b.width(),
            right_height: b.height(),
        });
    }
    let mut intersection = 0u64;
    let mut size_sum = 0u64;
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        intersection += (x && y) as u64;
        size_sum += x as u64 + y as u64;
    }
    if size_sum == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * intersection as f64 / size_sum as f64)
}

fn soft_dice(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let uu: f64 = u.iter().map(|a| a * a).sum();
    let vv: f64 = v.iter().map(|a| a * a).sum();
    (2.0 * dot + SOFT_DICE_SMOOTHING) / (uu + vv + SOFT_DICE_SMOOTHING)
}

/// Rasterizes the box onto an axis: element `i` is 1.0 when the pixel center
/// `i + 0.5` lies inside `[min, max)`. For integer-aligned boxes this covers
/// exactly the columns/rows the box spans.
fn axis_indicator(len: u32, min: f64, max: f64) -> Vec<f64> {
    (0..len)
        .map(|i| {
            let c = i as f64 + 0.5;
            if c >= min && c < max {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Box-supervised projection loss: the predicted mask's max-projections onto
/// the x and y axes must match the box's projections. Returns the sum over
/// the two axes of `1 - softDice(projection, box indicator)`.
///
/// A prediction that is exactly the box's indicator function scores 0.
pub fn projection_loss(pred: &SoftMask, bbox: &BoundingBox) -> Result<f64> {
    if !bbox.fits_within(pred.width(), pred.height()) {
        return Err(Error::BoxOutOfBounds {
            x_min: bbox.x_min,
            y_min: bbox.y_min,
            x_max: bbox.x_max,
            y_max: bbox.y_max,
            width: pred.width(),
            height: pred.height(),
        });
    }

    let (w, h) = (pred.width(), pred.height());
    let mut proj_x = vec![0.0f64; w as usize];
    let mut proj_y = vec![0.0f64; h as usize];
    for y in 0..h {
        for x in 0..w {
            let p = pred.get(x, y);
            let px = &mut proj_x[x as usize];
            *px = px.max(p);
            let py = &mut proj_y[y as usize];
            *py = py.max(p);
        }
    }

    let box_x = axis_indicator(w, bbox.x_min, bbox.x_max);
    let box_y = axis_indicator(h, bbox.y_min, bbox.y_max);
    Ok((1.0 - soft_dice(&proj_x, &box_x)) + (1.0 - soft_dice(&proj_y, &box_y)))
}

/// Configuration of [`pairwise_loss`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PairwiseLossConfig {
    /// Color-similarity threshold; only pixel pairs at least this similar
    /// contribute to the loss.
    pub tau: f64,
    /// Edges connect pixels along the 8 compass directions at step sizes
    /// `1..=dilation`.
    pub dilation: u32,
    /// Bandwidth of the color kernel `exp(-||c_i - c_j|| / sigma)` on the
    /// 0-255 RGB scale.
    pub sigma: f64,
}

impl Default for PairwiseLossConfig {
    fn default() -> Self {
        Self { tau: 0.3, dilation: 2, sigma: 10.0 }
    }
}

impl PairwiseLossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::InvalidParameter(format!("tau {} outside [0, 1]", self.tau)));
        }
        if self.dilation == 0 {
            return Err(Error::InvalidParameter("dilation must be at least 1".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma {} must be positive", self.sigma)));
        }
        Ok(())
    }
}

/// Probability that pixels `i` and `j` carry the same label.
fn same_label_prob(pi: f64, pj: f64) -> f64 {
    pi * pj + (1.0 - pi) * (1.0 - pj)
}

/// Direction generators whose positive multiples enumerate each undirected
/// 8-neighborhood edge exactly once.
const EDGE_DIRECTIONS: [(i64, i64); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];

/// Color-driven pairwise smoothness loss. Pixel pairs along the 8 compass
/// directions at steps `1..=dilation` whose color similarity
/// `exp(-||c_i - c_j||_2 / sigma)` reaches `tau` are pulled toward carrying
/// the same label via `-ln(p_i p_j + (1-p_i)(1-p_j))`. Returns the mean over
/// contributing edges, or 0.0 when no edge qualifies.
pub fn pairwise_loss(img: &RgbRaster, pred: &SoftMask, cfg: &PairwiseLossConfig) -> Result<f64> {
    cfg.validate()?;
    if img.width() != pred.width() || img.height() != pred.height() {
        return Err(Error::DimensionMismatch {
            left_width: img.width(),
            left_height: img.height(),
            right_width: pred.width(),
            right_height: pred.height(),
        });
    }

    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut total = 0.0f64;
    let mut edges = 0u64;
    for y in 0..h {
        for x in 0..w {
            for (dx, dy) in EDGE_DIRECTIONS {
                for k in 1..=cfg.dilation as i64 {
                    let (nx, ny) = (x + dx * k, y + dy * k);
                    if nx < 0 || nx >= w || ny < 0 || ny >= h {
                        continue;
                    }
                    let ci = img.get(x as u32, y as u32);
                    let cj = img.get(nx as u32, ny as u32);
                    let dist = (0..3)
                        .map(|c| {
                            let d = ci[c] as f64 - cj[c] as f64;
                            d * d
                        })
                        .sum::<f64>()
                        .sqrt();
                    let similarity = (-dist / cfg.sigma).exp();
                    if similarity < cfg.tau {
                        continue;
                    }
                    let p = same_label_prob(
                        pred.get(x as u32, y as u32),
                        pred.get(nx as u32, ny as u32),
                    );
                    // p = 0 only for exactly contradictory hard labels; keep
                    // the sum finite rather than poisoning the mean.
                    total += -(p.max(1e-300)).ln();
                    edges += 1;
                }
            }
        }
    }
    if edges == 0 {
        return Ok(0.0);
    }
    Ok(total / edges as f64)
}
