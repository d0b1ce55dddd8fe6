//! Geometric cutout augmentation: horizontal mirroring, uniform scaling,
//! in-plane rotation, and a small perspective tilt standing in for
//! out-of-plane rotation.
//!
//! All operations resample color bilinearly, re-binarize alpha at 0.5, and
//! re-crop tightly, so their outputs satisfy every [`Cutout`] invariant.
//! Sample coordinates within 1e-6 of a grid point snap onto it, which makes
//! identity parameters and exact right angles bit-exact rather than
//! approximately right.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::Cutout;
use crate::error::{Error, Result};

/// Rotation sampling range (degrees) used by the standard batch recipes.
pub const ROTATION_RANGE_DEG: (f64, f64) = (-45.0, 45.0);
/// Scale sampling range used by the standard batch recipes.
pub const SCALE_RANGE: (f64, f64) = (0.25, 0.6);
/// Default upper bound for sampled perspective tilt.
pub const PERSPECTIVE_TILT_MAX: f64 = 0.001;
/// Hard limit on perspective tilt accepted by [`perspective_warp`].
pub const TILT_LIMIT: f64 = 0.05;
/// Hard limit on rotation magnitude accepted by [`rotate_cutout`].
pub const ROTATION_LIMIT_DEG: f64 = 180.0;

/// Concrete augmentation values applied to one pasted instance.
///
/// Identity values (`rotation_deg = 0`, `scale = 1`, `perspective_tilt = 0`,
/// `flip_h = false`) mean "leave the cutout untouched"; [`Self::apply`] skips
/// those steps entirely so an identity application is bit-exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentParams {
    /// In-plane rotation in degrees, positive values turning the patch
    /// clockwise on screen; magnitude at most [`ROTATION_LIMIT_DEG`].
    pub rotation_deg: f64,
    /// Uniform scale factor, strictly positive.
    pub scale: f64,
    /// Perspective tilt in `[0, TILT_LIMIT]`; see [`perspective_warp`].
    pub perspective_tilt: f64,
    /// Mirror horizontally before the other steps.
    #[serde(default)]
    pub flip_h: bool,
}

impl AugmentParams {
    pub fn identity() -> Self {
        Self { rotation_deg: 0.0, scale: 1.0, perspective_tilt: 0.0, flip_h: false }
    }

    /// Validating constructor; the same checks are repeated by the individual
    /// operations, so a hand-built struct cannot corrupt anything either.
    pub fn new(rotation_deg: f64, scale: f64, perspective_tilt: f64, flip_h: bool) -> Result<Self> {
        validate_rotation(rotation_deg)?;
        validate_scale(scale)?;
        validate_tilt(perspective_tilt)?;
        Ok(Self { rotation_deg, scale, perspective_tilt, flip_h })
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// Applies flip, then scale, then rotation, then perspective, skipping
    /// steps whose parameter is the identity.
    pub fn apply(&self, cutout: &Cutout) -> Result<Cutout> {
        let mut out = if self.flip_h { flip_cutout(cutout) } else { cutout.clone() };
        if self.scale != 1.0 {
            out = scale_cutout(&out, self.scale)?;
        }
        if self.rotation_deg != 0.0 {
            out = rotate_cutout(&out, self.rotation_deg)?;
        }
        if self.perspective_tilt != 0.0 {
            out = perspective_warp(&out, self.perspective_tilt)?;
        }
        Ok(out)
    }
}

fn validate_rotation(deg: f64) -> Result<()> {
    if !deg.is_finite() || deg.abs() > ROTATION_LIMIT_DEG {
        return Err(Error::InvalidParameter(format!(
            "rotation {deg} degrees outside [-{ROTATION_LIMIT_DEG}, {ROTATION_LIMIT_DEG}]"
        )));
    }
    Ok(())
}

fn validate_scale(s: f64) -> Result<()> {
    if !s.is_finite() || s <= 0.0 {
        return Err(Error::InvalidParameter(format!("scale {s} must be positive")));
    }
    Ok(())
}

fn validate_tilt(tilt: f64) -> Result<()> {
    if !tilt.is_finite() || !(0.0..=TILT_LIMIT).contains(&tilt) {
        return Err(Error::InvalidParameter(format!(
            "perspective tilt {tilt} outside [0, {TILT_LIMIT}]"
        )));
    }
    Ok(())
}

/// Sampling bounds for [`AugmentParams`]. Defaults match the standard
/// synthesis recipes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentRanges {
    /// Inclusive rotation bounds in degrees.
    pub rotation_deg: (f64, f64),
    /// Inclusive scale bounds.
    pub scale: (f64, f64),
    /// Tilt is sampled uniformly from `[0, perspective_tilt_max]` whenever
    /// rotation is enabled (the tilt models the out-of-plane component of
    /// viewpoint change).
    pub perspective_tilt_max: f64,
}

impl Default for AugmentRanges {
    fn default() -> Self {
        Self {
            rotation_deg: ROTATION_RANGE_DEG,
            scale: SCALE_RANGE,
            perspective_tilt_max: PERSPECTIVE_TILT_MAX,
        }
    }
}

impl AugmentRanges {
    pub fn validate(&self) -> Result<()> {
        let (rlo, rhi) = self.rotation_deg;
        validate_rotation(rlo)?;
        validate_rotation(rhi)?;
        let (slo, shi) = self.scale;
        validate_scale(slo)?;
        validate_scale(shi)?;
        validate_tilt(self.perspective_tilt_max)?;
        if rlo > rhi || slo > shi {
            return Err(Error::InvalidParameter(
                "augmentation range lower bound exceeds upper bound".into(),
            ));
        }
        Ok(())
    }

    /// Draws parameters for one instance. Disabled dimensions keep their
    /// identity value and consume no randomness.
    pub fn sample(&self, rng: &mut impl Rng, use_rotation: bool, use_scale: bool) -> AugmentParams {
        let mut params = AugmentParams::identity();
        if use_rotation {
            params.rotation_deg = rng.random_range(self.rotation_deg.0..=self.rotation_deg.1);
            params.perspective_tilt = rng.random_range(0.0..=self.perspective_tilt_max);
        }
        if use_scale {
            params.scale = rng.random_range(self.scale.0..=self.scale.1);
        }
        params
    }
}

/// Mirrors the cutout left-to-right. Exact: no resampling involved.
pub fn flip_cutout(c: &Cutout) -> Cutout {
    let (w, h) = (c.width(), c.height());
    let mut rgba = Vec::with_capacity((w * h * 4) as usize);
    for y in 0..h {
        for x in (0..w).rev() {
            let [r, g, b] = c.color_at(x, y);
            rgba.extend_from_slice(&[r, g, b, if c.alpha_at(x, y) { 255 } else { 0 }]);
        }
    }
    Cutout::from_rgba(c.class_id().clone(), w, h, rgba, c.source_id()).expect("mirror of a valid cutout is valid")
}

/// Snaps values within 1e-6 of an integer onto it, killing float fuzz at
/// exact grid alignments (identity, right angles).
fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-6 {
        r
    } else {
        v
    }
}

/// Bilinear tap of a cutout in pixel-index coordinates (pixel `i` sits at
/// index `i`). Color clamps at the borders; alpha is zero outside, so the
/// object footprint never bleeds past its true extent.
fn sample_bilinear(c: &Cutout, gx: f64, gy: f64) -> ([f64; 3], f64) {
    let (w, h) = (c.width() as i64, c.height() as i64);
    let x0 = gx.floor() as i64;
    let y0 = gy.floor() as i64;
    let fx = gx - x0 as f64;
    let fy = gy - y0 as f64;
    let mut color = [0.0f64; 3];
    let mut alpha = 0.0f64;
    for (dx, dy, wgt) in [
        (0, 0, (1.0 - fx) * (1.0 - fy)),
        (1, 0, fx * (1.0 - fy)),
        (0, 1, (1.0 - fx) * fy),
        (1, 1, fx * fy),
    ] {
        if wgt == 0.0 {
            continue;
        }
        let (tx, ty) = (x0 + dx, y0 + dy);
        let (cx, cy) = (tx.clamp(0, w - 1) as u32, ty.clamp(0, h - 1) as u32);
        let rgb = c.color_at(cx, cy);
        for ch in 0..3 {
            color[ch] += wgt * rgb[ch] as f64;
        }
        let in_bounds = tx >= 0 && tx < w && ty >= 0 && ty < h;
        if in_bounds && c.alpha_at(tx as u32, ty as u32) {
            alpha += wgt;
        }
    }
    (color, alpha)
}

/// Resamples through `map`, which takes output pixel-center coordinates and
/// returns source pixel-center coordinates. Returns interleaved RGBA with
/// alpha binarized at 0.5.
fn resample(c: &Cutout, out_w: u32, out_h: u32, map: impl Fn(f64, f64) -> (f64, f64)) -> Vec<u8> {
    let mut rgba = Vec::with_capacity((out_w * out_h * 4) as usize);
    for oy in 0..out_h {
        for ox in 0..out_w {
            let (sx, sy) = map(ox as f64 + 0.5, oy as f64 + 0.5);
            let (gx, gy) = (snap(sx - 0.5), snap(sy - 0.5));
            let (color, alpha) = sample_bilinear(c, gx, gy);
            for ch in color {
                rgba.push(ch.round().clamp(0.0, 255.0) as u8);
            }
            rgba.push(if alpha >= 0.5 { 255 } else { 0 });
        }
    }
    rgba
}

/// Like [`resample`] but guaranteed to keep at least one opaque pixel:
/// degenerate cases (hairline shapes at extreme angles) fall back to
/// nearest-neighbor alpha, and finally to a single-pixel patch.
fn resample_nonempty(
    c: &Cutout,
    out_w: u32,
    out_h: u32,
    map: impl Fn(f64, f64) -> (f64, f64),
) -> Cutout {
    let rgba = resample(c, out_w, out_h, &map);
    match Cutout::from_rgba(c.class_id().clone(), out_w, out_h, rgba, c.source_id()) {
        Ok(out) => out,
        Err(_) => {
            // Nearest-neighbor alpha rescue.
            let mut rgba = resample(c, out_w, out_h, &map);
            for oy in 0..out_h {
                for ox in 0..out_w {
                    let (sx, sy) = map(ox as f64 + 0.5, oy as f64 + 0.5);
                    let (nx, ny) = ((sx - 0.5).round() as i64, (sy - 0.5).round() as i64);
                    let inside = nx >= 0
                        && nx < c.width() as i64
                        && ny >= 0
                        && ny < c.height() as i64
                        && c.alpha_at(nx as u32, ny as u32);
                    rgba[((oy * out_w + ox) * 4 + 3) as usize] = if inside { 255 } else { 0 };
                }
            }
            Cutout::from_rgba(c.class_id().clone(), out_w, out_h, rgba, c.source_id())
                .unwrap_or_else(|_| {
                    // Last resort: a single opaque pixel with the first
                    // opaque source color.
                    let (mut px, mut py) = (0, 0);
                    'scan: for y in 0..c.height() {
                        for x in 0..c.width() {
                            if c.alpha_at(x, y) {
                                (px, py) = (x, y);
                                break 'scan;
                            }
                        }
                    }
                    let [r, g, b] = c.color_at(px, py);
                    Cutout::from_rgba(c.class_id().clone(), 1, 1, vec![r, g, b, 255], c.source_id())
                        .expect("single opaque pixel is a valid cutout")
                })
        }
    }
}

/// Rotates the cutout by `deg` degrees about its center. The output canvas is
/// the tight box of the rotated footprint; right angles are exact pixel
/// permutations.
pub fn rotate_cutout(c: &Cutout, deg: f64) -> Result<Cutout> {
    validate_rotation(deg)?;
    if deg == 0.0 {
        return Ok(c.clone());
    }
    let rad = deg.to_radians();
    let (sin, cos) = (rad.sin(), rad.cos());
    let (w, h) = (c.width() as f64, c.height() as f64);
    // The 1e-9 bias stops float fuzz from inflating exact right angles by a
    // whole pixel.
    let out_w = (w * cos.abs() + h * sin.abs() - 1e-9).ceil().max(1.0) as u32;
    let out_h = (w * sin.abs() + h * cos.abs() - 1e-9).ceil().max(1.0) as u32;
    let (ocx, ocy) = (out_w as f64 / 2.0, out_h as f64 / 2.0);
    let (scx, scy) = (w / 2.0, h / 2.0);
    Ok(resample_nonempty(c, out_w, out_h, |x, y| {
        let (dx, dy) = (x - ocx, y - ocy);
        (cos * dx + sin * dy + scx, -sin * dx + cos * dy + scy)
    }))
}

/// Scales the cutout uniformly; the resampling grid is
/// `round(s*w) x round(s*h)` (half away from zero). Errors when either
/// dimension would fall below one pixel or the object vanishes entirely.
pub fn scale_cutout(c: &Cutout, s: f64) -> Result<Cutout> {
    validate_scale(s)?;
    if s == 1.0 {
        return Ok(c.clone());
    }
    let (w, h) = (c.width() as f64, c.height() as f64);
    let out_w = (s * w).round();
    let out_h = (s * h).round();
    if out_w < 1.0 || out_h < 1.0 {
        return Err(Error::ScaleCollapse { scale: s, width: c.width(), height: c.height() });
    }
    let (out_w, out_h) = (out_w as u32, out_h as u32);
    let (rx, ry) = (w / out_w as f64, h / out_h as f64);
    let rgba = resample(c, out_w, out_h, |x, y| (x * rx, y * ry));
    Cutout::from_rgba(c.class_id().clone(), out_w, out_h, rgba, c.source_id())
        .map_err(|_| Error::ScaleCollapse { scale: s, width: c.width(), height: c.height() })
}

/// Solves the homography sending each `from[i]` to `to[i]`. Returned as
/// `[a, b, c, d, e, f, g, h]` with
/// `(x, y) -> ((a x + b y + c) / (g x + h y + 1), (d x + e y + f) / (g x + h y + 1))`.
fn homography(from: [(f64, f64); 4], to: [(f64, f64); 4]) -> Option<[f64; 8]> {
    let mut m = [[0.0f64; 9]; 8];
    for i in 0..4 {
        let (x, y) = from[i];
        let (xp, yp) = to[i];
        m[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -x * xp, -y * xp, xp];
        m[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -x * yp, -y * yp, yp];
    }
    // Gauss-Jordan with partial pivoting.
    for col in 0..8 {
        let pivot = (col..8).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        let d = m[col][col];
        for j in col..9 {
            m[col][j] /= d;
        }
        for r in 0..8 {
            if r != col && m[r][col] != 0.0 {
                let f = m[r][col];
                for j in col..9 {
                    m[r][j] -= f * m[col][j];
                }
            }
        }
    }
    Some([m[0][8], m[1][8], m[2][8], m[3][8], m[4][8], m[5][8], m[6][8], m[7][8]])
}

fn apply_homography(h: &[f64; 8], x: f64, y: f64) -> (f64, f64) {
    let den = h[6] * x + h[7] * y + 1.0;
    ((h[0] * x + h[1] * y + h[2]) / den, (h[3] * x + h[4] * y + h[5]) / den)
}

/// Tips the patch backward: the two top corners move inward by
/// `tilt * width` each, shortening the top edge by `2 * tilt * width` while
/// the bottom edge stays put. `tilt` must lie in `[0, TILT_LIMIT]`; 0 is the
/// identity.
pub fn perspective_warp(c: &Cutout, tilt: f64) -> Result<Cutout> {
    validate_tilt(tilt)?;
    if tilt == 0.0 {
        return Ok(c.clone());
    }
    let (w, h) = (c.width() as f64, c.height() as f64);
    let inset = tilt * w;
    let src = [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)];
    let dst = [(inset, 0.0), (w - inset, 0.0), (w, h), (0.0, h)];
    let inverse = homography(dst, src).ok_or_else(|| {
        Error::InvalidParameter(format!("tilt {tilt} yields a singular perspective mapping"))
    })?;
    Ok(resample_nonempty(c, c.width(), c.height(), |x, y| apply_homography(&inverse, x, y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ClassId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cls() -> ClassId {
        ClassId::new(0, "test").unwrap()
    }

    /// Fully opaque rectangle with per-pixel distinct colors.
    fn solid(w: u32, h: u32) -> Cutout {
        let mut rgba = Vec::new();
        for y in 0..h {
            for x in 0..w {
                rgba.extend_from_slice(&[(x * 17 % 256) as u8, (y * 29 % 256) as u8, 128, 255]);
            }
        }
        Cutout::from_rgba(cls(), w, h, rgba, "solid").unwrap()
    }

    /// Opaque disc of the given radius on an odd-sized canvas.
    fn disc(radius: f64) -> Cutout {
        let r = radius.ceil() as u32;
        let size = 2 * r + 1;
        let mut rgba = Vec::new();
        for y in 0..size {
            for x in 0..size {
                let dx = x as f64 - r as f64;
                let dy = y as f64 - r as f64;
                let inside = (dx * dx + dy * dy).sqrt() <= radius;
                rgba.extend_from_slice(&[200, 80, 40, if inside { 255 } else { 0 }]);
            }
        }
        Cutout::from_rgba(cls(), size, size, rgba, "disc").unwrap()
    }

    #[test]
    fn zero_rotation_is_bit_exact() {
        let c = solid(7, 5);
        let r = rotate_cutout(&c, 0.0).unwrap();
        assert_eq!(r.rgba(), c.rgba());
    }

    #[test]
    fn quarter_turn_is_an_exact_pixel_permutation() {
        let c = solid(7, 4);
        let r = rotate_cutout(&c, 90.0).unwrap();
        assert_eq!((r.width(), r.height()), (4, 7));
        for y in 0..c.height() {
            for x in 0..c.width() {
                let (rx, ry) = (c.height() - 1 - y, x);
                assert_eq!(r.color_at(rx, ry), c.color_at(x, y), "at ({x},{y})");
                assert!(r.alpha_at(rx, ry));
            }
        }
    }

    #[test]
    fn half_turn_is_an_exact_pixel_permutation() {
        let c = solid(5, 3);
        let r = rotate_cutout(&c, 180.0).unwrap();
        assert_eq!((r.width(), r.height()), (5, 3));
        for y in 0..3 {
            for x in 0..5 {
                assert_eq!(r.color_at(4 - x, 2 - y), c.color_at(x, y));
            }
        }
    }

    #[test]
    fn diagonal_rotation_grows_the_canvas_as_expected() {
        // An 8x8 square turned 45 degrees becomes a diamond spanning
        // 8 * sqrt(2) ~ 11.3; binarizing the resampled alpha at 0.5 erodes
        // up to about a pixel of antialiased skirt per side.
        let c = solid(8, 8);
        let r = rotate_cutout(&c, 45.0).unwrap();
        assert!((9..=12).contains(&r.width()), "width {}", r.width());
        assert!((9..=12).contains(&r.height()), "height {}", r.height());
        // Rotation roughly preserves area: 64 pixels up to edge erosion.
        assert!((48..=72).contains(&r.alpha_count()), "area {}", r.alpha_count());
    }

    #[test]
    fn rotation_rejects_out_of_range_angles() {
        let c = solid(4, 4);
        assert!(rotate_cutout(&c, 180.1).is_err());
        assert!(rotate_cutout(&c, f64::NAN).is_err());
        assert!(rotate_cutout(&c, -181.0).is_err());
    }

    /// Bidirectional support comparison with one pixel of slack, aligning the
    /// two patches on their (tight) canvas centers.
    fn supports_match_within_1px(a: &Cutout, b: &Cutout) -> bool {
        let off_x = (a.width() as f64 - b.width() as f64) / 2.0;
        let off_y = (a.height() as f64 - b.height() as f64) / 2.0;
        let near = |dst: &Cutout, sx: u32, sy: u32, ox: f64, oy: f64| -> bool {
            let tx = (sx as f64 - ox).round() as i64;
            let ty = (sy as f64 - oy).round() as i64;
            for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    let (px, py) = (tx + dx, ty + dy);
                    if px >= 0
                        && py >= 0
                        && (px as u32) < dst.width()
                        && (py as u32) < dst.height()
                        && dst.alpha_at(px as u32, py as u32)
                    {
                        return true;
                    }
                }
            }
            false
        };
        for y in 0..a.height() {
            for x in 0..a.width() {
                if a.alpha_at(x, y) && !near(b, x, y, off_x, off_y) {
                    return false;
                }
            }
        }
        for y in 0..b.height() {
            for x in 0..b.width() {
                if b.alpha_at(x, y) && !near(a, x, y, -off_x, -off_y) {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn rotating_there_and_back_recovers_the_support() {
        for shape in [solid(12, 7), disc(5.3)] {
            for angle in [15.0, 30.0, 45.0] {
                let twisted = rotate_cutout(&shape, angle).unwrap();
                let back = rotate_cutout(&twisted, -angle).unwrap();
                assert!(
                    supports_match_within_1px(&shape, &back),
                    "support drifted after ±{angle}° on {}x{}",
                    shape.width(),
                    shape.height()
                );
            }
        }
    }

    #[test]
    fn scaling_follows_rounded_dimension_arithmetic() {
        let c = solid(10, 8);
        let s = scale_cutout(&c, 0.5).unwrap();
        assert_eq!((s.width(), s.height()), (5, 4));
        assert_eq!(s.alpha_count(), 20);

        let tiny = scale_cutout(&solid(4, 4), 0.25).unwrap();
        assert_eq!((tiny.width(), tiny.height()), (1, 1));
        assert!(tiny.alpha_at(0, 0));
    }

    #[test]
    fn scale_identity_is_bit_exact() {
        let c = solid(9, 3);
        assert_eq!(scale_cutout(&c, 1.0).unwrap().rgba(), c.rgba());
    }

    #[test]
    fn vanishing_scales_error() {
        assert!(matches!(
            scale_cutout(&solid(2, 2), 0.2),
            Err(Error::ScaleCollapse { .. })
        ));
        assert!(scale_cutout(&solid(2, 2), -1.0).is_err());
        assert!(scale_cutout(&solid(2, 2), 0.0).is_err());
    }

    #[test]
    fn zero_tilt_is_bit_exact() {
        let c = solid(8, 6);
        assert_eq!(perspective_warp(&c, 0.0).unwrap().rgba(), c.rgba());
    }

    #[test]
    fn tilt_shortens_the_top_edge_symmetrically() {
        let c = solid(40, 20);
        let warped = perspective_warp(&c, 0.05).unwrap();
        let row_width = |cut: &Cutout, y: u32| {
            (0..cut.width()).filter(|&x| cut.alpha_at(x, y)).count() as i64
        };
        let top = row_width(&warped, 0);
        let bottom = row_width(&warped, warped.height() - 1);
        // Top shrinks by 2 * tilt * width = 4 pixels, within rasterization slack.
        assert!((bottom - top - 4).abs() <= 1, "top {top}, bottom {bottom}");
        assert!((bottom - 40i64).abs() <= 1, "bottom {bottom}");
    }

    #[test]
    fn tilt_monotonically_shrinks_convex_areas() {
        let c = solid(30, 18);
        let mut last = u64::MAX;
        for step in 0..=5 {
            let tilt = step as f64 * 0.01;
            let area = perspective_warp(&c, tilt).unwrap().alpha_count();
            assert!(area <= last, "area grew from {last} to {area} at tilt {tilt}");
            last = area;
        }
    }

    #[test]
    fn tilt_outside_limits_errors() {
        let c = solid(8, 8);
        assert!(perspective_warp(&c, -0.01).is_err());
        assert!(perspective_warp(&c, 0.06).is_err());
    }

    #[test]
    fn flip_mirrors_exactly_twice_to_identity() {
        let c = solid(6, 4);
        let f = flip_cutout(&c);
        assert_eq!(f.color_at(0, 1), c.color_at(5, 1));
        assert_eq!(flip_cutout(&f).rgba(), c.rgba());
    }

    #[test]
    fn identity_params_apply_bit_exactly() {
        let c = disc(4.2);
        let out = AugmentParams::identity().apply(&c).unwrap();
        assert_eq!(out.rgba(), c.rgba());
        assert_eq!((out.width(), out.height()), (c.width(), c.height()));
    }

    #[test]
    fn params_validation_rejects_out_of_domain_values() {
        assert!(AugmentParams::new(190.0, 1.0, 0.0, false).is_err());
        assert!(AugmentParams::new(0.0, 0.0, 0.0, false).is_err());
        assert!(AugmentParams::new(0.0, 1.0, 0.1, false).is_err());
        assert!(AugmentParams::new(-45.0, 0.25, 0.001, true).is_ok());
    }

    #[test]
    fn ranges_validate_and_sample_within_bounds() {
        let ranges = AugmentRanges::default();
        ranges.validate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2000 {
            let p = ranges.sample(&mut rng, true, true);
            assert!((ROTATION_RANGE_DEG.0..=ROTATION_RANGE_DEG.1).contains(&p.rotation_deg));
            assert!((SCALE_RANGE.0..=SCALE_RANGE.1).contains(&p.scale));
            assert!((0.0..=PERSPECTIVE_TILT_MAX).contains(&p.perspective_tilt));
            assert!(!p.flip_h);
        }
        let p = ranges.sample(&mut rng, false, false);
        assert!(p.is_identity());

        let bad = AugmentRanges { scale: (0.6, 0.25), ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn transformed_cutouts_stay_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ranges = AugmentRanges { perspective_tilt_max: 0.03, ..Default::default() };
        for _ in 0..40 {
            let p = ranges.sample(&mut rng, true, true);
            let out = p.apply(&disc(6.1)).unwrap();
            let touches_all_edges = (0..out.width()).any(|x| out.alpha_at(x, 0))
                && (0..out.width()).any(|x| out.alpha_at(x, out.height() - 1))
                && (0..out.height()).any(|y| out.alpha_at(0, y))
                && (0..out.height()).any(|y| out.alpha_at(out.width() - 1, y));
            assert!(touches_all_edges, "loose crop after {p:?}");
        }
    }
}
