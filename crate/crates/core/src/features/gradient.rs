//! Gradient-magnitude similarity with the 3x3 Scharr operator.

use super::filter::clamp_index;
use crate::error::Result;
use crate::image::Image;

/// Stabilizing constant of the gradient similarity.
pub const GM_CONSTANT: f64 = 160.0;

const SCHARR_SIDE: f64 = 3.0 / 16.0;
const SCHARR_MID: f64 = 10.0 / 16.0;

/// Per-pixel Scharr gradient magnitude, borders replicated.
pub fn scharr_magnitude(image: &Image) -> Vec<f64> {
    let (w, h) = (image.width(), image.height());
    let px = image.pixels();
    let at = |r: isize, c: isize| px[clamp_index(r, h) * w + clamp_index(c, w)];
    let mut out = Vec::with_capacity(w * h);
    for r in 0..h as isize {
        for c in 0..w as isize {
            let gx = SCHARR_SIDE * (at(r - 1, c - 1) - at(r - 1, c + 1))
                + SCHARR_MID * (at(r, c - 1) - at(r, c + 1))
                + SCHARR_SIDE * (at(r + 1, c - 1) - at(r + 1, c + 1));
            let gy = SCHARR_SIDE * (at(r - 1, c - 1) - at(r + 1, c - 1))
                + SCHARR_MID * (at(r - 1, c) - at(r + 1, c))
                + SCHARR_SIDE * (at(r - 1, c + 1) - at(r + 1, c + 1));
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    out
}

/// Mean over pixels of `(2 G G^ + T) / (G^2 + G^2^ + T)`.
pub fn gradient_similarity(reference: &Image, distorted: &Image) -> Result<f64> {
    reference.check_same_size(distorted)?;
    let g = scharr_magnitude(reference);
    let g_hat = scharr_magnitude(distorted);
    let sum: f64 = g
        .iter()
        .zip(&g_hat)
        .map(|(a, b)| (2.0 * a * b + GM_CONSTANT) / (a * a + b * b + GM_CONSTANT))
        .sum();
    Ok(sum / g.len() as f64)
}
