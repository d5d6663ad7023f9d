//! Pixel-difference features: PSNR, maximum difference, MAE and the
//! modified infinity norm.

use super::Measurement;
use crate::error::{Error, Result};
use crate::image::Image;

/// PSNR returned when the images are identical.
pub const DEFAULT_PSNR_CAP: f64 = 100.0;

pub fn mse(reference: &Image, distorted: &Image) -> Result<f64> {
    reference.check_same_size(distorted)?;
    let sum: f64 = reference
        .pixels()
        .iter()
        .zip(distorted.pixels())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / reference.len() as f64)
}

/// Peak signal-to-noise ratio in dB for 8-bit range. Zero MSE maps to `cap`
/// with the degenerate flag set.
pub fn psnr(reference: &Image, distorted: &Image, cap: f64) -> Result<Measurement> {
    let m = mse(reference, distorted)?;
    if m == 0.0 {
        return Ok(Measurement::degenerate(cap));
    }
    Ok(Measurement::ok((10.0 * (255.0 * 255.0 / m).log10()).min(cap)))
}

pub fn max_difference(reference: &Image, distorted: &Image) -> Result<f64> {
    reference.check_same_size(distorted)?;
    Ok(reference
        .pixels()
        .iter()
        .zip(distorted.pixels())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

pub fn mae(reference: &Image, distorted: &Image) -> Result<f64> {
    reference.check_same_size(distorted)?;
    let sum: f64 = reference
        .pixels()
        .iter()
        .zip(distorted.pixels())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(sum / reference.len() as f64)
}

/// RMS of the `ceil(fraction * N)` largest absolute deviations.
pub fn min_norm(reference: &Image, distorted: &Image, fraction: f64) -> Result<f64> {
    reference.check_same_size(distorted)?;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "MIN fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let mut dev: Vec<f64> = reference
        .pixels()
        .iter()
        .zip(distorted.pixels())
        .map(|(a, b)| (a - b).abs())
        .collect();
    let n = dev.len();
    let r = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    if r < n {
        // partition so the r largest sit in front
        dev.select_nth_unstable_by(r - 1, |a, b| b.total_cmp(a));
    }
    let sum: f64 = dev[..r].iter().map(|d| d * d).sum();
    Ok((sum / r as f64).sqrt())
}
