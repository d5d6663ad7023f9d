//! Mean angle similarity between color pixel vectors.

use serde::{Deserialize, Serialize};

use super::Measurement;
use crate::error::Result;
use crate::image::ColorImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MasNormalization {
    /// Divide the angle sum by the number of counted pixels; result in `[0, 1]`.
    #[default]
    PerPixel,
    /// Divide by the squared pixel count, as printed in the source formula.
    Squared,
}

/// Angle between two 3-vectors, computed as `atan2(|a x b|, a . b)` so that
/// parallel vectors give exactly zero.
pub fn vector_angle(a: [f64; 3], b: [f64; 3]) -> f64 {
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let cross_norm = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    cross_norm.atan2(dot)
}

/// `1 - norm * sum (2/pi) angle(C, C^)` over pixels where both vectors are
/// non-zero. No counted pixel gives 0 with the degenerate flag.
pub fn mas(reference: &ColorImage, distorted: &ColorImage, normalization: MasNormalization) -> Result<Measurement> {
    reference.check_same_size(distorted)?;
    let n_px = reference.width() * reference.height();
    let mut sum = 0.0;
    let mut counted = 0usize;
    for i in 0..n_px {
        let a = reference.pixel(i);
        let b = distorted.pixel(i);
        if a.iter().all(|&v| v == 0.0) || b.iter().all(|&v| v == 0.0) {
            continue;
        }
        sum += std::f64::consts::FRAC_2_PI * vector_angle(a, b);
        counted += 1;
    }
    if counted == 0 {
        return Ok(Measurement::degenerate(0.0));
    }
    let n = counted as f64;
    let denom = match normalization {
        MasNormalization::PerPixel => n,
        MasNormalization::Squared => n * n,
    };
    Ok(Measurement::ok(1.0 - sum / denom))
}
