//! Sliding-window structural statistics: SSIM components and UQI.

use serde::{Deserialize, Serialize};

use super::Measurement;
use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimConfig {
    pub window: usize,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        let c2 = (0.03f64 * 255.0).powi(2);
        SsimConfig {
            window: 8,
            c1: (0.01f64 * 255.0).powi(2),
            c2,
            c3: c2 / 2.0,
        }
    }
}

/// First and second moments of one window pair (population statistics).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub mu_x: f64,
    pub mu_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov: f64,
}

/// Statistics for every `window x window` position with unit stride, in
/// row-major window order.
pub fn window_stats(x: &Image, y: &Image, window: usize) -> Result<Vec<WindowStats>> {
    x.check_same_size(y)?;
    let (w, h) = (x.width(), x.height());
    if window == 0 || w < window || h < window {
        return Err(Error::TooSmall {
            what: "sliding window",
            width: w,
            height: h,
            min: window.max(1),
        });
    }
    // shift by a common offset to keep the second-moment cancellation small
    let shift = (x.pixels().iter().sum::<f64>() + y.pixels().iter().sum::<f64>()) / (2 * x.len()) as f64;
    let xs: Vec<f64> = x.pixels().iter().map(|v| v - shift).collect();
    let ys: Vec<f64> = y.pixels().iter().map(|v| v - shift).collect();
    let xx: Vec<f64> = xs.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = ys.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = xs.iter().zip(&ys).map(|(a, b)| a * b).collect();
    let sx = box_sums(&xs, w, h, window);
    let sy = box_sums(&ys, w, h, window);
    let sxx = box_sums(&xx, w, h, window);
    let syy = box_sums(&yy, w, h, window);
    let sxy = box_sums(&xy, w, h, window);
    let n = (window * window) as f64;
    Ok((0..sx.len())
        .map(|i| {
            let mx = sx[i] / n;
            let my = sy[i] / n;
            WindowStats {
                mu_x: mx + shift,
                mu_y: my + shift,
                var_x: (sxx[i] / n - mx * mx).max(0.0),
                var_y: (syy[i] / n - my * my).max(0.0),
                cov: sxy[i] / n - mx * my,
            }
        })
        .collect())
}

/// Direct separable window sums: rows first, then columns.
fn box_sums(data: &[f64], w: usize, h: usize, win: usize) -> Vec<f64> {
    let ow = w - win + 1;
    let oh = h - win + 1;
    let mut rows = vec![0.0; h * ow];
    for r in 0..h {
        let row = &data[r * w..(r + 1) * w];
        for c in 0..ow {
            rows[r * ow + c] = row[c..c + win].iter().sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            let mut acc = 0.0;
            for k in 0..win {
                acc += rows[(r + k) * ow + c];
            }
            out[r * ow + c] = acc;
        }
    }
    out
}

/// Mean-pooled luminance, contrast and structure terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimComponents {
    pub luminance: f64,
    pub contrast: f64,
    pub structure: f64,
    /// Mean over windows of the product of the three terms.
    pub index: f64,
}

pub fn ssim_components(reference: &Image, distorted: &Image, config: &SsimConfig) -> Result<SsimComponents> {
    let stats = window_stats(reference, distorted, config.window)?;
    let (mut l_sum, mut c_sum, mut s_sum, mut i_sum) = (0.0, 0.0, 0.0, 0.0);
    for s in &stats {
        let sd_x = s.var_x.sqrt();
        let sd_y = s.var_y.sqrt();
        let l = (2.0 * s.mu_x * s.mu_y + config.c1) / (s.mu_x * s.mu_x + s.mu_y * s.mu_y + config.c1);
        let c = (2.0 * sd_x * sd_y + config.c2) / (s.var_x + s.var_y + config.c2);
        let st = (s.cov + config.c3) / (sd_x * sd_y + config.c3);
        l_sum += l;
        c_sum += c;
        s_sum += st;
        i_sum += l * c * st;
    }
    let n = stats.len() as f64;
    Ok(SsimComponents {
        luminance: l_sum / n,
        contrast: c_sum / n,
        structure: s_sum / n,
        index: i_sum / n,
    })
}

pub fn ssim_index(reference: &Image, distorted: &Image, config: &SsimConfig) -> Result<f64> {
    Ok(ssim_components(reference, distorted, config)?.index)
}

/// Windows whose combined variance or combined squared mean falls below this
/// are treated as zero-denominator windows.
pub const UQI_DEGENERATE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UqiOutcome {
    pub measurement: Measurement,
    pub windows: usize,
    pub skipped: usize,
}

/// Universal quality index, mean over non-degenerate windows. When every
/// window is degenerate the value is 0 with the degenerate flag.
pub fn uqi_detailed(reference: &Image, distorted: &Image, window: usize) -> Result<UqiOutcome> {
    let stats = window_stats(reference, distorted, window)?;
    let mut sum = 0.0;
    let mut used = 0usize;
    for s in &stats {
        let var_sum = s.var_x + s.var_y;
        let mu_sq = s.mu_x * s.mu_x + s.mu_y * s.mu_y;
        if var_sum <= UQI_DEGENERATE_EPS || mu_sq <= UQI_DEGENERATE_EPS {
            continue;
        }
        // correlation * luminance * contrast, with sigma_x sigma_y cancelled
        sum += 4.0 * s.cov * s.mu_x * s.mu_y / (var_sum * mu_sq);
        used += 1;
    }
    let measurement = if used == 0 {
        Measurement::degenerate(0.0)
    } else {
        Measurement::ok(sum / used as f64)
    };
    Ok(UqiOutcome {
        measurement,
        windows: stats.len(),
        skipped: stats.len() - used,
    })
}

pub fn uqi(reference: &Image, distorted: &Image, window: usize) -> Result<Measurement> {
    Ok(uqi_detailed(reference, distorted, window)?.measurement)
}
