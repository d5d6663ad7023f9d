//! Multi-scale edge stability (ESMSE) and Pratt's figure of merit.
//!
//! Edge maps are Canny-style: derivative-of-Gaussian gradient, non-maximum
//! suppression along the quantized gradient direction, then a single
//! threshold derived from the range of the gradient norm at that scale.

use serde::{Deserialize, Serialize};

use super::filter::{filter_cols, filter_rows, gaussian, gaussian_derivative};
use super::Measurement;
use crate::error::{Error, Result};
use crate::image::Image;

/// How the per-scale threshold `T` is derived from the gradient-norm range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// `T = 0.1 (C_max - C_min) + C_min`.
    #[default]
    AboveMin,
    /// `T = 0.1 (C_max - C_min) + C_max`, which never fires; kept for comparison.
    AboveMax,
}

impl ThresholdRule {
    pub fn threshold(self, c_min: f64, c_max: f64) -> f64 {
        let span = 0.1 * (c_max - c_min);
        match self {
            ThresholdRule::AboveMin => span + c_min,
            ThresholdRule::AboveMax => span + c_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeConfig {
    /// Strictly increasing Gaussian scales.
    pub sigmas: Vec<f64>,
    pub threshold: ThresholdRule,
    /// Pratt scaling constant.
    pub pratt_a: f64,
}

impl Default for EdgeConfig {
    fn default() -> Self {
        EdgeConfig {
            sigmas: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            threshold: ThresholdRule::AboveMin,
            pratt_a: 0.8,
        }
    }
}

impl EdgeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigmas.is_empty() || self.sigmas.len() > u8::MAX as usize {
            return Err(Error::InvalidParameter("edge scale set must be non-empty".into()));
        }
        if self.sigmas.iter().any(|s| !(s.is_finite() && *s > 0.0))
            || self.sigmas.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidParameter(format!(
                "edge scales must be positive and strictly increasing: {:?}",
                self.sigmas
            )));
        }
        if !(self.pratt_a.is_finite() && self.pratt_a > 0.0) {
            return Err(Error::InvalidParameter("pratt constant must be > 0".into()));
        }
        Ok(())
    }

    /// Scale used for the single-scale Pratt edge maps.
    pub fn median_sigma(&self) -> f64 {
        self.sigmas[self.sigmas.len() / 2]
    }
}

/// Derivative-of-Gaussian gradient components `(gx, gy)`.
pub fn gradient(image: &Image, sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (image.width(), image.height());
    let g = gaussian(sigma);
    let dg = gaussian_derivative(sigma);
    let gx = filter_cols(&filter_rows(image.pixels(), w, h, &dg), w, h, &g);
    let gy = filter_cols(&filter_rows(image.pixels(), w, h, &g), w, h, &dg);
    (gx, gy)
}

const TAN_22_5: f64 = 0.414_213_562_373_095_1;
const TAN_67_5: f64 = 2.414_213_562_373_095;

/// Binary edge map at one scale.
pub fn edge_map(image: &Image, sigma: f64, rule: ThresholdRule) -> Vec<bool> {
    let (w, h) = (image.width(), image.height());
    let (gx, gy) = gradient(image, sigma);
    let mag: Vec<f64> = gx.iter().zip(&gy).map(|(x, y)| x.hypot(*y)).collect();
    let (c_min, c_max) = mag
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &m| (lo.min(m), hi.max(m)));
    let t = rule.threshold(c_min, c_max);
    let at = |r: isize, c: isize| -> f64 {
        if r < 0 || c < 0 || r >= h as isize || c >= w as isize {
            0.0
        } else {
            mag[r as usize * w + c as usize]
        }
    };
    let mut edges = vec![false; w * h];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            let m = mag[i];
            if m <= t {
                continue;
            }
            let (ax, ay) = (gx[i].abs(), gy[i].abs());
            let (dr, dc): (isize, isize) = if ay <= TAN_22_5 * ax {
                (0, 1)
            } else if ay >= TAN_67_5 * ax {
                (1, 0)
            } else if gx[i] * gy[i] > 0.0 {
                (1, 1)
            } else {
                (1, -1)
            };
            let (ri, ci) = (r as isize, c as isize);
            let prev = at(ri - dr, ci - dc);
            let next = at(ri + dr, ci + dc);
            edges[i] = m >= prev && m > next;
        }
    }
    edges
}

/// Per-pixel longest run of consecutive scales at which the pixel is an edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeStabilityMap {
    pub width: usize,
    pub height: usize,
    pub scales: usize,
    pub stability: Vec<u8>,
}

impl EdgeStabilityMap {
    pub fn compute(image: &Image, config: &EdgeConfig) -> Result<Self> {
        config.validate()?;
        let maps: Vec<Vec<bool>> = config
            .sigmas
            .iter()
            .map(|&s| edge_map(image, s, config.threshold))
            .collect();
        let n = image.len();
        let mut stability = vec![0u8; n];
        for (i, out) in stability.iter_mut().enumerate() {
            let (mut run, mut best) = (0u8, 0u8);
            for m in &maps {
                if m[i] {
                    run += 1;
                    best = best.max(run);
                } else {
                    run = 0;
                }
            }
            *out = best;
        }
        Ok(EdgeStabilityMap {
            width: image.width(),
            height: image.height(),
            scales: maps.len(),
            stability,
        })
    }
}

/// Mean squared difference of edge stability over the reference's edge pixels.
/// A reference with no edge pixels gives 0, flagged degenerate.
pub fn esmse(reference: &Image, distorted: &Image, config: &EdgeConfig) -> Result<Measurement> {
    reference.check_same_size(distorted)?;
    let q = EdgeStabilityMap::compute(reference, config)?;
    let q_hat = EdgeStabilityMap::compute(distorted, config)?;
    let mut n_d = 0usize;
    let mut acc = 0.0;
    for (&a, &b) in q.stability.iter().zip(&q_hat.stability) {
        if a > 0 {
            n_d += 1;
            let d = a as f64 - b as f64;
            acc += d * d;
        }
    }
    if n_d == 0 {
        return Ok(Measurement::degenerate(0.0));
    }
    Ok(Measurement::ok(acc / n_d as f64))
}

/// Pratt's figure of merit from given edge maps; `truth` is the reference.
pub fn pratt_from_edges(
    width: usize,
    height: usize,
    truth: &[bool],
    detected: &[bool],
    a: f64,
) -> Measurement {
    let n_t = truth.iter().filter(|&&e| e).count();
    let n_d = detected.iter().filter(|&&e| e).count();
    match (n_t, n_d) {
        (0, 0) => return Measurement::degenerate(1.0),
        (0, _) | (_, 0) => return Measurement::ok(0.0),
        _ => {}
    }
    let dist2 = squared_distance_transform(width, height, truth);
    let sum: f64 = detected
        .iter()
        .zip(&dist2)
        .filter(|(&e, _)| e)
        .map(|(_, &d2)| 1.0 / (1.0 + a * d2))
        .sum();
    Measurement::ok(sum / n_t.max(n_d) as f64)
}

pub fn pratt(reference: &Image, distorted: &Image, config: &EdgeConfig) -> Result<Measurement> {
    reference.check_same_size(distorted)?;
    config.validate()?;
    let sigma = config.median_sigma();
    let truth = edge_map(reference, sigma, config.threshold);
    let detected = edge_map(distorted, sigma, config.threshold);
    Ok(pratt_from_edges(
        reference.width(),
        reference.height(),
        &truth,
        &detected,
        config.pratt_a,
    ))
}

/// Exact squared Euclidean distance to the nearest `true` pixel
/// (Felzenszwalb & Huttenlocher lower-envelope transform, rows then columns).
pub fn squared_distance_transform(width: usize, height: usize, sites: &[bool]) -> Vec<f64> {
    let inf = 1e20;
    let mut grid: Vec<f64> = sites.iter().map(|&s| if s { 0.0 } else { inf }).collect();
    let mut f = vec![0.0; width.max(height)];
    let mut out = vec![0.0; width.max(height)];
    for c in 0..width {
        for r in 0..height {
            f[r] = grid[r * width + c];
        }
        envelope_1d(&f[..height], &mut out[..height]);
        for r in 0..height {
            grid[r * width + c] = out[r];
        }
    }
    for r in 0..height {
        f[..width].copy_from_slice(&grid[r * width..(r + 1) * width]);
        envelope_1d(&f[..width], &mut out[..width]);
        grid[r * width..(r + 1) * width].copy_from_slice(&out[..width]);
    }
    grid
}

fn envelope_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let parabola_cut = |q: usize, p: usize| {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64))
    };
    for q in 1..n {
        let mut s = parabola_cut(q, v[k]);
        // z[0] = -inf stops the walk at k = 0
        while s <= z[k] {
            k -= 1;
            s = parabola_cut(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0usize;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}
