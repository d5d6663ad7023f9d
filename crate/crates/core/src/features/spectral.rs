//! DCT-domain HVS-weighted error and zero-crossing rate.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

/// Radial band-pass response `H(rho)` applied to the orthonormal DCT
/// spectrum, `rho` in cycles per degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DctBandpassFilter {
    /// `H(rho) = 2.6 (0.0192 + 0.114 rho) exp(-(0.114 rho)^1.1)`.
    MannosSakrison { pixels_per_degree: f64 },
    AllPass,
    /// Piecewise-linear response through `(rho[i], gain[i])`, held constant
    /// beyond the end points.
    Tabulated {
        pixels_per_degree: f64,
        rho: Vec<f64>,
        gain: Vec<f64>,
    },
}

impl Default for DctBandpassFilter {
    fn default() -> Self {
        DctBandpassFilter::MannosSakrison {
            pixels_per_degree: 32.0,
        }
    }
}

impl DctBandpassFilter {
    pub fn validate(&self) -> Result<()> {
        let ppd_ok = |p: f64| p.is_finite() && p > 0.0;
        match self {
            DctBandpassFilter::MannosSakrison { pixels_per_degree } if !ppd_ok(*pixels_per_degree) => {
                Err(Error::InvalidParameter("pixels_per_degree must be > 0".into()))
            }
            DctBandpassFilter::Tabulated {
                pixels_per_degree,
                rho,
                gain,
            } => {
                if !ppd_ok(*pixels_per_degree) {
                    return Err(Error::InvalidParameter("pixels_per_degree must be > 0".into()));
                }
                if rho.is_empty() || rho.len() != gain.len() {
                    return Err(Error::InvalidParameter(
                        "tabulated filter needs equal-length, non-empty rho and gain".into(),
                    ));
                }
                if rho.windows(2).any(|w| w[1] <= w[0]) || rho.iter().any(|r| !r.is_finite()) {
                    return Err(Error::InvalidParameter("tabulated rho must be increasing".into()));
                }
                if gain.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
                    return Err(Error::InvalidParameter(
                        "tabulated gain must be finite and non-negative".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn pixels_per_degree(&self) -> f64 {
        match self {
            DctBandpassFilter::MannosSakrison { pixels_per_degree }
            | DctBandpassFilter::Tabulated {
                pixels_per_degree, ..
            } => *pixels_per_degree,
            DctBandpassFilter::AllPass => 1.0,
        }
    }

    /// Response at radial frequency `rho` (cycles/degree).
    pub fn response(&self, rho: f64) -> f64 {
        match self {
            DctBandpassFilter::MannosSakrison { .. } => {
                2.6 * (0.0192 + 0.114 * rho) * (-(0.114 * rho).powf(1.1)).exp()
            }
            DctBandpassFilter::AllPass => 1.0,
            DctBandpassFilter::Tabulated { rho: xs, gain, .. } => {
                if rho <= xs[0] {
                    return gain[0];
                }
                let last = xs.len() - 1;
                if rho >= xs[last] {
                    return gain[last];
                }
                let j = xs.partition_point(|&x| x <= rho);
                let t = (rho - xs[j - 1]) / (xs[j] - xs[j - 1]);
                gain[j - 1] + t * (gain[j] - gain[j - 1])
            }
        }
    }

    /// Radial frequency of DCT coefficient `(u, v)` (column, row) of a
    /// `width x height` transform. Index `k` of an `n`-point DCT-II sits at
    /// `k / 2n` cycles per pixel.
    pub fn rho(&self, u: usize, v: usize, width: usize, height: usize) -> f64 {
        let ppd = self.pixels_per_degree();
        let fu = u as f64 / (2.0 * width as f64);
        let fv = v as f64 / (2.0 * height as f64);
        ppd * fu.hypot(fv)
    }

    /// Filter sampled on the full `height x width` DCT grid, row-major.
    pub fn grid(&self, width: usize, height: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                out.push(self.response(self.rho(u, v, width, height)));
            }
        }
        out
    }
}

/// Orthonormal 1-D DCT-II through an `n`-point complex FFT (even/odd reordering).
struct Dct1d {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    twiddle: Vec<Complex64>,
}

impl Dct1d {
    fn new(planner: &mut FftPlanner<f64>, n: usize) -> Self {
        let scale0 = (1.0 / n as f64).sqrt();
        let scale = (2.0 / n as f64).sqrt();
        let twiddle = (0..n)
            .map(|k| {
                let s = if k == 0 { scale0 } else { scale };
                let angle = -std::f64::consts::PI * k as f64 / (2.0 * n as f64);
                Complex64::from_polar(s, angle)
            })
            .collect();
        Dct1d {
            n,
            fft: planner.plan_fft_forward(n),
            twiddle,
        }
    }

    fn apply(&self, input: &[f64], buf: &mut [Complex64], out: &mut [f64]) {
        let n = self.n;
        for i in 0..n.div_ceil(2) {
            buf[i] = Complex64::new(input[2 * i], 0.0);
        }
        for i in 0..n / 2 {
            buf[n - 1 - i] = Complex64::new(input[2 * i + 1], 0.0);
        }
        self.fft.process(buf);
        for k in 0..n {
            out[k] = (buf[k] * self.twiddle[k]).re;
        }
    }
}

/// Orthonormal 2-D DCT-II of a row-major `height x width` array.
pub fn dct2(data: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut planner = FftPlanner::new();
    let row_dct = Dct1d::new(&mut planner, width);
    let col_dct = Dct1d::new(&mut planner, height);
    let mut tmp = vec![0.0; width * height];
    let mut buf = vec![Complex64::default(); width.max(height)];
    for r in 0..height {
        row_dct.apply(
            &data[r * width..(r + 1) * width],
            &mut buf[..width],
            &mut tmp[r * width..(r + 1) * width],
        );
    }
    let mut out = vec![0.0; width * height];
    let mut col = vec![0.0; height];
    let mut col_out = vec![0.0; height];
    for c in 0..width {
        for r in 0..height {
            col[r] = tmp[r * width + c];
        }
        col_dct.apply(&col, &mut buf[..height], &mut col_out);
        for r in 0..height {
            out[r * width + c] = col_out[r];
        }
    }
    out
}

/// HVS-weighted RMS error: RMS of the difference between the band-passed
/// images. Because the DCT is orthonormal and the filter is linear, this is
/// evaluated directly in the transform domain on the difference image.
pub fn hvs_mse(reference: &Image, distorted: &Image, filter: &DctBandpassFilter) -> Result<f64> {
    reference.check_same_size(distorted)?;
    filter.validate()?;
    let (w, h) = (reference.width(), reference.height());
    let diff: Vec<f64> = reference
        .pixels()
        .iter()
        .zip(distorted.pixels())
        .map(|(a, b)| a - b)
        .collect();
    let spectrum = dct2(&diff, w, h);
    let gains = filter.grid(w, h);
    let energy: f64 = spectrum
        .iter()
        .zip(&gains)
        .map(|(s, g)| {
            let v = s * g;
            v * v
        })
        .sum();
    Ok((energy / (w * h) as f64).sqrt())
}

/// Mean of the horizontal and vertical zero-crossing rates of the first
/// differences of `image`.
pub fn zcr(image: &Image) -> Result<f64> {
    let (w, h) = (image.width(), image.height());
    if w < 3 || h < 3 {
        return Err(Error::TooSmall {
            what: "zero-crossing rate",
            width: w,
            height: h,
            min: 3,
        });
    }
    let px = image.pixels();
    let mut hz = 0usize;
    for r in 0..h {
        let row = &px[r * w..(r + 1) * w];
        for c in 0..w - 2 {
            let d0 = row[c + 1] - row[c];
            let d1 = row[c + 2] - row[c + 1];
            if d0 * d1 < 0.0 {
                hz += 1;
            }
        }
    }
    let mut vz = 0usize;
    for c in 0..w {
        for r in 0..h - 2 {
            let d0 = px[(r + 1) * w + c] - px[r * w + c];
            let d1 = px[(r + 2) * w + c] - px[(r + 1) * w + c];
            if d0 * d1 < 0.0 {
                vz += 1;
            }
        }
    }
    let zh = hz as f64 / (h * (w - 2)) as f64;
    let zv = vz as f64 / (w * (h - 2)) as f64;
    Ok((zh + zv) / 2.0)
}
