//! Phase congruency from a log-Gabor filter bank, and the PC similarity
//! pooled with `max(PC, PC^)` weights.
//!
//! The bank is built in the frequency domain on the FFT grid: radial
//! log-Gaussian per scale, Gaussian angular spread per orientation, a
//! Butterworth low-pass to suppress corner frequencies. Noise compensation
//! estimates the noise energy from the median response of the smallest
//! scale and assumes Rayleigh-distributed amplitudes.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::Measurement;
use crate::error::{Error, Result};
use crate::image::Image;

/// Smallest side accepted by the filter bank.
pub const MIN_PC_SIDE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCongruencyConfig {
    pub scales: usize,
    pub orientations: usize,
    pub min_wavelength: f64,
    pub mult: f64,
    pub sigma_on_f: f64,
    pub d_theta_on_sigma: f64,
    /// Standard deviations of noise energy above the mean to reject.
    pub noise_k: f64,
    pub epsilon: f64,
    pub lowpass_cutoff: f64,
    pub lowpass_order: u32,
    /// Stabilizing constant of the PC similarity.
    pub similarity_t: f64,
}

impl Default for PhaseCongruencyConfig {
    fn default() -> Self {
        PhaseCongruencyConfig {
            scales: 4,
            orientations: 4,
            min_wavelength: 6.0,
            mult: 2.0,
            sigma_on_f: 0.55,
            d_theta_on_sigma: 1.2,
            noise_k: 2.0,
            epsilon: 1e-4,
            lowpass_cutoff: 0.45,
            lowpass_order: 15,
            similarity_t: 0.85,
        }
    }
}

/// Normalized frequency of FFT bin `k` of an `n`-point transform, matching
/// the `ifftshift`-ed ramp: `/n` for even `n`, `/(n-1)` for odd `n`.
pub fn fft_frequency(k: usize, n: usize) -> f64 {
    if n % 2 == 0 {
        let s = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        s / n as f64
    } else {
        let half = (n - 1) / 2;
        let s = if k <= half { k as f64 } else { k as f64 - n as f64 };
        if n == 1 {
            0.0
        } else {
            s / (n - 1) as f64
        }
    }
}

/// In-place 2-D FFT of a row-major `h x w` complex array (unnormalized).
pub(crate) fn fft2(planner: &mut FftPlanner<f64>, data: &mut [Complex64], w: usize, h: usize, inverse: bool) {
    let row = if inverse {
        planner.plan_fft_inverse(w)
    } else {
        planner.plan_fft_forward(w)
    };
    for r in 0..h {
        row.process(&mut data[r * w..(r + 1) * w]);
    }
    let col = if inverse {
        planner.plan_fft_inverse(h)
    } else {
        planner.plan_fft_forward(h)
    };
    let mut buf = vec![Complex64::default(); h];
    for c in 0..w {
        for r in 0..h {
            buf[r] = data[r * w + c];
        }
        col.process(&mut buf);
        for r in 0..h {
            data[r * w + c] = buf[r];
        }
    }
}

fn median(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (_, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = values[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lower + upper) / 2.0
    }
}

/// Real-valued filter bank on the FFT grid: `filters[o][s]`, row-major.
pub fn filter_bank(width: usize, height: usize, cfg: &PhaseCongruencyConfig) -> Vec<Vec<Vec<f64>>> {
    let n = width * height;
    let mut radius = vec![0.0; n];
    let mut sin_t = vec![0.0; n];
    let mut cos_t = vec![0.0; n];
    let mut lowpass = vec![0.0; n];
    for r in 0..height {
        let y = fft_frequency(r, height);
        for c in 0..width {
            let x = fft_frequency(c, width);
            let i = r * width + c;
            let rad = x.hypot(y);
            lowpass[i] = 1.0 / (1.0 + (rad / cfg.lowpass_cutoff).powi(2 * cfg.lowpass_order as i32));
            radius[i] = if i == 0 { 1.0 } else { rad };
            let theta = (-y).atan2(x);
            sin_t[i] = theta.sin();
            cos_t[i] = theta.cos();
        }
    }
    let log_sigma = cfg.sigma_on_f.ln();
    let radial: Vec<Vec<f64>> = (0..cfg.scales)
        .map(|s| {
            let fo = 1.0 / (cfg.min_wavelength * cfg.mult.powi(s as i32));
            let mut g: Vec<f64> = radius
                .iter()
                .zip(&lowpass)
                .map(|(&rad, &lp)| {
                    let l = (rad / fo).ln();
                    (-(l * l) / (2.0 * log_sigma * log_sigma)).exp() * lp
                })
                .collect();
            g[0] = 0.0;
            g
        })
        .collect();
    let theta_sigma = PI / cfg.orientations as f64 / cfg.d_theta_on_sigma;
    (0..cfg.orientations)
        .map(|o| {
            let angle = o as f64 * PI / cfg.orientations as f64;
            let (sa, ca) = angle.sin_cos();
            let spread: Vec<f64> = (0..n)
                .map(|i| {
                    let ds = sin_t[i] * ca - cos_t[i] * sa;
                    let dc = cos_t[i] * ca + sin_t[i] * sa;
                    let dtheta = ds.atan2(dc).abs();
                    (-(dtheta * dtheta) / (2.0 * theta_sigma * theta_sigma)).exp()
                })
                .collect();
            radial
                .iter()
                .map(|g| g.iter().zip(&spread).map(|(a, b)| a * b).collect())
                .collect()
        })
        .collect()
}

/// Phase congruency map in `[0, 1]`.
pub fn phase_congruency(image: &Image, cfg: &PhaseCongruencyConfig) -> Result<Vec<f64>> {
    let (w, h) = (image.width(), image.height());
    if w < MIN_PC_SIDE || h < MIN_PC_SIDE {
        return Err(Error::TooSmall {
            what: "phase congruency filter bank",
            width: w,
            height: h,
            min: MIN_PC_SIDE,
        });
    }
    let n = w * h;
    let inv_n = 1.0 / n as f64;
    let mut planner = FftPlanner::new();
    let mut spectrum: Vec<Complex64> = image.pixels().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut planner, &mut spectrum, w, h, false);
    let bank = filter_bank(w, h, cfg);

    let mut energy_all = vec![0.0; n];
    let mut an_all = vec![0.0; n];
    let mut buf = vec![Complex64::default(); n];
    for filters in &bank {
        let mut responses: Vec<Vec<Complex64>> = Vec::with_capacity(cfg.scales);
        let mut spatial_filters: Vec<Vec<f64>> = Vec::with_capacity(cfg.scales);
        let mut sum_e = vec![0.0; n];
        let mut sum_o = vec![0.0; n];
        let mut sum_an = vec![0.0; n];
        for filter in filters {
            for i in 0..n {
                buf[i] = Complex64::new(filter[i], 0.0);
            }
            fft2(&mut planner, &mut buf, w, h, true);
            let scale = inv_n * (n as f64).sqrt();
            spatial_filters.push(buf.iter().map(|z| z.re * scale).collect());

            for i in 0..n {
                buf[i] = spectrum[i] * filter[i];
            }
            fft2(&mut planner, &mut buf, w, h, true);
            let eo: Vec<Complex64> = buf.iter().map(|z| z * inv_n).collect();
            for i in 0..n {
                sum_an[i] += eo[i].norm();
                sum_e[i] += eo[i].re;
                sum_o[i] += eo[i].im;
            }
            responses.push(eo);
        }
        let mut energy = vec![0.0; n];
        for i in 0..n {
            let x_energy = sum_e[i].hypot(sum_o[i]) + cfg.epsilon;
            let mean_e = sum_e[i] / x_energy;
            let mean_o = sum_o[i] / x_energy;
            for eo in &responses {
                let (e, o) = (eo[i].re, eo[i].im);
                energy[i] += e * mean_e + o * mean_o - (e * mean_o - o * mean_e).abs();
            }
        }

        let em_n: f64 = filters[0].iter().map(|f| f * f).sum();
        let mut small_scale_power: Vec<f64> = responses[0].iter().map(|z| z.norm_sqr()).collect();
        let mean_e2n = -median(&mut small_scale_power) / 0.5f64.ln();
        let noise_power = mean_e2n / em_n;
        let mut sum_an2 = 0.0;
        let mut sum_ai_aj = 0.0;
        for i in 0..n {
            for (si, fi) in spatial_filters.iter().enumerate() {
                sum_an2 += fi[i] * fi[i];
                for fj in &spatial_filters[si + 1..] {
                    sum_ai_aj += fi[i] * fj[i];
                }
            }
        }
        let noise_energy2 = 2.0 * noise_power * sum_an2 + 4.0 * noise_power * sum_ai_aj;
        let tau = (noise_energy2 / 2.0).sqrt();
        let noise_mean = tau * (PI / 2.0).sqrt();
        let noise_sigma = ((2.0 - PI / 2.0) * tau * tau).sqrt();
        let t = (noise_mean + cfg.noise_k * noise_sigma) / 1.7;
        for i in 0..n {
            energy_all[i] += (energy[i] - t).max(0.0);
            an_all[i] += sum_an[i];
        }
    }
    Ok(energy_all
        .iter()
        .zip(&an_all)
        .map(|(e, a)| e / (a + cfg.epsilon))
        .collect())
}

/// Pool `(2 PC PC^ + T) / (PC^2 + PC^2^ + T)` weighted by `max(PC, PC^)`.
/// When both maps are identically zero the value is 1, flagged degenerate.
pub fn pool_pc_similarity(pc_ref: &[f64], pc_dist: &[f64], t: f64) -> Measurement {
    let mut num = 0.0;
    let mut den = 0.0;
    for (&a, &b) in pc_ref.iter().zip(pc_dist) {
        let weight = a.max(b);
        num += weight * (2.0 * a * b + t) / (a * a + b * b + t);
        den += weight;
    }
    if den == 0.0 {
        Measurement::degenerate(1.0)
    } else {
        Measurement::ok(num / den)
    }
}

pub fn phase_congruency_similarity(
    reference: &Image,
    distorted: &Image,
    cfg: &PhaseCongruencyConfig,
) -> Result<Measurement> {
    reference.check_same_size(distorted)?;
    let a = phase_congruency(reference, cfg)?;
    let b = phase_congruency(distorted, cfg)?;
    Ok(pool_pc_similarity(&a, &b, cfg.similarity_t))
}
