//! Separable convolution with replicated borders.

use crate::image::Image;

/// Sampled kernel with odd length `2 * radius + 1`, index `radius` is the origin.
#[derive(Debug, Clone)]
pub struct Kernel1d {
    pub taps: Vec<f64>,
    pub radius: usize,
}

pub fn gaussian_radius(sigma: f64) -> usize {
    ((3.0 * sigma).ceil() as usize).max(1)
}

/// Normalized Gaussian, `sum(taps) == 1`.
pub fn gaussian(sigma: f64) -> Kernel1d {
    let radius = gaussian_radius(sigma);
    let mut taps: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let x = i as f64 - radius as f64;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    Kernel1d { taps, radius }
}

/// First derivative of the normalized Gaussian, `-x / sigma^2 * g(x)`.
pub fn gaussian_derivative(sigma: f64) -> Kernel1d {
    let g = gaussian(sigma);
    let taps = g
        .taps
        .iter()
        .enumerate()
        .map(|(i, &gv)| {
            let x = i as f64 - g.radius as f64;
            -x / (sigma * sigma) * gv
        })
        .collect();
    Kernel1d {
        taps,
        radius: g.radius,
    }
}

#[inline]
pub(crate) fn clamp_index(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// Correlates each row with `k`: `out(r, c) = sum_j k[j] * in(r, c + j - radius)`.
pub fn filter_rows(data: &[f64], width: usize, height: usize, k: &Kernel1d) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    let rad = k.radius as isize;
    for r in 0..height {
        let row = &data[r * width..(r + 1) * width];
        for c in 0..width {
            let mut acc = 0.0;
            for (j, &t) in k.taps.iter().enumerate() {
                acc += t * row[clamp_index(c as isize + j as isize - rad, width)];
            }
            out[r * width + c] = acc;
        }
    }
    out
}

/// Column counterpart of [`filter_rows`].
pub fn filter_cols(data: &[f64], width: usize, height: usize, k: &Kernel1d) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    let rad = k.radius as isize;
    for r in 0..height {
        for c in 0..width {
            let mut acc = 0.0;
            for (j, &t) in k.taps.iter().enumerate() {
                acc += t * data[clamp_index(r as isize + j as isize - rad, height) * width + c];
            }
            out[r * width + c] = acc;
        }
    }
    out
}

pub fn gaussian_blur(image: &Image, sigma: f64) -> Image {
    let g = gaussian(sigma);
    let (w, h) = (image.width(), image.height());
    let tmp = filter_rows(image.pixels(), w, h, &g);
    let out = filter_cols(&tmp, w, h, &g);
    Image::from_fn(w, h, |r, c| out[r * w + c])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernels_are_normalized_and_odd() {
        for s in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let g = gaussian(s);
            assert_eq!(g.taps.len(), 2 * g.radius + 1);
            assert!((g.taps.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let d = gaussian_derivative(s);
            assert!(d.taps.iter().sum::<f64>().abs() < 1e-12);
            // positive lobe on the left so a rising edge gives a negative response
            assert!(d.taps[0] > 0.0);
        }
    }

    #[test]
    fn blur_preserves_constant() {
        let img = Image::filled(10, 7, 42.0);
        let b = gaussian_blur(&img, 2.0);
        assert!(b.pixels().iter().all(|&v| (v - 42.0).abs() < 1e-9));
    }
}
