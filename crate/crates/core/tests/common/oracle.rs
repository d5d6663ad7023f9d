//! Feature oracles written straight from the defining formulas.

use std::f64::consts::PI;

use paraboost_core::dataset::ViewSet;
use paraboost_core::depth::{CameraConfig, DnoseProfile};
use paraboost_core::features::{DctBandpassFilter, FeatureConfig, FeatureId, MasNormalization};
use paraboost_core::image::{DepthMap, Image};

type Grid = Vec<Vec<f64>>;

fn grid(img: &Image) -> Grid {
    (0..img.height()).map(|r| (0..img.width()).map(|c| img.get(r, c)).collect()).collect()
}

fn clampi(i: isize, n: usize) -> usize {
    i.max(0).min(n as isize - 1) as usize
}

// ---------------------------------------------------------------- edges

fn gauss_taps(sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let radius = ((3.0 * sigma).ceil() as isize).max(1);
    let raw: Vec<f64> = (-radius..=radius).map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let z: f64 = raw.iter().sum();
    let g: Vec<f64> = raw.iter().map(|v| v / z).collect();
    let dg = (-radius..=radius).zip(&g).map(|(x, gv)| -(x as f64) / (sigma * sigma) * gv).collect();
    (g, dg)
}

/// Direct 2-D correlation with kernel `kr[i] * kc[j]`, replicated borders.
fn correlate2d(img: &Grid, kr: &[f64], kc: &[f64]) -> Grid {
    let (h, w) = (img.len(), img[0].len());
    let (rr, rc) = ((kr.len() / 2) as isize, (kc.len() / 2) as isize);
    let mut out = vec![vec![0.0; w]; h];
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for (i, a) in kr.iter().enumerate() {
                let rr_ = clampi(r as isize + i as isize - rr, h);
                for (j, b) in kc.iter().enumerate() {
                    acc += a * b * img[rr_][clampi(c as isize + j as isize - rc, w)];
                }
            }
            out[r][c] = acc;
        }
    }
    out
}

/// Canny-style edge map: gradient magnitude above `0.1 (max - min) + min`,
/// kept where it is a maximum along the gradient direction quantized to 45
/// degrees (ties broken toward the earlier neighbour).
pub fn edge_map(img: &Image, sigma: f64) -> Vec<Vec<bool>> {
    let g = grid(img);
    let (gs, dgs) = gauss_taps(sigma);
    let gx = correlate2d(&g, &gs, &dgs);
    let gy = correlate2d(&g, &dgs, &gs);
    let (h, w) = (g.len(), g[0].len());
    let mag: Grid = (0..h).map(|r| (0..w).map(|c| (gx[r][c].powi(2) + gy[r][c].powi(2)).sqrt()).collect()).collect();
    let all: Vec<f64> = mag.iter().flatten().copied().collect();
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let t = 0.1 * (hi - lo) + lo;
    let at = |r: isize, c: isize| {
        if r < 0 || c < 0 || r >= h as isize || c >= w as isize {
            0.0
        } else {
            mag[r as usize][c as usize]
        }
    };
    let mut out = vec![vec![false; w]; h];
    for r in 0..h {
        for c in 0..w {
            let m = mag[r][c];
            if m <= t {
                continue;
            }
            let deg = gy[r][c].atan2(gx[r][c]).to_degrees().rem_euclid(180.0);
            let (dr, dc) = if !(22.5..157.5).contains(&deg) {
                (0, 1)
            } else if deg < 67.5 {
                (1, 1)
            } else if deg <= 112.5 {
                (1, 0)
            } else {
                (1, -1)
            };
            let (ri, ci) = (r as isize, c as isize);
            out[r][c] = m >= at(ri - dr, ci - dc) && m > at(ri + dr, ci + dc);
        }
    }
    out
}

pub fn esmse(a: &Image, b: &Image, sigmas: &[f64]) -> f64 {
    let stability = |img: &Image| {
        let maps: Vec<_> = sigmas.iter().map(|&s| edge_map(img, s)).collect();
        let (h, w) = (img.height(), img.width());
        let mut out = vec![vec![0u32; w]; h];
        for r in 0..h {
            for c in 0..w {
                let mut best = 0;
                for start in 0..maps.len() {
                    let run = maps[start..].iter().take_while(|m| m[r][c]).count() as u32;
                    best = best.max(run);
                }
                out[r][c] = best;
            }
        }
        out
    };
    let (q, qh) = (stability(a), stability(b));
    let mut n = 0;
    let mut acc = 0.0;
    for (rq, rh) in q.iter().zip(&qh) {
        for (&x, &y) in rq.iter().zip(rh) {
            if x > 0 {
                n += 1;
                acc += (x as f64 - y as f64).powi(2);
            }
        }
    }
    if n == 0 {
        0.0
    } else {
        acc / n as f64
    }
}

pub fn pratt(a: &Image, b: &Image, sigma: f64, alpha: f64) -> f64 {
    let ideal = edge_map(a, sigma);
    let found = edge_map(b, sigma);
    let pts = |m: &Vec<Vec<bool>>| -> Vec<(f64, f64)> {
        let mut v = Vec::new();
        for (r, row) in m.iter().enumerate() {
            for (c, &e) in row.iter().enumerate() {
                if e {
                    v.push((r as f64, c as f64));
                }
            }
        }
        v
    };
    let (pi, pf) = (pts(&ideal), pts(&found));
    if pi.is_empty() && pf.is_empty() {
        return 1.0;
    }
    if pi.is_empty() || pf.is_empty() {
        return 0.0;
    }
    let sum: f64 = pf
        .iter()
        .map(|&(r, c)| {
            let d2 = pi.iter().map(|&(r2, c2)| (r - r2).powi(2) + (c - c2).powi(2)).fold(f64::INFINITY, f64::min);
            1.0 / (1.0 + alpha * d2)
        })
        .sum();
    sum / pi.len().max(pf.len()) as f64
}

// ------------------------------------------------------------- spectral

fn dct_matrix(n: usize) -> Grid {
    (0..n)
        .map(|k| {
            let s = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
            (0..n).map(|i| s * (PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos()).collect()
        })
        .collect()
}

fn matmul(a: &Grid, b: &Grid) -> Grid {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    (0..n).map(|i| (0..p).map(|j| (0..m).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn transpose(a: &Grid) -> Grid {
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

fn csf(filter: &DctBandpassFilter, u: usize, v: usize, w: usize, h: usize) -> f64 {
    match filter {
        DctBandpassFilter::AllPass => 1.0,
        DctBandpassFilter::MannosSakrison { pixels_per_degree } => {
            let f = pixels_per_degree * ((u as f64 / (2 * w) as f64).powi(2) + (v as f64 / (2 * h) as f64).powi(2)).sqrt();
            2.6 * (0.0192 + 0.114 * f) * (-(0.114 * f).powf(1.1)).exp()
        }
        DctBandpassFilter::Tabulated { .. } => unimplemented!("oracle covers the analytic filters"),
    }
}

/// Band-pass each image in the DCT domain, invert, and take the RMS of
/// the pixel-domain difference.
pub fn hvs_mse(a: &Image, b: &Image, filter: &DctBandpassFilter) -> f64 {
    let (w, h) = (a.width(), a.height());
    let (cw, ch) = (dct_matrix(w), dct_matrix(h));
    let band = |img: &Image| {
        let mut s = matmul(&matmul(&ch, &grid(img)), &transpose(&cw));
        for (v, row) in s.iter_mut().enumerate() {
            for (u, x) in row.iter_mut().enumerate() {
                *x *= csf(filter, u, v, w, h);
            }
        }
        matmul(&matmul(&transpose(&ch), &s), &cw)
    };
    let (fa, fb) = (band(a), band(b));
    let sum: f64 = fa.iter().flatten().zip(fb.iter().flatten()).map(|(x, y)| (x - y).powi(2)).sum();
    (sum / (w * h) as f64).sqrt()
}

pub fn zcr(img: &Image) -> f64 {
    let g = grid(img);
    let (h, w) = (g.len(), g[0].len());
    let sign_change = |a: f64, b: f64, c: f64| ((b - a) > 0.0 && (c - b) < 0.0) || ((b - a) < 0.0 && (c - b) > 0.0);
    let mut zh = 0;
    for r in 0..h {
        for c in 1..w - 1 {
            zh += sign_change(g[r][c - 1], g[r][c], g[r][c + 1]) as usize;
        }
    }
    let mut zv = 0;
    for c in 0..w {
        for r in 1..h - 1 {
            zv += sign_change(g[r - 1][c], g[r][c], g[r + 1][c]) as usize;
        }
    }
    (zh as f64 / (h * (w - 2)) as f64 + zv as f64 / (w * (h - 2)) as f64) / 2.0
}

// ---------------------------------------------------------------- pixel

fn diffs(a: &Image, b: &Image) -> Vec<f64> {
    a.pixels().iter().zip(b.pixels()).map(|(x, y)| x - y).collect()
}

pub fn mse(a: &Image, b: &Image) -> f64 {
    let d = diffs(a, b);
    d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64
}

pub fn psnr(a: &Image, b: &Image, cap: f64) -> f64 {
    let m = mse(a, b);
    if m == 0.0 {
        cap
    } else {
        (20.0 * 255f64.log10() - 10.0 * m.log10()).min(cap)
    }
}

pub fn md(a: &Image, b: &Image) -> f64 {
    diffs(a, b).iter().map(|d| d.abs()).fold(0.0, f64::max)
}

pub fn mae(a: &Image, b: &Image) -> f64 {
    let d = diffs(a, b);
    d.iter().map(|x| x.abs()).sum::<f64>() / d.len() as f64
}

pub fn min_norm(a: &Image, b: &Image, fraction: f64) -> f64 {
    let mut d: Vec<f64> = diffs(a, b).iter().map(|x| x.abs()).collect();
    d.sort_by(|x, y| y.total_cmp(x));
    let r = ((fraction * d.len() as f64).ceil() as usize).clamp(1, d.len());
    (d[..r].iter().map(|x| x * x).sum::<f64>() / r as f64).sqrt()
}

// ------------------------------------------------------------ structural

struct Win {
    mx: f64,
    my: f64,
    vx: f64,
    vy: f64,
    cxy: f64,
}

fn windows(a: &Image, b: &Image, k: usize) -> Vec<Win> {
    let (ga, gb) = (grid(a), grid(b));
    let mut out = Vec::new();
    for r in 0..=a.height() - k {
        for c in 0..=a.width() - k {
            let xs: Vec<f64> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| ga[r + i][c + j]).collect();
            let ys: Vec<f64> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| gb[r + i][c + j]).collect();
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let vx = xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / n;
            let vy = ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / n;
            let cxy = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / n;
            out.push(Win { mx, my, vx, vy, cxy });
        }
    }
    out
}

/// `(l, c, s, ssim)` mean-pooled over every window position.
pub fn ssim(a: &Image, b: &Image, k: usize, c1: f64, c2: f64, c3: f64) -> [f64; 4] {
    let ws = windows(a, b, k);
    let mut acc = [0.0; 4];
    for w in &ws {
        let (sx, sy) = (w.vx.sqrt(), w.vy.sqrt());
        let l = (2.0 * w.mx * w.my + c1) / (w.mx.powi(2) + w.my.powi(2) + c1);
        let c = (2.0 * sx * sy + c2) / (w.vx + w.vy + c2);
        let s = (w.cxy + c3) / (sx * sy + c3);
        acc[0] += l;
        acc[1] += c;
        acc[2] += s;
        acc[3] += l * c * s;
    }
    acc.map(|v| v / ws.len() as f64)
}

/// Correlation x luminance x contrast, averaged over windows with non-zero
/// denominators.
pub fn uqi(a: &Image, b: &Image, k: usize) -> f64 {
    let mut sum = 0.0;
    let mut used = 0;
    for w in windows(a, b, k) {
        let (sx, sy) = (w.vx.sqrt(), w.vy.sqrt());
        if w.vx + w.vy <= 1e-9 || w.mx.powi(2) + w.my.powi(2) <= 1e-9 {
            continue;
        }
        // a flat window against a textured one has zero covariance
        let corr = if sx * sy == 0.0 { 0.0 } else { w.cxy / (sx * sy) };
        let q = corr * (2.0 * w.mx * w.my / (w.mx.powi(2) + w.my.powi(2))) * (2.0 * sx * sy / (w.vx + w.vy));
        sum += q;
        used += 1;
    }
    if used == 0 {
        0.0
    } else {
        sum / used as f64
    }
}

// ----------------------------------------------------------------- color

pub fn mas(views: &ViewSet, normalization: MasNormalization) -> f64 {
    let pair = &views.views()[0];
    let (a, b) = (pair.reference.color_or_promoted(), pair.distorted.color_or_promoted());
    let n_px = a.width() * a.height();
    let mut sum = 0.0;
    let mut n = 0usize;
    for i in 0..n_px {
        let (p, q) = (a.pixel(i), b.pixel(i));
        let np = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nq = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if np == 0.0 || nq == 0.0 {
            continue;
        }
        let cos = (p[0] * q[0] + p[1] * q[1] + p[2] * q[2]) / (np * nq);
        sum += 2.0 / PI * cos.clamp(-1.0, 1.0).acos();
        n += 1;
    }
    if n == 0 {
        return 0.0;
    }
    let denom = match normalization {
        MasNormalization::PerPixel => n as f64,
        MasNormalization::Squared => (n * n) as f64,
    };
    1.0 - sum / denom
}

// -------------------------------------------------------------- gradient

pub fn gm(a: &Image, b: &Image, t: f64) -> f64 {
    let kx = [[3.0, 0.0, -3.0], [10.0, 0.0, -10.0], [3.0, 0.0, -3.0]];
    let mag = |img: &Image| -> Vec<f64> {
        let g = grid(img);
        let (h, w) = (g.len(), g[0].len());
        let mut out = Vec::new();
        for r in 0..h {
            for c in 0..w {
                let (mut gx, mut gy) = (0.0, 0.0);
                for i in 0..3 {
                    for j in 0..3 {
                        let v = g[clampi(r as isize + i as isize - 1, h)][clampi(c as isize + j as isize - 1, w)] / 16.0;
                        gx += kx[i][j] * v;
                        gy += kx[j][i] * v;
                    }
                }
                out.push((gx * gx + gy * gy).sqrt());
            }
        }
        out
    };
    let (ga, gb) = (mag(a), mag(b));
    ga.iter().zip(&gb).map(|(x, y)| (2.0 * x * y + t) / (x * x + y * y + t)).sum::<f64>() / ga.len() as f64
}

// ------------------------------------------------------------------- svd

/// SVD from the symmetric eigenproblem of `[[0, A], [A', 0]]`, whose
/// eigenpairs are `+-s` with vectors `(u, +-v) / sqrt 2`, solved by cyclic
/// two-sided Jacobi. Returns `(values desc, U cols, V cols)`.
pub fn jacobi_svd(a: &Grid) -> (Vec<f64>, Grid, Grid) {
    let n = a.len();
    let m = 2 * n;
    let mut s = vec![vec![0.0; m]; m];
    for i in 0..n {
        for j in 0..n {
            s[i][n + j] = a[i][j];
            s[n + j][i] = a[i][j];
        }
    }
    let mut vecs: Grid = (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| s[i][j] * s[i][j]).sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if s[p][q] == 0.0 {
                    continue;
                }
                let theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let (x, y) = (s[k][p], s[k][q]);
                    s[k][p] = c * x - sn * y;
                    s[k][q] = sn * x + c * y;
                }
                for k in 0..m {
                    let (x, y) = (s[p][k], s[q][k]);
                    s[p][k] = c * x - sn * y;
                    s[q][k] = sn * x + c * y;
                }
                for row in vecs.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - sn * y;
                    row[q] = sn * x + c * y;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&x, &y| s[y][y].total_cmp(&s[x][x]));
    let top = &idx[..n];
    let values = top.iter().map(|&k| s[k][k]).collect();
    let col = |k: usize, range: std::ops::Range<usize>| -> Vec<f64> {
        let v: Vec<f64> = range.map(|i| vecs[i][k]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| x / norm).collect()
    };
    let left = top.iter().map(|&k| col(k, 0..n)).collect();
    let right = top.iter().map(|&k| col(k, n..m)).collect();
    (values, left, right)
}

/// `(sv, svec)`: normalized singular-value distance and singular-vector
/// misalignment, averaged over whole `block x block` tiles.
pub fn svd_pair(a: &Image, b: &Image, block: usize, floor: f64) -> (f64, f64) {
    let (ga, gb) = (grid(a), grid(b));
    let tile = |g: &Grid, r0: usize, c0: usize| -> Grid {
        (0..block).map(|i| (0..block).map(|j| g[r0 + i][c0 + j]).collect()).collect()
    };
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let (mut sv, mut svec, mut tiles) = (0.0, 0.0, 0);
    for ty in 0..a.height() / block {
        for tx in 0..a.width() / block {
            let (s1, u1, v1) = jacobi_svd(&tile(&ga, ty * block, tx * block));
            let (s2, u2, v2) = jacobi_svd(&tile(&gb, ty * block, tx * block));
            let num: f64 = s1.iter().zip(&s2).map(|(x, y)| (x - y).abs()).sum();
            sv += num / s1.iter().sum::<f64>().max(floor);
            svec += (0..block).map(|k| 1.0 - dot(&u1[k], &u2[k]).abs() * dot(&v1[k], &v2[k]).abs()).sum::<f64>() / block as f64;
            tiles += 1;
        }
    }
    (sv / tiles as f64, svec / tiles as f64)
}

// ----------------------------------------------------------------- phase

#[derive(Clone, Copy)]
struct C {
    re: f64,
    im: f64,
}

impl C {
    fn mul(self, o: C) -> C {
        C {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
    fn abs(self) -> f64 {
        (self.re * self.re + self.im * self.im).sqrt()
    }
}

/// Naive separable DFT, `sign = -1` forward; inverse is normalized by `1/N`.
fn dft2(data: &[Vec<C>], sign: f64) -> Vec<Vec<C>> {
    let (h, w) = (data.len(), data[0].len());
    let tw = |n: usize| -> Vec<C> {
        (0..n)
            .map(|k| {
                let a = sign * 2.0 * PI * k as f64 / n as f64;
                C { re: a.cos(), im: a.sin() }
            })
            .collect()
    };
    let (tw_w, tw_h) = (tw(w), tw(h));
    let rows: Vec<Vec<C>> = data
        .iter()
        .map(|row| {
            (0..w)
                .map(|k| {
                    let mut acc = C { re: 0.0, im: 0.0 };
                    for (x, v) in row.iter().enumerate() {
                        let p = v.mul(tw_w[(k * x) % w]);
                        acc.re += p.re;
                        acc.im += p.im;
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let norm = if sign > 0.0 { 1.0 / (w * h) as f64 } else { 1.0 };
    (0..h)
        .map(|k| {
            (0..w)
                .map(|c| {
                    let mut acc = C { re: 0.0, im: 0.0 };
                    for (y, row) in rows.iter().enumerate() {
                        let p = row[c].mul(tw_h[(k * y) % h]);
                        acc.re += p.re;
                        acc.im += p.im;
                    }
                    C {
                        re: acc.re * norm,
                        im: acc.im * norm,
                    }
                })
                .collect()
        })
        .collect()
}

/// Normalized frequency ramp after `ifftshift`.
fn freq(k: usize, n: usize) -> f64 {
    let signed = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
    if n % 2 == 0 {
        signed / n as f64
    } else {
        signed / (n - 1).max(1) as f64
    }
}

pub fn phase_congruency(img: &Image, cfg: &paraboost_core::features::PhaseCongruencyConfig) -> Vec<Vec<f64>> {
    let (h, w) = (img.height(), img.width());
    let n = (w * h) as f64;
    let g = grid(img);
    let spec = dft2(&g.iter().map(|r| r.iter().map(|&v| C { re: v, im: 0.0 }).collect()).collect::<Vec<_>>(), -1.0);
    let mut energy_all = vec![vec![0.0; w]; h];
    let mut an_all = vec![vec![0.0; w]; h];
    let theta_sigma = PI / cfg.orientations as f64 / cfg.d_theta_on_sigma;
    for o in 0..cfg.orientations {
        let angle = o as f64 * PI / cfg.orientations as f64;
        let mut filters: Vec<Grid> = Vec::new();
        for s in 0..cfg.scales {
            let fo = 1.0 / (cfg.min_wavelength * cfg.mult.powi(s as i32));
            let f: Grid = (0..h)
                .map(|r| {
                    (0..w)
                        .map(|c| {
                            if r == 0 && c == 0 {
                                return 0.0;
                            }
                            let (x, y) = (freq(c, w), freq(r, h));
                            let rad = (x * x + y * y).sqrt();
                            let lp = 1.0 / (1.0 + (rad / cfg.lowpass_cutoff).powf(2.0 * cfg.lowpass_order as f64));
                            let radial = (-(rad / fo).ln().powi(2) / (2.0 * cfg.sigma_on_f.ln().powi(2))).exp();
                            let theta = (-y).atan2(x);
                            let d = (theta - angle + PI).rem_euclid(2.0 * PI) - PI;
                            radial * lp * (-(d * d) / (2.0 * theta_sigma * theta_sigma)).exp()
                        })
                        .collect()
                })
                .collect();
            filters.push(f);
        }
        let eo: Vec<Vec<Vec<C>>> = filters
            .iter()
            .map(|f| {
                let prod: Vec<Vec<C>> = (0..h)
                    .map(|r| (0..w).map(|c| C { re: spec[r][c].re * f[r][c], im: spec[r][c].im * f[r][c] }).collect())
                    .collect();
                dft2(&prod, 1.0)
            })
            .collect();
        let spatial: Vec<Grid> = filters
            .iter()
            .map(|f| {
                let z: Vec<Vec<C>> = f.iter().map(|r| r.iter().map(|&v| C { re: v, im: 0.0 }).collect()).collect();
                dft2(&z, 1.0).iter().map(|r| r.iter().map(|c| c.re * n.sqrt()).collect()).collect()
            })
            .collect();
        // noise threshold
        let em_n: f64 = filters[0].iter().flatten().map(|v| v * v).sum();
        let mut p0: Vec<f64> = eo[0].iter().flatten().map(|z| z.abs().powi(2)).collect();
        p0.sort_by(f64::total_cmp);
        let m = p0.len();
        let med = if m % 2 == 1 { p0[m / 2] } else { (p0[m / 2 - 1] + p0[m / 2]) / 2.0 };
        let noise_power = -med / 0.5f64.ln() / em_n;
        let (mut sum_an2, mut sum_cross) = (0.0, 0.0);
        for r in 0..h {
            for c in 0..w {
                for a in 0..cfg.scales {
                    sum_an2 += spatial[a][r][c].powi(2);
                    for b in a + 1..cfg.scales {
                        sum_cross += spatial[a][r][c] * spatial[b][r][c];
                    }
                }
            }
        }
        let tau = ((2.0 * noise_power * sum_an2 + 4.0 * noise_power * sum_cross) / 2.0).sqrt();
        let t = (tau * (PI / 2.0).sqrt() + cfg.noise_k * ((2.0 - PI / 2.0) * tau * tau).sqrt()) / 1.7;
        for r in 0..h {
            for c in 0..w {
                let se: f64 = eo.iter().map(|e| e[r][c].re).sum();
                let so: f64 = eo.iter().map(|e| e[r][c].im).sum();
                let norm = (se * se + so * so).sqrt() + cfg.epsilon;
                let (me, mo) = (se / norm, so / norm);
                let energy: f64 = eo.iter().map(|e| {
                    let (x, y) = (e[r][c].re, e[r][c].im);
                    x * me + y * mo - (x * mo - y * me).abs()
                }).sum();
                energy_all[r][c] += (energy - t).max(0.0);
                an_all[r][c] += eo.iter().map(|e| e[r][c].abs()).sum::<f64>();
            }
        }
    }
    (0..h).map(|r| (0..w).map(|c| energy_all[r][c] / (an_all[r][c] + cfg.epsilon)).collect()).collect()
}

pub fn pc(a: &Image, b: &Image, cfg: &paraboost_core::features::PhaseCongruencyConfig) -> f64 {
    let (pa, pb) = (phase_congruency(a, cfg), phase_congruency(b, cfg));
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in pa.iter().flatten().zip(pb.iter().flatten()) {
        let wgt = x.max(*y);
        num += wgt * (2.0 * x * y + cfg.similarity_t) / (x * x + y * y + cfg.similarity_t);
        den += wgt;
    }
    if den == 0.0 {
        1.0
    } else {
        num / den
    }
}

// ----------------------------------------------------------------- depth

/// For each level, the contiguous run of levels sharing its rendered
/// quantized disparity `ceil((DP(v) - lambda) K)`, found by scanning all 256.
pub fn dnose_grouping(cam: &CameraConfig) -> Vec<(u8, u8)> {
    let k = cam.precision as f64;
    let q: Vec<i64> = (0..256)
        .map(|v| {
            let dp = cam.focal_length * cam.baseline * ((v as f64 / 255.0) * (1.0 / cam.z_near - 1.0 / cam.z_far) + 1.0 / cam.z_far);
            ((dp - cam.rounding_offset) * k).ceil() as i64
        })
        .collect();
    (0..256usize)
        .map(|v| {
            let mut lo = v;
            while lo > 0 && q[lo - 1] == q[v] {
                lo -= 1;
            }
            let mut hi = v;
            while hi < 255 && q[hi + 1] == q[v] {
                hi += 1;
            }
            (lo as u8, hi as u8)
        })
        .collect()
}

pub fn ndse(a: &DepthMap, b: &DepthMap, groups: &[(u8, u8)]) -> f64 {
    let mut sum = 0.0;
    for (&x, &y) in a.levels().iter().zip(b.levels()) {
        let (lo, hi) = groups[x as usize];
        if y < lo || y > hi {
            sum += (x as f64 - y as f64).abs();
        }
    }
    sum / a.levels().len() as f64
}

/// Oracle value of `id` on view 0 of `views`.
pub fn feature(id: FeatureId, views: &ViewSet, cfg: &FeatureConfig) -> f64 {
    let pair = &views.views()[0];
    let (a, b) = (&pair.reference.luma, &pair.distorted.luma);
    let s = &cfg.ssim;
    match id {
        FeatureId::Esmse => esmse(a, b, &cfg.edge.sigmas),
        FeatureId::Pratt => pratt(a, b, cfg.edge.sigmas[cfg.edge.sigmas.len() / 2], cfg.edge.pratt_a),
        FeatureId::HvsMse => hvs_mse(a, b, &cfg.hvs_filter),
        FeatureId::Zcr => zcr(b),
        FeatureId::Psnr => psnr(a, b, cfg.psnr_cap),
        FeatureId::Md => md(a, b),
        FeatureId::Mae => mae(a, b),
        FeatureId::Min => min_norm(a, b, cfg.min_fraction),
        FeatureId::SsimL => ssim(a, b, s.window, s.c1, s.c2, s.c3)[0],
        FeatureId::SsimC => ssim(a, b, s.window, s.c1, s.c2, s.c3)[1],
        FeatureId::SsimS => ssim(a, b, s.window, s.c1, s.c2, s.c3)[2],
        FeatureId::Ssim => ssim(a, b, s.window, s.c1, s.c2, s.c3)[3],
        FeatureId::Uqi => uqi(a, b, cfg.uqi_window),
        FeatureId::Mas => mas(views, cfg.mas_normalization),
        FeatureId::Pc => pc(a, b, &cfg.phase),
        FeatureId::Gm => gm(a, b, 160.0),
        FeatureId::Sv => svd_pair(a, b, cfg.svd_block, 1.0).0,
        FeatureId::Svec => svd_pair(a, b, cfg.svd_block, 1.0).1,
        FeatureId::Ndse => {
            let d = &views.depths().expect("oracle stimuli carry depth")[0];
            ndse(&d.reference, &d.distorted, &dnose_grouping(&cfg.camera))
        }
    }
}

/// Value every feature takes on an identical pair.
pub fn perfect_value(id: FeatureId, views: &ViewSet, cfg: &FeatureConfig) -> f64 {
    use FeatureId::*;
    match id {
        Esmse | HvsMse | Md | Mae | Min | Sv | Svec | Ndse => 0.0,
        Pratt | SsimL | SsimC | SsimS | Ssim | Uqi | Mas | Pc | Gm => 1.0,
        Psnr => cfg.psnr_cap,
        Zcr => zcr(&views.views()[0].reference.luma),
    }
}

pub fn profile_matches(cam: &CameraConfig) -> bool {
    let p = DnoseProfile::build(cam).unwrap();
    dnose_grouping(cam).iter().enumerate().all(|(v, &g)| p.interval(v as u8) == g)
}
