//! Block-wise singular value / singular vector distortion.

use crate::error::{Error, Result};
use crate::image::Image;

/// Lower bound on a tile's singular value sum when normalizing, in gray levels.
pub const SV_NORM_FLOOR: f64 = 1.0;

/// Column pairs count as orthogonal once `|a.b| <= JACOBI_TOL |a| |b|`.
const JACOBI_TOL: f64 = 1e-15;
const JACOBI_MAX_SWEEPS: usize = 60;

/// Singular system of one tile, values descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdBlockFeatures {
    pub block: usize,
    pub singular_values: Vec<f64>,
    /// Left singular vectors, one `block`-length vector per value.
    pub left: Vec<Vec<f64>>,
    /// Right singular vectors, one `block`-length vector per value.
    pub right: Vec<Vec<f64>>,
}

impl SvdBlockFeatures {
    pub fn of_tile(image: &Image, row0: usize, col0: usize, block: usize) -> Self {
        let columns: Vec<Vec<f64>> = (0..block)
            .map(|c| (0..block).map(|r| image.get(row0 + r, col0 + c)).collect())
            .collect();
        let (singular_values, left, right) = jacobi_svd(columns);
        SvdBlockFeatures {
            block,
            singular_values,
            left,
            right,
        }
    }
}

/// One-sided (Hestenes) Jacobi SVD of a square matrix given by columns.
/// Returns values descending with matching left and right vectors. Left
/// vectors of numerically zero values are completed deterministically from
/// the standard basis, so identical inputs give identical outputs.
fn jacobi_svd(mut u: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = u.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| f64::from(u8::from(i == j))).collect()).collect();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&u[p], &u[p]);
                let beta = dot(&u[q], &u[q]);
                let gamma = dot(&u[p], &u[q]);
                if gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut u, &mut v] {
                    let (head, tail) = m.split_at_mut(q);
                    for (x, y) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                        let (a, b) = (*x, *y);
                        *x = c * a - s * b;
                        *y = s * a + c * b;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = u.iter().map(|col| dot(col, col).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let tiny = norms[order[0]] * n as f64 * f64::EPSILON;
    let mut values = Vec::with_capacity(n);
    let mut left: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    let mut basis = 0;
    for &j in &order {
        let sigma = norms[j];
        let vec = if sigma > tiny && sigma > 0.0 {
            u[j].iter().map(|x| x / sigma).collect()
        } else {
            complete_basis(&left, &mut basis, n)
        };
        values.push(sigma);
        left.push(vec);
        right.push(std::mem::take(&mut v[j]));
    }
    (values, left, right)
}

/// Next standard basis vector, Gram-Schmidt orthonormalized against `have`,
/// skipping candidates that are (nearly) in their span.
fn complete_basis(have: &[Vec<f64>], next: &mut usize, n: usize) -> Vec<f64> {
    while *next < n {
        let mut e: Vec<f64> = (0..n).map(|i| f64::from(u8::from(i == *next))).collect();
        *next += 1;
        // twice, for orthogonality to working precision
        for _ in 0..2 {
            for h in have {
                let d = dot(&e, h);
                e.iter_mut().zip(h).for_each(|(x, y)| *x -= d * y);
            }
        }
        let norm = dot(&e, &e).sqrt();
        if norm > 1e-8 {
            return e.iter().map(|x| x / norm).collect();
        }
    }
    vec![0.0; n]
}

/// Scorer feature pair for one view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdDistortion {
    /// Mean over tiles of `sum |s_k - s^_k| / max(sum s_k, floor)`.
    pub sv_dist: f64,
    /// Mean over tiles of `(1/l) sum (1 - |u_k . u^_k| |v_k . v^_k|)`.
    pub svec_dist: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Tiles both images into non-overlapping `block x block` tiles (partial
/// edge tiles dropped) and compares their singular systems.
pub fn svd_features(reference: &Image, distorted: &Image, block: usize) -> Result<SvdDistortion> {
    reference.check_same_size(distorted)?;
    let (w, h) = (reference.width(), reference.height());
    if block == 0 || w < block || h < block {
        return Err(Error::TooSmall {
            what: "SVD tiling",
            width: w,
            height: h,
            min: block.max(1),
        });
    }
    let (tiles_x, tiles_y) = (w / block, h / block);
    let mut sv_acc = 0.0;
    let mut vec_acc = 0.0;
    for ty in 0..tiles_y {
        for tx in 0..tiles_x {
            let a = SvdBlockFeatures::of_tile(reference, ty * block, tx * block, block);
            let b = SvdBlockFeatures::of_tile(distorted, ty * block, tx * block, block);
            let diff: f64 = a
                .singular_values
                .iter()
                .zip(&b.singular_values)
                .map(|(x, y)| (x - y).abs())
                .sum();
            let total: f64 = a.singular_values.iter().sum();
            sv_acc += diff / total.max(SV_NORM_FLOOR);
            let l = a.singular_values.len();
            let mut vd = 0.0;
            for k in 0..l {
                vd += 1.0 - dot(&a.left[k], &b.left[k]).abs() * dot(&a.right[k], &b.right[k]).abs();
            }
            vec_acc += vd / l as f64;
        }
    }
    let n = (tiles_x * tiles_y) as f64;
    Ok(SvdDistortion {
        sv_dist: sv_acc / n,
        svec_dist: vec_acc / n,
    })
}
