//! Dense reference solver and KKT checker for the nu-SVR dual
//!
//! `min 1/2 b'Kb - y'b`, `b = a - a*`, `0 <= a, a* <= C/n`,
//! `sum a = sum a* = C nu / 2`,
//!
//! solved by accelerated projected gradient (FISTA) with exact projection
//! onto each capped simplex.

pub fn kernel_matrix(x: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    x.iter()
        .map(|a| {
            x.iter()
                .map(|b| (-gamma * a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>()).exp())
                .collect()
        })
        .collect()
}

/// Projection of `z` onto `{0 <= x <= u, sum x = s}`: `x = clip(z - tau)`
/// with `tau` found by bisection.
pub fn project_capped_simplex(z: &[f64], u: f64, s: f64) -> Vec<f64> {
    let total = |tau: f64| z.iter().map(|v| (v - tau).clamp(0.0, u)).sum::<f64>();
    let mut lo = z.iter().copied().fold(f64::INFINITY, f64::min) - u - 1.0;
    let mut hi = z.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) > s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    z.iter().map(|v| (v - tau).clamp(0.0, u)).collect()
}

pub fn objective(k: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    let b: Vec<f64> = (0..n).map(|i| alpha[i] - alpha[n + i]).collect();
    let quad: f64 = (0..n).map(|i| b[i] * (0..n).map(|j| k[i][j] * b[j]).sum::<f64>()).sum();
    0.5 * quad - y.iter().zip(&b).map(|(p, q)| p * q).sum::<f64>()
}

/// Returns `alpha` (2n entries) after `iters` FISTA steps.
pub fn solve(x: &[Vec<f64>], y: &[f64], c: f64, nu: f64, gamma: f64, iters: usize) -> Vec<f64> {
    let n = y.len();
    let k = kernel_matrix(x, gamma);
    let (u, s) = (c / n as f64, c * nu / 2.0);
    // Hessian [[K, -K], [-K, K]] has norm 2 ||K|| <= 2 max row sum.
    let lip = 2.0 * k.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    let project = |z: &[f64]| {
        let mut out = project_capped_simplex(&z[..n], u, s);
        out.extend(project_capped_simplex(&z[n..], u, s));
        out
    };
    let mut x_k = project(&vec![s / n as f64; 2 * n]);
    let mut y_k = x_k.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let b: Vec<f64> = (0..n).map(|i| y_k[i] - y_k[n + i]).collect();
        let g: Vec<f64> = (0..n).map(|i| (0..n).map(|j| k[i][j] * b[j]).sum::<f64>() - y[i]).collect();
        let step: Vec<f64> = (0..2 * n)
            .map(|i| if i < n { y_k[i] - g[i] / lip } else { y_k[i] + g[i - n] / lip })
            .collect();
        let x_next = project(&step);
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y_k = (0..2 * n).map(|i| x_next[i] + (t - 1.0) / t_next * (x_next[i] - x_k[i])).collect();
        x_k = x_next;
        t = t_next;
    }
    x_k
}

/// Maximal pairwise KKT violation within either class: over feasible
/// descent pairs (raise one variable below its cap, lower one above zero),
/// the largest first-order decrease.
pub fn kkt_violation(x: &[Vec<f64>], y: &[f64], c: f64, gamma: f64, alpha: &[f64]) -> f64 {
    let n = y.len();
    let k = kernel_matrix(x, gamma);
    let u = c / n as f64;
    let b: Vec<f64> = (0..n).map(|i| alpha[i] - alpha[n + i]).collect();
    let g: Vec<f64> = (0..n).map(|i| (0..n).map(|j| k[i][j] * b[j]).sum::<f64>() - y[i]).collect();
    let mut worst = f64::NEG_INFINITY;
    for sign in [1.0, -1.0] {
        let off = if sign > 0.0 { 0 } else { n };
        for i in 0..n {
            for j in 0..n {
                if alpha[off + i] > 0.0 && alpha[off + j] < u {
                    worst = worst.max(sign * g[i] - sign * g[j]);
                }
            }
        }
    }
    worst
}

/// Seeded random regression problem `(x, y, C, nu, gamma)` on `[0, 1]^dim`.
pub fn random_problem(seed: u64, n: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<f64>, f64, f64, f64) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
    let y = x.iter().map(|r| (3.0 * r.iter().sum::<f64>()).sin() + 0.1 * rng.random::<f64>()).collect();
    let c = 2f64.powi(rng.random_range(-3..=8));
    let nu = rng.random_range(0.1..0.9);
    let gamma = 2f64.powi(rng.random_range(-4..=3));
    (x, y, c, nu, gamma)
}

/// Held-out RMSE of a grid-searched nu-SVR fitted to `sin x` on `[0, 2 pi]`.
pub fn sin_regression_rmse(train_n: usize, test_n: usize) -> f64 {
    use paraboost_core::svr::{train_with_search, SvrConfig};
    let x = |i: usize, n: usize| 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
    let rows: Vec<Vec<f64>> = (0..train_n).map(|i| vec![x(i, train_n)]).collect();
    let y: Vec<f64> = rows.iter().map(|r| r[0].sin()).collect();
    let (model, _) = train_with_search(&rows, &y, &SvrConfig::default(), 7).unwrap();
    // shifted test abscissae never coincide with training points
    let test: Vec<f64> = (0..test_n).map(|i| 2.0 * std::f64::consts::PI * (i as f64 + 0.25) / test_n as f64).collect();
    let se: f64 = test.iter().map(|&t| (model.predict(&[t]).unwrap() - t.sin()).powi(2)).sum();
    (se / test_n as f64).sqrt()
}
