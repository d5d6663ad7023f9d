//! Two-variable working-set solver for the nu-SVR dual.
//!
//! Variables are `alpha_i` (class +1) and `alpha*_i` (class -1), stacked as
//! `2n` entries. The dual is
//!
//! ```text
//! min 1/2 (a - a*)' K (a - a*) - y' (a - a*)
//! s.t. 0 <= a_i, a*_i <= C/n,  sum a = sum a* = C nu / 2
//! ```
//!
//! Each step moves a maximal-violating pair within one class, chosen with
//! second-order information; both equality constraints stay satisfied.

use serde::{Deserialize, Serialize};

use super::kernel::KernelCache;
use crate::error::{Error, Result};

/// Curvature floor for non-positive-definite pairs.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    /// Iteration cap; `None` means `max(10^7, 100 n)`.
    pub max_iter: Option<u64>,
    /// Budget of kernel evaluations.
    pub max_kernel_evals: u64,
    pub cache_bytes: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-3,
            max_iter: None,
            max_kernel_evals: 10_000_000,
            cache_bytes: 256 << 20,
        }
    }
}

/// Dual solution and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    /// `alpha` then `alpha*`, each of length n.
    pub alpha: Vec<f64>,
    pub bias: f64,
    /// Tube half-width implied by the solution.
    pub epsilon: f64,
    pub objective: f64,
    pub iterations: u64,
    pub kernel_evaluations: u64,
    pub converged: bool,
    /// Final maximal violation reported by the solver loop.
    pub violation: f64,
}

impl DualSolution {
    pub fn coefficients(&self) -> Vec<f64> {
        let n = self.alpha.len() / 2;
        (0..n).map(|i| self.alpha[i] - self.alpha[i + n]).collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    /// `alpha`, label +1.
    Pos,
    /// `alpha*`, label -1.
    Neg,
}

/// Both classes share one gradient up to sign: with `beta = alpha - alpha*`
/// and `g = K beta - y`, `dF/d alpha = g` and `dF/d alpha* = -g`. Within a
/// class `Q = K`.
struct Problem<'a> {
    cache: KernelCache<'a>,
    n: usize,
    upper: f64,
    pos: Vec<f64>,
    neg: Vec<f64>,
    g: Vec<f64>,
}

impl Problem<'_> {
    fn vars(&self, class: Class) -> &[f64] {
        match class {
            Class::Pos => &self.pos,
            Class::Neg => &self.neg,
        }
    }

    fn grad(&self, class: Class, k: usize) -> f64 {
        match class {
            Class::Pos => self.g[k],
            Class::Neg => -self.g[k],
        }
    }

    fn curvature(&self, i: usize, j: usize) -> f64 {
        let quad = 2.0 - 2.0 * self.cache.row(i)[j];
        if quad > 0.0 {
            quad
        } else {
            TAU
        }
    }

    /// Returns the working pair, or `None` when optimal within `tol`, plus
    /// the current violation.
    fn select(&mut self, tol: f64) -> (Option<(Class, usize, usize)>, f64) {
        let (u, n) = (self.upper, self.n);
        let (mut gmaxp, mut ip) = (f64::NEG_INFINITY, None);
        for k in 0..n {
            if self.pos[k] < u && -self.g[k] >= gmaxp {
                gmaxp = -self.g[k];
                ip = Some(k);
            }
        }
        let (mut gmaxn, mut i_n) = (f64::NEG_INFINITY, None);
        for k in 0..n {
            if self.neg[k] > 0.0 && -self.g[k] >= gmaxn {
                gmaxn = -self.g[k];
                i_n = Some(k);
            }
        }
        if let Some(i) = ip {
            self.cache.ensure(i, None);
        }
        if let Some(i) = i_n {
            self.cache.ensure(i, ip);
        }
        let mut best: Option<(Class, usize)> = None;
        let mut best_obj = f64::INFINITY;
        let mut gmaxp2 = f64::NEG_INFINITY;
        if let Some(i) = ip {
            let row = self.cache.row(i);
            for j in 0..n {
                if self.pos[j] <= 0.0 {
                    continue;
                }
                gmaxp2 = gmaxp2.max(self.g[j]);
                let diff = gmaxp + self.g[j];
                if diff > 0.0 {
                    let quad = (2.0 - 2.0 * row[j]).max(0.0);
                    let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                    if obj <= best_obj {
                        best_obj = obj;
                        best = Some((Class::Pos, j));
                    }
                }
            }
        } else {
            gmaxp2 = self.pos.iter().zip(&self.g).filter(|(a, _)| **a > 0.0).map(|(_, g)| *g).fold(gmaxp2, f64::max);
        }
        let mut gmaxn2 = f64::NEG_INFINITY;
        if let Some(i) = i_n {
            let row = self.cache.row(i);
            for j in 0..n {
                if self.neg[j] >= u {
                    continue;
                }
                gmaxn2 = gmaxn2.max(self.g[j]);
                let diff = gmaxn + self.g[j];
                if diff > 0.0 {
                    let quad = (2.0 - 2.0 * row[j]).max(0.0);
                    let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                    if obj <= best_obj {
                        best_obj = obj;
                        best = Some((Class::Neg, j));
                    }
                }
            }
        } else {
            gmaxn2 = self.neg.iter().zip(&self.g).filter(|(b, _)| **b < u).map(|(_, g)| *g).fold(gmaxn2, f64::max);
        }
        let violation = (gmaxp + gmaxp2).max(gmaxn + gmaxn2);
        match best {
            Some((class, j)) if violation >= tol => {
                let i = match class {
                    Class::Pos => ip,
                    Class::Neg => i_n,
                };
                (Some((class, i.expect("first index exists"), j)), violation)
            }
            _ => (None, violation),
        }
    }

    fn update(&mut self, class: Class, i: usize, j: usize) {
        let c = self.upper;
        self.cache.ensure(i, None);
        self.cache.ensure(j, Some(i));
        let quad = self.curvature(i, j);
        let delta = (self.grad(class, i) - self.grad(class, j)) / quad;
        let x = self.vars(class);
        let (old_i, old_j) = (x[i], x[j]);
        let sum = old_i + old_j;
        let (mut ai, mut aj) = (old_i - delta, old_j + delta);
        if sum > c {
            if ai > c {
                ai = c;
                aj = sum - c;
            }
        } else if aj < 0.0 {
            aj = 0.0;
            ai = sum;
        }
        if sum > c {
            if aj > c {
                aj = c;
                ai = sum - c;
            }
        } else if ai < 0.0 {
            ai = 0.0;
            aj = sum;
        }
        let x = match class {
            Class::Pos => &mut self.pos,
            Class::Neg => &mut self.neg,
        };
        x[i] = ai;
        x[j] = aj;
        let sign = if class == Class::Pos { 1.0 } else { -1.0 };
        let (di, dj) = (sign * (ai - old_i), sign * (aj - old_j));
        if di == 0.0 && dj == 0.0 {
            return;
        }
        let (ri, rj) = (self.cache.row(i), self.cache.row(j));
        for ((g, a), b) in self.g.iter_mut().zip(ri).zip(rj) {
            *g += a * di + b * dj;
        }
    }

    /// `(r1 + r2) / 2` style offsets: each class's mean gradient over free
    /// variables, or the midpoint of its feasible interval when none is free.
    fn offsets(&self) -> (f64, f64) {
        let class = |class: Class| {
            let x = self.vars(class);
            let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
            let (mut free, mut sum) = (0usize, 0.0);
            for (k, &v) in x.iter().enumerate() {
                let g = self.grad(class, k);
                if v >= self.upper {
                    lb = lb.max(g);
                } else if v <= 0.0 {
                    ub = ub.min(g);
                } else {
                    free += 1;
                    sum += g;
                }
            }
            if free > 0 {
                sum / free as f64
            } else {
                (ub + lb) / 2.0
            }
        };
        let r1 = class(Class::Pos);
        let r2 = class(Class::Neg);
        ((r1 - r2) / 2.0, (r1 + r2) / 2.0)
    }
}

/// Solves the dual for `rows` (already scaled) and `targets`.
pub fn solve_nu_svr(rows: &[Vec<f64>], targets: &[f64], c: f64, nu: f64, gamma: f64, cfg: &SolverConfig) -> Result<DualSolution> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("nu-SVR needs at least 2 rows, got {n}")));
    }
    if targets.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: targets.len(),
        });
    }
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("non-finite target".into()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
    }
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::InvalidParameter(format!("nu must lie in (0, 1), got {nu}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    let upper = c / n as f64;
    let mut pos = vec![0.0; n];
    let mut remaining = c * nu / 2.0;
    for a in pos.iter_mut() {
        *a = remaining.min(upper);
        remaining -= *a;
    }
    // alpha = alpha* initially, so beta = 0 and g = -y.
    let mut p = Problem {
        cache: KernelCache::new(rows, gamma, cfg.cache_bytes),
        n,
        upper,
        neg: pos.clone(),
        pos,
        g: targets.iter().map(|y| -y).collect(),
    };

    let max_iter = cfg.max_iter.unwrap_or_else(|| (10_000_000u64).max(100 * n as u64));
    let mut iterations = 0u64;
    let mut converged = false;
    let mut violation;
    loop {
        let (pair, v) = p.select(cfg.tol);
        violation = v;
        let Some((class, i, j)) = pair else {
            converged = true;
            break;
        };
        if iterations >= max_iter || p.cache.evaluations() >= cfg.max_kernel_evals {
            break;
        }
        p.update(class, i, j);
        iterations += 1;
    }
    if !converged {
        log::warn!(
            "nu-SVR stopped before convergence: {iterations} iterations, {} kernel evaluations, violation {violation:.3e}",
            p.cache.evaluations()
        );
    }
    let (rho, r) = p.offsets();
    // 1/2 b'Kb - y'b = 1/2 sum b_k (g_k - y_k).
    let objective = (0..n)
        .map(|k| (p.pos[k] - p.neg[k]) * (p.g[k] - targets[k]))
        .sum::<f64>()
        / 2.0;
    let mut alpha = p.pos.clone();
    alpha.extend_from_slice(&p.neg);
    Ok(DualSolution {
        bias: -rho,
        epsilon: -r,
        objective,
        iterations,
        kernel_evaluations: p.cache.evaluations(),
        converged,
        violation,
        alpha,
    })
}
