//! RBF kernel and the LRU cache of kernel rows used by the solver.

use crate::error::{Error, Result};

pub(crate) fn squared_distance(x: &[f64], z: &[f64]) -> f64 {
    x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[inline]
pub(crate) fn rbf(x: &[f64], z: &[f64], gamma: f64) -> f64 {
    (-gamma * squared_distance(x, z)).exp()
}

/// `exp(-gamma |x - z|^2)`.
pub fn rbf_kernel(x: &[f64], z: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: z.len(),
        });
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    Ok(rbf(x, z, gamma))
}

/// Rows `K(i, .)` over the training set, evicted least-recently-used once
/// the byte budget is spent. At least two rows are always kept.
pub(crate) struct KernelCache<'a> {
    rows: &'a [Vec<f64>],
    gamma: f64,
    slots: Vec<Option<Vec<f64>>>,
    last_used: Vec<u64>,
    cached: usize,
    capacity: usize,
    clock: u64,
    evaluations: u64,
}

impl<'a> KernelCache<'a> {
    pub(crate) fn new(rows: &'a [Vec<f64>], gamma: f64, cache_bytes: usize) -> Self {
        let n = rows.len();
        let row_bytes = (n * std::mem::size_of::<f64>()).max(1);
        KernelCache {
            rows,
            gamma,
            slots: vec![None; n],
            last_used: vec![0; n],
            cached: 0,
            capacity: (cache_bytes / row_bytes).max(2),
            clock: 0,
            evaluations: 0,
        }
    }

    pub(crate) fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Makes row `i` resident without evicting row `pinned`.
    pub(crate) fn ensure(&mut self, i: usize, pinned: Option<usize>) {
        self.clock += 1;
        self.last_used[i] = self.clock;
        if self.slots[i].is_some() {
            return;
        }
        if self.cached >= self.capacity {
            let victim = (0..self.slots.len())
                .filter(|&k| self.slots[k].is_some() && Some(k) != pinned && k != i)
                .min_by_key(|&k| self.last_used[k])
                .expect("capacity >= 2 leaves an evictable row");
            self.slots[victim] = None;
            self.cached -= 1;
        }
        let xi = &self.rows[i];
        let row: Vec<f64> = self.rows.iter().map(|xj| rbf(xi, xj, self.gamma)).collect();
        self.evaluations += row.len() as u64;
        self.slots[i] = Some(row);
        self.cached += 1;
    }

    /// Row `i`; must follow [`KernelCache::ensure`] for `i`.
    pub(crate) fn row(&self, i: usize) -> &[f64] {
        self.slots[i].as_deref().expect("row made resident by ensure")
    }
}
