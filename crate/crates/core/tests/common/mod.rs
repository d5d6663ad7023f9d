//! Oracles and fixtures shared by the integration tests. The oracles never
//! call into the optimized paths: convolutions are direct 2-D sums,
//! transforms are naive matrix products, statistics are recomputed per
//! window and the SVD comes from a Jacobi eigen-solve of the augmented
//! symmetric matrix.
#![allow(dead_code)]

pub mod oracle;
pub mod fixtures;
pub mod stimuli;
pub mod svr_reference;

/// `|a - b| <= tol * max(|a|, |b|)`, with a `1e-12` absolute floor so exact
/// zeros compare sanely.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()) + 1e-12
}
