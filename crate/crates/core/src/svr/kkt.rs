//! Optimality certificate for a nu-SVR dual point, computed from scratch.

use super::kernel::rbf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// Largest gap `max_{up} -g - min_{down} -g` over the two classes.
    pub max_violation: f64,
    /// Largest excursion outside `[0, C/n]`.
    pub box_violation: f64,
    /// Largest deviation of a class sum from `C nu / 2`.
    pub sum_violation: f64,
}

/// Checks `alpha` (alpha then alpha*) against the dual of
/// `min 1/2 b'Kb - y'b`, `b = alpha - alpha*`, without any solver state.
pub fn kkt_report(rows: &[Vec<f64>], targets: &[f64], c: f64, nu: f64, gamma: f64, alpha: &[f64]) -> KktReport {
    let n = rows.len();
    assert_eq!(alpha.len(), 2 * n, "alpha must hold 2n entries");
    let upper = c / n as f64;
    let beta: Vec<f64> = (0..n).map(|i| alpha[i] - alpha[n + i]).collect();
    // d/d alpha_i = (K beta)_i - y_i ; d/d alpha*_i = -(K beta)_i + y_i.
    let k_beta: Vec<f64> = rows
        .iter()
        .map(|xi| rows.iter().zip(&beta).map(|(xj, b)| b * rbf(xi, xj, gamma)).sum())
        .collect();
    let mut max_violation = f64::NEG_INFINITY;
    for class in 0..2 {
        let grad = |i: usize| {
            let g = k_beta[i] - targets[i];
            if class == 0 {
                g
            } else {
                -g
            }
        };
        let a = |i: usize| alpha[class * n + i];
        // Raising one variable and lowering another within the class must
        // not decrease the objective by more than the tolerance.
        let best_increase = (0..n).filter(|&i| a(i) < upper).map(grad).fold(f64::INFINITY, f64::min);
        let best_decrease = (0..n).filter(|&i| a(i) > 0.0).map(grad).fold(f64::NEG_INFINITY, f64::max);
        max_violation = max_violation.max(best_decrease - best_increase);
    }
    let box_violation = alpha
        .iter()
        .map(|&v| (-v).max(v - upper).max(0.0))
        .fold(0.0, f64::max);
    let target_sum = c * nu / 2.0;
    let sum_violation = (0..2)
        .map(|class| (alpha[class * n..(class + 1) * n].iter().sum::<f64>() - target_sum).abs())
        .fold(0.0, f64::max);
    KktReport {
        max_violation,
        box_violation,
        sum_violation,
    }
}
