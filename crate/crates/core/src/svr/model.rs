//! Trained nu-SVR regressor and its JSON form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::kernel::rbf;
use super::scaling::ScalingSpec;
use super::solver::{solve_nu_svr, DualSolution, SolverConfig};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Hyperparameters of one fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub c: f64,
    pub gamma: f64,
    pub nu: f64,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl SvrParams {
    pub fn new(c: f64, gamma: f64, nu: f64) -> Self {
        SvrParams {
            c,
            gamma,
            nu,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
}

/// `f(x) = sum_i coef_i K(sv_i, s(x)) + bias`, with `s` the stored scaling
/// (identity when absent). Dual coefficients lie in `[-C/n, C/n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub version: u32,
    pub kernel: KernelKind,
    pub gamma: f64,
    pub nu: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub scaling: Option<ScalingSpec>,
    pub support_vectors: Vec<Vec<f64>>,
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub dim: usize,
    /// Tube half-width found by training.
    pub epsilon: f64,
    pub training_size: usize,
    pub converged: bool,
    /// Set when all training rows coincided and the model is the target mean.
    pub degenerate: bool,
}

impl SvrModel {
    pub fn support_count(&self) -> usize {
        self.support_vectors.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let scaled;
        let z = match &self.scaling {
            Some(s) => {
                scaled = s.apply(x)?;
                &scaled[..]
            }
            None => x,
        };
        Ok(self.decision(z))
    }

    pub fn predict_all(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    fn decision(&self, z: &[f64]) -> f64 {
        let sum: f64 = self
            .support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, a)| a * rbf(sv, z, self.gamma))
            .sum();
        sum + self.bias
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: SvrModel = serde_json::from_str(text)?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported model version {}",
                model.version
            )));
        }
        if model.support_vectors.len() != model.dual_coefs.len()
            || model.support_vectors.iter().any(|v| v.len() != model.dim)
            || model.scaling.as_ref().is_some_and(|s| s.dim() != model.dim)
        {
            return Err(Error::InvalidParameter("inconsistent model dimensions".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn check_rows(rows: &[Vec<f64>], targets: &[f64]) -> Result<usize> {
    if rows.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: rows.len(),
            got: targets.len(),
        });
    }
    let dim = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    Ok(dim)
}

/// Trains on rows that are already scaled; the model stores no scaling.
pub fn train_nu_svr(rows: &[Vec<f64>], targets: &[f64], params: &SvrParams) -> Result<SvrModel> {
    train_nu_svr_detailed(rows, targets, params).map(|(m, _)| m)
}

/// As [`train_nu_svr`], also returning the dual point (absent for the
/// degenerate constant model).
pub fn train_nu_svr_detailed(rows: &[Vec<f64>], targets: &[f64], params: &SvrParams) -> Result<(SvrModel, Option<DualSolution>)> {
    let dim = check_rows(rows, targets)?;
    let n = rows.len();
    let base = SvrModel {
        version: MODEL_FORMAT_VERSION,
        kernel: KernelKind::Rbf,
        gamma: params.gamma,
        nu: params.nu,
        c: params.c,
        scaling: None,
        support_vectors: Vec::new(),
        dual_coefs: Vec::new(),
        bias: 0.0,
        dim,
        epsilon: 0.0,
        training_size: n,
        converged: true,
        degenerate: false,
    };
    if n >= 2 && rows.iter().all(|r| r == &rows[0]) && targets.iter().all(|t| t.is_finite()) {
        let mean = targets.iter().sum::<f64>() / n as f64;
        if targets.iter().any(|&t| t != targets[0]) {
            log::warn!("all {n} training rows coincide; fitting the target mean");
        }
        return Ok((
            SvrModel {
                bias: mean,
                degenerate: true,
                ..base
            },
            None,
        ));
    }
    let sol = solve_nu_svr(rows, targets, params.c, params.nu, params.gamma, &params.solver)?;
    let coefs = sol.coefficients();
    let (support_vectors, dual_coefs): (Vec<_>, Vec<_>) = rows
        .iter()
        .zip(&coefs)
        .filter(|(_, &a)| a != 0.0)
        .map(|(r, &a)| (r.clone(), a))
        .unzip();
    let model = SvrModel {
        support_vectors,
        dual_coefs,
        bias: sol.bias,
        epsilon: sol.epsilon,
        converged: sol.converged,
        ..base
    };
    Ok((model, Some(sol)))
}

/// Fits scaling on raw `rows`, then trains on the scaled rows.
pub fn fit_svr(rows: &[Vec<f64>], targets: &[f64], params: &SvrParams) -> Result<SvrModel> {
    check_rows(rows, targets)?;
    let scaling = ScalingSpec::fit(rows)?;
    let scaled = scaling.apply_all(rows)?;
    let mut model = train_nu_svr(&scaled, targets, params)?;
    model.scaling = Some(scaling);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_targets_give_constant_predictor() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 19.0]).collect();
        let y = vec![0.7; 20];
        let m = train_nu_svr(&rows, &y, &SvrParams::new(10.0, 1.0, 0.5)).unwrap();
        for r in &rows {
            assert!((m.predict(r).unwrap() - 0.7).abs() < 1e-3);
        }
    }

    #[test]
    fn identical_rows_fit_mean() {
        let rows = vec![vec![0.5, 0.5]; 4];
        let m = train_nu_svr(&rows, &[1.0, 2.0, 3.0, 6.0], &SvrParams::new(1.0, 1.0, 0.5)).unwrap();
        assert!(m.degenerate);
        assert_eq!(m.support_count(), 0);
        assert_eq!(m.predict(&[0.1, 0.9]).unwrap(), 3.0);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![(i as f64 * 0.37).sin(), i as f64]).collect();
        let y: Vec<f64> = (0..30).map(|i| (i as f64 * 0.2).cos()).collect();
        let m = fit_svr(&rows, &y, &SvrParams::new(4.0, 2.0, 0.5)).unwrap();
        let back = SvrModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        for r in &rows {
            assert_eq!(back.predict(r).unwrap(), m.predict(r).unwrap());
        }
    }

    #[test]
    fn rejects_bad_input() {
        let rows = vec![vec![0.0], vec![1.0]];
        assert!(train_nu_svr(&rows, &[1.0], &SvrParams::new(1.0, 1.0, 0.5)).is_err());
        assert!(train_nu_svr(&rows, &[1.0, 2.0], &SvrParams::new(1.0, 1.0, 1.5)).is_err());
        assert!(train_nu_svr(&rows[..1], &[1.0], &SvrParams::new(1.0, 1.0, 0.5)).is_err());
        let m = train_nu_svr(&rows, &[1.0, 2.0], &SvrParams::new(1.0, 1.0, 0.5)).unwrap();
        assert!(m.predict(&[1.0, 2.0]).is_err());
    }
}
