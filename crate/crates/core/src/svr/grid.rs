//! Exhaustive (C, gamma) search by k-fold cross-validated MSE.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{fit_svr, train_nu_svr, SvrModel, SvrParams};
use super::scaling::ScalingSpec;
use super::solver::SolverConfig;
use crate::error::{Error, Result};

fn powers_of_two(from: i32, to: i32, step: i32) -> Vec<f64> {
    (from..=to).step_by(step as usize).map(|e| 2f64.powi(e)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSearchSpec {
    pub c_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub folds: usize,
}

impl Default for GridSearchSpec {
    /// `C = 2^-5, 2^-3, ..., 2^15`, `gamma = 2^-15, 2^-13, ..., 2^3`, 5 folds.
    fn default() -> Self {
        GridSearchSpec {
            c_grid: powers_of_two(-5, 15, 2),
            gamma_grid: powers_of_two(-15, 3, 2),
            folds: 5,
        }
    }
}

impl GridSearchSpec {
    pub fn single(c: f64, gamma: f64, folds: usize) -> Self {
        GridSearchSpec {
            c_grid: vec![c],
            gamma_grid: vec![gamma],
            folds,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.c_grid.is_empty() || self.gamma_grid.is_empty() {
            return Err(Error::InvalidParameter("grid search needs non-empty C and gamma grids".into()));
        }
        if self.c_grid.iter().chain(&self.gamma_grid).any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter("grid values must be positive and finite".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidParameter(format!("grid search needs at least 2 folds, got {}", self.folds)));
        }
        if n < self.folds {
            return Err(Error::InsufficientData(format!(
                "{n} samples cannot fill {} grid-search folds",
                self.folds
            )));
        }
        Ok(())
    }
}

/// Everything needed to train a regressor with hyperparameter search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvrConfig {
    pub nu: f64,
    pub grid: GridSearchSpec,
    pub solver: SolverConfig,
}

impl Default for SvrConfig {
    fn default() -> Self {
        SvrConfig {
            nu: 0.5,
            grid: GridSearchSpec::default(),
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub c: f64,
    pub gamma: f64,
    pub cv_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: GridCell,
    /// Every cell, ordered by C then gamma.
    pub cells: Vec<GridCell>,
}

/// Fold index of each row: a seeded shuffle dealt round-robin.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % folds;
    }
    fold
}

fn cv_mse(rows: &[Vec<f64>], targets: &[f64], fold: &[usize], folds: usize, params: &SvrParams) -> Result<f64> {
    let mut se = 0.0;
    for k in 0..folds {
        let (mut train_x, mut train_y, mut test) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..rows.len() {
            if fold[i] == k {
                test.push(i);
            } else {
                train_x.push(rows[i].clone());
                train_y.push(targets[i]);
            }
        }
        let scaling = ScalingSpec::fit(&train_x)?;
        let model = train_nu_svr(&scaling.apply_all(&train_x)?, &train_y, params)?;
        for i in test {
            let e = model.predict(&scaling.apply(&rows[i])?)? - targets[i];
            se += e * e;
        }
    }
    Ok(se / rows.len() as f64)
}

/// Evaluates every grid cell (in parallel) and returns the cell with the
/// smallest CV MSE; ties go to the smaller C, then the smaller gamma.
pub fn grid_search(rows: &[Vec<f64>], targets: &[f64], cfg: &SvrConfig, seed: u64) -> Result<GridResult> {
    cfg.grid.validate(rows.len())?;
    if rows.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: rows.len(),
            got: targets.len(),
        });
    }
    let fold = fold_assignment(rows.len(), cfg.grid.folds, seed);
    let mut cs = cfg.grid.c_grid.clone();
    let mut gammas = cfg.grid.gamma_grid.clone();
    cs.sort_by(f64::total_cmp);
    cs.dedup();
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();
    let pairs: Vec<(f64, f64)> = cs.iter().flat_map(|&c| gammas.iter().map(move |&g| (c, g))).collect();
    let cells = pairs
        .par_iter()
        .map(|&(c, gamma)| {
            let params = SvrParams {
                c,
                gamma,
                nu: cfg.nu,
                solver: cfg.solver,
            };
            cv_mse(rows, targets, &fold, cfg.grid.folds, &params).map(|cv_mse| GridCell { c, gamma, cv_mse })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = cells[0];
    for cell in &cells[1..] {
        let key = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
        if key(cell.cv_mse) < key(best.cv_mse) {
            best = *cell;
        }
    }
    Ok(GridResult { best, cells })
}

/// Grid search followed by a fit on all rows with the selected cell.
pub fn train_with_search(rows: &[Vec<f64>], targets: &[f64], cfg: &SvrConfig, seed: u64) -> Result<(SvrModel, GridResult)> {
    let result = grid_search(rows, targets, cfg, seed)?;
    let params = SvrParams {
        c: result.best.c,
        gamma: result.best.gamma,
        nu: cfg.nu,
        solver: cfg.solver,
    };
    Ok((fit_svr(rows, targets, &params)?, result))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> (Vec<Vec<f64>>, Vec<f64>) {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 39.0]).collect();
        let y = rows.iter().map(|r| (6.0 * r[0]).sin()).collect();
        (rows, y)
    }

    #[test]
    fn default_grid_shape() {
        let g = GridSearchSpec::default();
        assert_eq!(g.c_grid.len(), 11);
        assert_eq!(g.gamma_grid.len(), 10);
        assert_eq!(g.c_grid[0], 2f64.powi(-5));
        assert_eq!(*g.gamma_grid.last().unwrap(), 8.0);
    }

    #[test]
    fn folds_are_balanced_and_seeded() {
        let f = fold_assignment(23, 5, 7);
        for k in 0..5 {
            let count = f.iter().filter(|&&x| x == k).count();
            assert!(count == 4 || count == 5);
        }
        assert_eq!(f, fold_assignment(23, 5, 7));
    }

    #[test]
    fn single_cell_and_determinism() {
        let (rows, y) = data();
        let cfg = SvrConfig {
            grid: GridSearchSpec::single(2.0, 4.0, 5),
            ..SvrConfig::default()
        };
        let r = grid_search(&rows, &y, &cfg, 1).unwrap();
        assert_eq!((r.best.c, r.best.gamma), (2.0, 4.0));
        let cfg = SvrConfig {
            grid: GridSearchSpec {
                c_grid: vec![0.5, 8.0],
                gamma_grid: vec![1.0, 16.0],
                folds: 4,
            },
            ..SvrConfig::default()
        };
        assert_eq!(grid_search(&rows, &y, &cfg, 3).unwrap(), grid_search(&rows, &y, &cfg, 3).unwrap());
    }

    #[test]
    fn too_few_rows() {
        let (rows, y) = data();
        assert!(grid_search(&rows[..3], &y[..3], &SvrConfig::default(), 0).is_err());
    }
}
