//! Per-dimension min/max scaling to the unit interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Affine map of each dimension onto `[0, 1]` from training ranges.
/// Constant dimensions map to 0.5; out-of-range values are clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalingSpec {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InsufficientData("cannot fit scaling on zero rows".into()))?;
        let dim = first.len();
        let mut min = first.clone();
        let mut max = first.clone();
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            for (k, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidParameter(format!("non-finite feature value in dimension {k}")));
                }
                min[k] = min[k].min(v);
                max[k] = max[k].max(v);
            }
        }
        Ok(ScalingSpec { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| {
                if hi > lo {
                    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
                } else {
                    0.5
                }
            })
            .collect())
    }

    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}
