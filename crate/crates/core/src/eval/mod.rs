//! Prediction accuracy: logistic remapping, PCC, SROCC and RMSE.

mod correlation;
mod logistic;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use correlation::{average_ranks, pcc, performance_gain, rmse, srocc};
pub use logistic::{logistic_fit, LogisticFit, LogisticParams, Remap, NELDER_MEAD_ITERATIONS};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub skipped: usize,
    /// On remapped predictions; `None` when undefined.
    pub pcc: Option<f64>,
    /// On raw predictions; `None` when undefined.
    pub srocc: Option<f64>,
    /// On remapped predictions, in MOS units.
    pub rmse: f64,
    pub logistic: LogisticParams,
    pub remap: Remap,
}

/// Remaps `pred` onto `mos` and scores the result. With fewer than five
/// points the least-squares line is used as the remap.
pub fn evaluate(pred: &[f64], mos: &[f64]) -> Result<EvalReport> {
    if pred.len() != mos.len() {
        return Err(Error::DimensionMismatch {
            expected: pred.len(),
            got: mos.len(),
        });
    }
    if pred.len() < 3 {
        return Err(Error::Evaluation(format!("need at least 3 predictions, got {}", pred.len())));
    }
    let (remap, logistic) = if pred.len() >= 5 {
        let fit = logistic_fit(pred, mos)?;
        (fit.remap, fit.logistic)
    } else {
        let n = pred.len() as f64;
        let (ms, mm) = (pred.iter().sum::<f64>() / n, mos.iter().sum::<f64>() / n);
        let sxx: f64 = pred.iter().map(|s| (s - ms).powi(2)).sum();
        let sxy: f64 = pred.iter().zip(mos).map(|(s, m)| (s - ms) * (m - mm)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let flat = LogisticParams {
            beta1: mm,
            beta2: mm,
            beta3: ms,
            beta4: 1.0,
        };
        (
            Remap::Affine {
                slope,
                intercept: mm - slope * ms,
            },
            flat,
        )
    };
    let mapped: Vec<f64> = pred.iter().map(|&s| remap.apply(s)).collect();
    Ok(EvalReport {
        n: pred.len(),
        skipped: 0,
        pcc: pcc(&mapped, mos)?,
        srocc: srocc(pred, mos)?,
        rmse: rmse(&mapped, mos)?,
        logistic,
        remap,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x}"))
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "metric,value";

    /// `(metric, value)` rows in a fixed order.
    pub fn rows(&self) -> Vec<(&'static str, String)> {
        let remap = match self.remap {
            Remap::Logistic(_) => "logistic",
            Remap::Affine { .. } => "affine",
            Remap::Identity => "identity",
        };
        vec![
            ("n", self.n.to_string()),
            ("skipped", self.skipped.to_string()),
            ("pcc", fmt_opt(self.pcc)),
            ("srocc", fmt_opt(self.srocc)),
            ("rmse", format!("{}", self.rmse)),
            ("beta1", format!("{}", self.logistic.beta1)),
            ("beta2", format!("{}", self.logistic.beta2)),
            ("beta3", format!("{}", self.logistic.beta3)),
            ("beta4", format!("{}", self.logistic.beta4)),
            ("remap", remap.to_string()),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for (k, v) in self.rows() {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.4}"));
        writeln!(f, "{:<8} {:>10}", "Metric", "Value")?;
        writeln!(f, "{:<8} {:>10}", "PCC", show(self.pcc))?;
        writeln!(f, "{:<8} {:>10}", "SROCC", show(self.srocc))?;
        writeln!(f, "{:<8} {:>10.4}", "RMSE", self.rmse)?;
        writeln!(f, "{:<8} {:>10}", "N", self.n)?;
        writeln!(f, "{:<8} {:>10}", "Skipped", self.skipped)?;
        let b = &self.logistic;
        write!(
            f,
            "logistic beta = ({:.4}, {:.4}, {:.4}, {:.4})",
            b.beta1, b.beta2, b.beta3, b.beta4
        )
    }
}
