//! Monotone logistic remapping of predictions onto the MOS scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `f(s) = (b1 - b2) / (1 + exp(-(s - b3) / |b4|)) + b2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
}

impl LogisticParams {
    pub fn apply(&self, s: f64) -> f64 {
        (self.beta1 - self.beta2) / (1.0 + (-(s - self.beta3) / self.beta4.abs()).exp()) + self.beta2
    }
}

/// Map applied to raw predictions before PCC and RMSE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Remap {
    Logistic(LogisticParams),
    /// Chosen when the least-squares line fits at least as well as the
    /// best logistic curve found.
    Affine { slope: f64, intercept: f64 },
    /// Used for constant predictions.
    Identity,
}

impl Remap {
    pub fn apply(&self, s: f64) -> f64 {
        match *self {
            Remap::Logistic(p) => p.apply(s),
            Remap::Affine { slope, intercept } => slope * s + intercept,
            Remap::Identity => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    /// Best logistic parameters found (in the original units).
    pub logistic: LogisticParams,
    pub logistic_mse: f64,
    pub affine_mse: f64,
    pub remap: Remap,
    /// Mean squared error of `remap` against the targets.
    pub mse: f64,
    /// Set when predictions were constant and the identity map was used.
    pub degenerate: bool,
}

pub const NELDER_MEAD_ITERATIONS: usize = 2000;
const MAX_RESTARTS: usize = 20;

fn mse_of(f: impl Fn(f64) -> f64, pred: &[f64], mos: &[f64]) -> f64 {
    pred.iter().zip(mos).map(|(&s, &m)| (f(s) - m).powi(2)).sum::<f64>() / pred.len() as f64
}

fn affine_fit(pred: &[f64], mos: &[f64]) -> (f64, f64) {
    let n = pred.len() as f64;
    let (ms, mm) = (pred.iter().sum::<f64>() / n, mos.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (s, m) in pred.iter().zip(mos) {
        sxy += (s - ms) * (m - mm);
        sxx += (s - ms) * (s - ms);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, mm - slope * ms)
}

/// Nelder-Mead minimization from `x0` with per-coordinate initial steps.
fn nelder_mead(f: &impl Fn(&[f64]) -> f64, x0: &[f64], steps: &[f64], max_iter: usize) -> (Vec<f64>, f64) {
    let d = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for k in 0..d {
        let mut x = x0.to_vec();
        x[k] += steps[k];
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if values[d] - values[0] <= 1e-15 * values[0].abs() + 1e-30 {
            break;
        }
        let centroid: Vec<f64> = (0..d).map(|k| simplex[..d].iter().map(|x| x[k]).sum::<f64>() / d as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..d).map(|k| centroid[k] + t * (simplex[d][k] - centroid[k])).collect() };
        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = eval(&xe);
            if fe < fr {
                simplex[d] = xe;
                values[d] = fe;
            } else {
                simplex[d] = xr;
                values[d] = fr;
            }
        } else if fr < values[d - 1] {
            simplex[d] = xr;
            values[d] = fr;
        } else {
            let (xc, fc) = if fr < values[d] {
                let xc = along(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < values[d].min(fr) {
                simplex[d] = xc;
                values[d] = fc;
            } else {
                for i in 1..=d {
                    for k in 0..d {
                        simplex[i][k] = simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]);
                    }
                    values[i] = eval(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=d).min_by(|&a, &b| values[a].total_cmp(&values[b])).expect("simplex is non-empty");
    (simplex[best].clone(), values[best])
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt()
}

/// Fits the four-parameter logistic by multi-start Nelder-Mead and keeps
/// whichever of the logistic and affine fits has the smaller MSE.
pub fn logistic_fit(pred: &[f64], mos: &[f64]) -> Result<LogisticFit> {
    if pred.len() != mos.len() {
        return Err(Error::DimensionMismatch {
            expected: pred.len(),
            got: mos.len(),
        });
    }
    if pred.len() < 5 {
        return Err(Error::Evaluation(format!("logistic fit needs at least 5 points, got {}", pred.len())));
    }
    if pred.iter().chain(mos).any(|v| !v.is_finite()) {
        return Err(Error::Evaluation("non-finite value".into()));
    }
    let (slope, intercept) = affine_fit(pred, mos);
    let affine_mse = mse_of(|s| slope * s + intercept, pred, mos);
    let s_scale = std_dev(pred);
    if s_scale == 0.0 {
        let mse = mse_of(|s| s, pred, mos);
        let flat = LogisticParams {
            beta1: pred[0],
            beta2: pred[0],
            beta3: pred[0],
            beta4: 1.0,
        };
        return Ok(LogisticFit {
            logistic: flat,
            logistic_mse: mse_of(|s| flat.apply(s), pred, mos),
            affine_mse,
            remap: Remap::Identity,
            mse,
            degenerate: true,
        });
    }

    // Work in standardized units so the simplex steps are scale-free.
    let s_mean = pred.iter().sum::<f64>() / pred.len() as f64;
    let m_mean = mos.iter().sum::<f64>() / mos.len() as f64;
    let m_scale = std_dev(mos).max(f64::MIN_POSITIVE);
    let zs: Vec<f64> = pred.iter().map(|s| (s - s_mean) / s_scale).collect();
    let zm: Vec<f64> = mos.iter().map(|m| (m - m_mean) / m_scale).collect();
    let objective = |x: &[f64]| {
        let p = LogisticParams {
            beta1: x[0],
            beta2: x[1],
            beta3: x[2],
            beta4: x[3].exp(),
        };
        mse_of(|s| p.apply(s), &zs, &zm)
    };

    let (hi, lo) = zm.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(h, l), &v| (h.max(v), l.min(v)));
    let med = median(&zs);
    let (a, _) = affine_fit(&zs, &zm);
    let wide = 10.0f64;
    let starts = [
        [hi, lo, med, 0.0],
        [lo, hi, med, 0.0],
        // Near-linear region of a wide curve with the affine slope.
        [2.0 * a * wide + a * med, -2.0 * a * wide + a * med, med, wide.ln()],
    ];
    let steps = [0.5, 0.5, 0.5, 0.5];
    let mut best: Option<(Vec<f64>, f64)> = None;
    for x0 in starts {
        let mut x = x0.to_vec();
        let mut fx = objective(&x);
        for _ in 0..MAX_RESTARTS {
            let (xn, fnew) = nelder_mead(&objective, &x, &steps, NELDER_MEAD_ITERATIONS);
            let improved = fnew < fx * (1.0 - 1e-12) - 1e-300;
            if fnew <= fx {
                x = xn;
                fx = fnew;
            }
            if !improved {
                break;
            }
        }
        if best.as_ref().is_none_or(|(_, fb)| fx < *fb) {
            best = Some((x, fx));
        }
    }
    let (x, _) = best.expect("at least one start");
    let logistic = LogisticParams {
        beta1: x[0] * m_scale + m_mean,
        beta2: x[1] * m_scale + m_mean,
        beta3: x[2] * s_scale + s_mean,
        beta4: x[3].exp() * s_scale,
    };
    let logistic_mse = mse_of(|s| logistic.apply(s), pred, mos);
    let (remap, mse) = if logistic_mse <= affine_mse {
        (Remap::Logistic(logistic), logistic_mse)
    } else {
        (Remap::Affine { slope, intercept }, affine_mse)
    };
    Ok(LogisticFit {
        logistic,
        logistic_mse,
        affine_mse,
        remap,
        mse,
        degenerate: false,
    })
}
