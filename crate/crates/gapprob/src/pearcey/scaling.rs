//! Finite-n log-probabilities Q_z against the Pearcey log-determinant.

use serde::{Deserialize, Serialize};

use crate::domain::{IntervalUnion, PrecisionConfig};
use crate::ensemble_mc::scaled_qz;
use crate::error::{Error, Result};
use crate::pearcey::fredholm::fredholm_log_det_mp;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub z: f64,
    pub q_z: f64,
    pub q: f64,
    pub abs_diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub s: f64,
    pub gap: IntervalUnion,
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of log|Q_z - Q| against log z.
    pub slope: Option<f64>,
    pub strictly_decreasing: bool,
}

/// Gauss order and digits used for the limiting determinant.
const LIMIT_ORDER: usize = 60;
const LIMIT_DIGITS: u32 = 30;

pub fn scaling_limit_report(s: f64, gap: &IntervalUnion, n_list: &[usize], prec: &PrecisionConfig) -> Result<ScalingReport> {
    if n_list.is_empty() {
        return Err(Error::invalid("n_list is empty"));
    }
    if n_list.iter().any(|n| *n < 2 || n % 2 == 1) {
        return Err(Error::invalid("every n must be an even integer >= 2"));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("n_list must be strictly ascending"));
    }
    let q = fredholm_log_det_mp(s, gap, LIMIT_ORDER, LIMIT_DIGITS)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let z = (2.0 / n as f64).powf(0.25);
        let q_z = scaled_qz(s, gap, n, 1, prec)?;
        rows.push(ScalingRow { n, z, q_z, q, abs_diff: (q_z - q).abs() });
    }
    let strictly_decreasing = rows.windows(2).all(|w| w[1].abs_diff < w[0].abs_diff);
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.abs_diff > 0.0).map(|r| (r.z.ln(), r.abs_diff.ln())).collect();
    Ok(ScalingReport { s, gap: gap.clone(), rows, slope: fit_slope(&pts), strictly_decreasing })
}

fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
