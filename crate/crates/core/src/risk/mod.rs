//! Expected shortfall of aggregate losses with standard normal margins.

mod report;
mod study;

pub use report::{records_csv, summary_csv, summary_svg};
pub use study::{log_log_slope, variance_study, Method, StudyConfig, StudyOutput, StudyRecord, SummaryRow};

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::normal_inverse_cdf;

/// Relative slack when snapping `n α` to an integer and checking `n (1 − α) ≥ 1`.
const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsSpec {
    pub alpha: f64,
    pub d: usize,
}

impl EsSpec {
    pub fn new(alpha: f64, d: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("ES level must lie in (0,1), got {alpha}")));
        }
        if d == 0 {
            return Err(Error::invalid("ES dimension must be positive"));
        }
        Ok(Self { alpha, d })
    }
}

/// Row sums of `Φ^{-1}(u_ij)`.
pub fn aggregate_loss(u: ArrayView2<f64>) -> Result<Vec<f64>> {
    u.rows()
        .into_iter()
        .map(|r| r.iter().map(|&x| normal_inverse_cdf(x)).sum::<Result<f64>>())
        .collect()
}

/// `⌈n α⌉`, with `n α` within relative `1e-9` of an integer snapped to it.
fn var_index(n: usize, alpha: f64) -> usize {
    let x = n as f64 * alpha;
    let r = x.round();
    if (x - r).abs() <= SNAP * r.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Mean of the losses strictly above the `⌈n α⌉`-th order statistic, or the
/// maximum when that tail is empty.
pub fn expected_shortfall(losses: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("ES level must lie in (0,1), got {alpha}")));
    }
    let n = losses.len();
    if (n as f64) * (1.0 - alpha) < 1.0 - SNAP {
        return Err(Error::invalid(format!("{n} losses are too few for level {alpha}")));
    }
    if let Some(bad) = losses.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("loss {bad}")));
    }
    let mut sorted = losses.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = var_index(n, alpha).min(n);
    let tail = &sorted[m..];
    if tail.is_empty() {
        return Ok(sorted[n - 1]);
    }
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// The `⌈n α⌉`-th order statistic.
pub fn value_at_risk(losses: &[f64], alpha: f64) -> Result<f64> {
    if losses.is_empty() || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("VaR needs losses and a level in (0,1)"));
    }
    let mut sorted = losses.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = var_index(losses.len(), alpha).clamp(1, losses.len());
    Ok(sorted[m - 1])
}
