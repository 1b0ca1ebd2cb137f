//! Conditional distribution method: `u_1 = v_1`,
//! `u_j = C^{-1}(v_j | u_1, ..., u_{j-1})`.

use ndarray::Array2;
use rayon::prelude::*;

use super::{CopulaSpec, Family};
use crate::designs::PointSet;
use crate::error::{Error, Result};

const GUMBEL_MAX_DIM: usize = 3;
const BRACKET_LO: f64 = 1e-14;
const BRACKET_HI: f64 = 1.0 - 1e-14;
const BISECTION_CAP: usize = 200;
const BISECTION_TOL: f64 = 1e-10;

/// Smallest and largest coordinates fed to the transform; design points on
/// the cube boundary are pulled inside.
const EDGE: f64 = 1.0 / 9_007_199_254_740_992.0;

fn check_dim(spec: &CopulaSpec, got: usize) -> Result<()> {
    if got != spec.d {
        return Err(Error::DimensionMismatch { expected: spec.d, got });
    }
    if let Family::Gumbel { .. } = spec.family {
        if spec.d > GUMBEL_MAX_DIM {
            return Err(Error::DimensionUnsupported { requested: spec.d, max: GUMBEL_MAX_DIM });
        }
    }
    Ok(())
}

/// `log |psi^{(order)}(t)|` for the Gumbel generator `exp(-t^a)`, `a = 1/theta`.
fn gumbel_log_derivative(t: f64, a: f64, order: usize) -> f64 {
    let ta = t.powf(a);
    match order {
        1 => -ta + a.ln() + (a - 1.0) * t.ln(),
        2 => -ta + a.ln() + (a - 2.0) * t.ln() + (a * ta + 1.0 - a).ln(),
        _ => unreachable!("Gumbel derivatives implemented up to order 2"),
    }
}

/// `C(u_j | u_1, ..., u_{j-1})` where `prefix = (u_1, ..., u_{j-1})`, `j >= 2`.
pub fn conditional_cdf(spec: &CopulaSpec, prefix: &[f64], uj: f64) -> Result<f64> {
    let j = prefix.len() + 1;
    if j < 2 || j > spec.d {
        return Err(Error::invalid(format!("conditioning index {j} outside 2..={}", spec.d)));
    }
    if let Family::Gumbel { .. } = spec.family {
        if j > GUMBEL_MAX_DIM {
            return Err(Error::DimensionUnsupported { requested: j, max: GUMBEL_MAX_DIM });
        }
    }
    Ok(match spec.family {
        Family::Clayton { theta } => {
            let t: f64 = prefix.iter().map(|&u| u.powf(-theta)).sum::<f64>() - (j as f64 - 2.0);
            let ratio = (t + uj.powf(-theta) - 1.0) / t;
            ratio.powf(-(1.0 / theta + j as f64 - 1.0))
        }
        Family::Gumbel { theta } => {
            let a = 1.0 / theta;
            let s: f64 = prefix.iter().map(|&u| (-u.ln()).powf(theta)).sum();
            let s_next = s + (-uj.ln()).powf(theta);
            let order = j - 1;
            (gumbel_log_derivative(s_next, a, order) - gumbel_log_derivative(s, a, order)).exp()
        }
        Family::MarshallOlkin { alpha1, alpha2 } => {
            let u1 = prefix[0];
            let atom = if alpha2 == 0.0 { f64::INFINITY } else { u1.powf(alpha1 / alpha2) };
            if uj < atom {
                (1.0 - alpha1) * u1.powf(-alpha1) * uj
            } else {
                uj.powf(1.0 - alpha2)
            }
        }
    })
}

fn clayton_inverse(theta: f64, prefix: &[f64], v: f64) -> f64 {
    let j = prefix.len() + 1;
    let t: f64 = prefix.iter().map(|&u| u.powf(-theta)).sum::<f64>() - (j as f64 - 2.0);
    let w = v.powf(-theta / (1.0 + theta * (j as f64 - 1.0)));
    (1.0 + t * (w - 1.0)).powf(-1.0 / theta)
}

fn marshall_olkin_inverse(alpha1: f64, alpha2: f64, u1: f64, v: f64) -> f64 {
    if alpha2 == 0.0 {
        // C(u1, u2) = u1 u2
        return v;
    }
    let big_a = u1.powf(alpha1 / alpha2 - alpha1);
    if v < (1.0 - alpha1) * big_a {
        v * u1.powf(alpha1) / (1.0 - alpha1)
    } else if v >= big_a {
        v.powf(1.0 / (1.0 - alpha2))
    } else {
        u1.powf(alpha1 / alpha2)
    }
}

fn bisect(spec: &CopulaSpec, prefix: &[f64], v: f64) -> Result<f64> {
    let f = |u: f64| conditional_cdf(spec, prefix, u);
    let (mut lo, mut hi) = (BRACKET_LO, BRACKET_HI);
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if !(f_lo.is_finite() && f_hi.is_finite()) {
        return Err(Error::NonConvergent(format!(
            "conditional CDF not finite on the bracket (prefix {prefix:?}, v = {v})"
        )));
    }
    if v <= f_lo {
        return Ok(lo);
    }
    if v >= f_hi {
        return Ok(hi);
    }
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm.is_nan() {
            return Err(Error::NonConvergent(format!(
                "conditional CDF is NaN at u = {mid} (prefix {prefix:?}, v = {v})"
            )));
        }
        if fm < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo > BISECTION_TOL {
        return Err(Error::NonConvergent(format!(
            "bracket [{lo}, {hi}] wider than {BISECTION_TOL} after {BISECTION_CAP} steps (prefix {prefix:?}, v = {v})"
        )));
    }
    Ok(0.5 * (lo + hi))
}

fn transform_into(spec: &CopulaSpec, v: &[f64], out: &mut [f64]) -> Result<()> {
    out[0] = v[0];
    for j in 1..spec.d {
        let (prefix, rest) = out.split_at_mut(j);
        rest[0] = match spec.family {
            Family::Clayton { theta } => clayton_inverse(theta, prefix, v[j]),
            Family::Gumbel { .. } => bisect(spec, prefix, v[j])?,
            Family::MarshallOlkin { alpha1, alpha2 } => marshall_olkin_inverse(alpha1, alpha2, prefix[0], v[j]),
        };
    }
    Ok(())
}

/// Inverse Rosenblatt transform of `v` in the open cube `(0,1)^d`.
pub fn cdm_transform(spec: &CopulaSpec, v: &[f64]) -> Result<Vec<f64>> {
    check_dim(spec, v.len())?;
    if let Some(&bad) = v.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::Domain { value: bad, context: "CDM input must lie in the open unit cube" });
    }
    let mut out = vec![0.0; spec.d];
    transform_into(spec, v, &mut out)?;
    Ok(out)
}

/// Row-wise CDM transform of the first `d` coordinates of each source point.
/// Coordinates are clamped to `[2^-53, 1 - 2^-53]` first.
pub fn sample_cdm(spec: &CopulaSpec, source: &PointSet) -> Result<Array2<f64>> {
    let d = spec.d;
    if source.k() < d {
        return Err(Error::DimensionMismatch { expected: d, got: source.k() });
    }
    check_dim(spec, d)?;
    let pts = source.points();
    let rows: Vec<Vec<f64>> = (0..source.n())
        .into_par_iter()
        .map(|i| {
            let v: Vec<f64> = (0..d).map(|j| pts[[i, j]].clamp(EDGE, 1.0 - EDGE)).collect();
            let mut out = vec![0.0; d];
            transform_into(spec, &v, &mut out).map(|_| out)
        })
        .collect::<Result<_>>()?;
    Ok(Array2::from_shape_vec((rows.len(), d), rows.into_iter().flatten().collect())
        .expect("rows have length d"))
}
