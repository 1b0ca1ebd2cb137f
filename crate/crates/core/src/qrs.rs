//! Quasi-random copula samples: design points `v_i` on `[0,1)^k`, mapped
//! through `Φ^{-1}` and then through the trained generator.

use ndarray::Array2;
use rayon::prelude::*;

use crate::designs::{Design, Randomization};
use crate::error::{Error, Result};
use crate::gan::{gan_generate, GanModel};
use crate::normal::normal_inverse_cdf;

/// Design coordinates are clamped into `[2^-53, 1 - 2^-53]` before `Φ^{-1}`.
pub const COORD_MIN: f64 = f64::EPSILON / 2.0;
pub const COORD_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy)]
pub struct QrsRequest<'a> {
    pub model: &'a GanModel,
    pub design: Design,
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QrsOutput {
    pub samples: Array2<f64>,
    /// Design coordinates that had to be moved off the boundary.
    pub clamped: usize,
}

/// `Φ^{-1}` applied entrywise after clamping; returns the latent matrix and
/// the number of clamped coordinates.
pub fn latent_from_design(v: &Array2<f64>) -> Result<(Array2<f64>, usize)> {
    let clamped = v.iter().filter(|&&x| !(COORD_MIN..=COORD_MAX).contains(&x)).count();
    if let Some(&bad) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Domain { value: bad, context: "design coordinates must lie in [0,1]" });
    }
    let v = v.as_standard_layout();
    let flat = v.as_slice().expect("standard layout is contiguous");
    let z = flat
        .par_iter()
        .map(|&x| normal_inverse_cdf(x.clamp(COORD_MIN, COORD_MAX)))
        .collect::<Result<Vec<_>>>()?;
    let z = Array2::from_shape_vec(v.raw_dim(), z).expect("shape preserved");
    Ok((z, clamped))
}

pub fn qrs_sample(req: &QrsRequest) -> Result<QrsOutput> {
    if req.design == Design::Sobol(Randomization::None) {
        return Err(Error::invalid(
            "unrandomized Sobol points contain the origin; use a digital shift or scrambling",
        ));
    }
    let k = req.model.k();
    if req.n == 0 {
        return Ok(QrsOutput { samples: Array2::zeros((0, req.model.d())), clamped: 0 });
    }
    let points = req.design.points(req.n, k, req.seed)?;
    if points.k() != k {
        return Err(Error::DimensionMismatch { expected: k, got: points.k() });
    }
    let (z, clamped) = latent_from_design(points.points())?;
    if clamped > 0 {
        log::debug!("{clamped} design coordinates clamped away from the boundary");
    }
    let samples = gan_generate(req.model, z.view())?;
    Ok(QrsOutput { samples, clamped })
}
