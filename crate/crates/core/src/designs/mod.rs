//! Randomized space-filling point sets on `[0,1)^k` and their uniformity.

mod discrepancy;
mod lhd;
mod oa;
mod sobol;

use ndarray::Array2;
use rand::Rng as _;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub use discrepancy::{local_discrepancy, star_discrepancy, MAX_EXACT_DIM, MAX_EXACT_POINTS};
pub use lhd::lhd_points;
pub use oa::{bose_oa, is_prime, oa_lhd_points, OrthogonalArray};
pub use sobol::{sobol_points, Randomization, SOBOL_MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DesignFamily {
    PseudoRandom,
    Sobol,
    Lhd,
    OaLhd,
}

/// An `n × k` matrix of points in `[0,1)^k` together with the design family
/// and seed that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Array2<f64>,
    family: DesignFamily,
    seed: u64,
}

impl PointSet {
    /// Wraps an existing matrix. Every entry must lie in `[0,1)`.
    pub fn new(points: Array2<f64>, family: DesignFamily, seed: u64) -> Result<Self> {
        if let Some(&bad) = points.iter().find(|&&x| !(0.0..1.0).contains(&x)) {
            return Err(Error::Domain {
                value: bad,
                context: "point coordinates must lie in [0,1)",
            });
        }
        Ok(Self { points, family, seed })
    }

    pub(crate) fn from_raw(points: Array2<f64>, family: DesignFamily, seed: u64) -> Self {
        debug_assert!(points.iter().all(|x| (0.0..1.0).contains(x)));
        Self { points, family, seed }
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn k(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn into_points(self) -> Array2<f64> {
        self.points
    }

    pub fn family(&self) -> DesignFamily {
        self.family
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// I.i.d. uniform points on the open cube.
pub fn pseudo_random_points(n: usize, k: usize, seed: u64) -> PointSet {
    let mut rng = rng::stream(seed);
    let points = Array2::from_shape_simple_fn((n, k), || {
        let x: f64 = rng.sample(Open01);
        x
    });
    PointSet::from_raw(points, DesignFamily::PseudoRandom, seed)
}

/// A point-set recipe, resolved to concrete points by [`Design::points`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Design {
    PseudoRandom,
    Sobol(Randomization),
    Lhd,
    /// OA-based LHD on a Bose array; `n` must be the square of a prime `s`
    /// with `k <= s + 1`.
    OaLhd,
}

impl Design {
    pub fn family(&self) -> DesignFamily {
        match self {
            Design::PseudoRandom => DesignFamily::PseudoRandom,
            Design::Sobol(_) => DesignFamily::Sobol,
            Design::Lhd => DesignFamily::Lhd,
            Design::OaLhd => DesignFamily::OaLhd,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Design::PseudoRandom => "random",
            Design::Sobol(_) => "sobol",
            Design::Lhd => "lhd",
            Design::OaLhd => "oalhd",
        }
    }

    pub fn points(&self, n: usize, k: usize, seed: u64) -> Result<PointSet> {
        match *self {
            Design::PseudoRandom => Ok(pseudo_random_points(n, k, seed)),
            Design::Sobol(r) => sobol_points(n, k, seed, r),
            Design::Lhd => lhd_points(n, k, seed),
            Design::OaLhd => {
                let s = oa_level_count(n)?;
                oa_lhd_points(&bose_oa(s, k)?, seed)
            }
        }
    }
}

/// The prime `s` with `s * s == n`, if there is one.
pub fn oa_level_count(n: usize) -> Result<usize> {
    let s = (n as f64).sqrt().round() as usize;
    if s * s == n && is_prime(s) {
        Ok(s)
    } else {
        Err(Error::invalid(format!(
            "OA-based LHD needs n = s^2 with s prime, got n = {n}"
        )))
    }
}

/// Point in stratum `bin` of `n` equal bins, at fractional offset `frac`,
/// nudged so that `floor(n * x) == bin` holds in floating point.
pub(crate) fn stratum_point(bin: usize, n: usize, frac: f64) -> f64 {
    let nf = n as f64;
    let mut x = ((bin as f64 + frac) / nf).min(1.0f64.next_down());
    while (x * nf).floor() as usize > bin {
        x = x.next_down();
    }
    while ((x * nf).floor() as usize) < bin {
        x = x.next_up();
    }
    x
}
