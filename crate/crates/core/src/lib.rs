//! Quasi-random sampling from copulas.
//!
//! A small GAN learns a transport map from a latent Gaussian to a target
//! copula; randomized space-filling designs (Sobol, Latin hypercube,
//! orthogonal-array based Latin hypercube) pushed through that map give
//! quasi-random copula samples. Reference samplers for Clayton, Gumbel and
//! Marshall–Olkin copulas, Cramér–von Mises goodness-of-fit statistics and an
//! expected-shortfall variance study are included for validation.

pub mod copulas;
pub mod csvio;
pub mod designs;
pub mod error;
pub mod gan;
pub mod gofstats;
pub mod neuralnet;
pub mod normal;
pub mod qrs;
pub mod risk;
pub mod rng;

pub use error::{Error, Result};
