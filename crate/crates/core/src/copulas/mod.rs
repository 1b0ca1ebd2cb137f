//! Reference copulas: CDFs, Kendall's tau calibration, conditional
//! distribution method (inverse Rosenblatt) sampling, and rank-based
//! pseudo-observations.

mod cdm;
mod pseudo;
mod tau;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cdm::{cdm_transform, conditional_cdf, sample_cdm};
pub use pseudo::{pseudo_observations, PseudoObservations};
pub use tau::{kendall_tau_empirical, kendall_tau_pair};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// Generator `psi(t) = (1 + t)^(-1/theta)`, `theta > 0`.
    Clayton { theta: f64 },
    /// Generator `psi(t) = exp(-t^(1/theta))`, `theta >= 1`.
    Gumbel { theta: f64 },
    /// `C(u1, u2) = min(u1^(1-alpha1) u2, u1 u2^(1-alpha2))`, bivariate only.
    MarshallOlkin { alpha1: f64, alpha2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Clayton,
    Gumbel,
    MarshallOlkin,
}

impl Family {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::Clayton { .. } => FamilyKind::Clayton,
            Family::Gumbel { .. } => FamilyKind::Gumbel,
            Family::MarshallOlkin { .. } => FamilyKind::MarshallOlkin,
        }
    }
}

/// A validated copula family together with its dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct CopulaSpec {
    family: Family,
    d: usize,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    #[serde(flatten)]
    family: Family,
    d: usize,
}

impl TryFrom<RawSpec> for CopulaSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        CopulaSpec::new(raw.family, raw.d)
    }
}

impl From<CopulaSpec> for RawSpec {
    fn from(spec: CopulaSpec) -> Self {
        RawSpec { family: spec.family, d: spec.d }
    }
}

impl CopulaSpec {
    pub fn new(family: Family, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid(format!("copula dimension must be at least 2, got {d}")));
        }
        match family {
            Family::Clayton { theta } if !(theta > 0.0 && theta.is_finite()) => {
                Err(Error::invalid(format!("Clayton needs theta > 0, got {theta}")))
            }
            Family::Gumbel { theta } if !(theta >= 1.0 && theta.is_finite()) => {
                Err(Error::invalid(format!("Gumbel needs theta >= 1, got {theta}")))
            }
            Family::MarshallOlkin { alpha1, alpha2 } => {
                if !((0.0..=1.0).contains(&alpha1) && (0.0..=1.0).contains(&alpha2)) {
                    Err(Error::invalid(format!(
                        "Marshall-Olkin needs alpha1, alpha2 in [0,1], got {alpha1}, {alpha2}"
                    )))
                } else if d != 2 {
                    Err(Error::invalid("Marshall-Olkin copula is bivariate"))
                } else {
                    Ok(Self { family, d })
                }
            }
            _ => Ok(Self { family, d }),
        }
    }

    pub fn clayton(theta: f64, d: usize) -> Result<Self> {
        Self::new(Family::Clayton { theta }, d)
    }

    pub fn gumbel(theta: f64, d: usize) -> Result<Self> {
        Self::new(Family::Gumbel { theta }, d)
    }

    pub fn marshall_olkin(alpha1: f64, alpha2: f64) -> Result<Self> {
        Self::new(Family::MarshallOlkin { alpha1, alpha2 }, 2)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn d(&self) -> usize {
        self.d
    }
}

/// `C(u)` for `u` in `[0,1]^d`; zero whenever a coordinate is zero.
pub fn copula_cdf(spec: &CopulaSpec, u: &[f64]) -> Result<f64> {
    if u.len() != spec.d {
        return Err(Error::DimensionMismatch { expected: spec.d, got: u.len() });
    }
    if let Some(&bad) = u.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::Domain { value: bad, context: "copula argument must lie in [0,1]^d" });
    }
    if u.contains(&0.0) {
        return Ok(0.0);
    }
    Ok(match spec.family {
        Family::Clayton { theta } => {
            let s: f64 = u.iter().map(|&x| x.powf(-theta)).sum();
            (s - spec.d as f64 + 1.0).powf(-1.0 / theta)
        }
        Family::Gumbel { theta } => {
            let s: f64 = u.iter().map(|&x| (-x.ln()).powf(theta)).sum();
            (-s.powf(1.0 / theta)).exp()
        }
        Family::MarshallOlkin { alpha1, alpha2 } => {
            let (u1, u2) = (u[0], u[1]);
            (u1.powf(1.0 - alpha1) * u2).min(u1 * u2.powf(1.0 - alpha2))
        }
    })
}

/// Parameter giving Kendall's tau `tau`: Clayton `2 tau / (1 - tau)`,
/// Gumbel `1 / (1 - tau)`.
pub fn theta_from_tau(kind: FamilyKind, tau: f64) -> Result<f64> {
    match kind {
        FamilyKind::Clayton if tau > 0.0 && tau < 1.0 => Ok(2.0 * tau / (1.0 - tau)),
        FamilyKind::Gumbel if (0.0..1.0).contains(&tau) => Ok(1.0 / (1.0 - tau)),
        FamilyKind::MarshallOlkin => {
            Err(Error::invalid("Marshall-Olkin has two parameters; tau does not determine them"))
        }
        _ => Err(Error::Domain { value: tau, context: "Kendall's tau outside the family's range" }),
    }
}

/// Population Kendall's tau: Clayton `theta / (theta + 2)`, Gumbel
/// `1 - 1/theta`, Marshall–Olkin `a1 a2 / (a1 + a2 - a1 a2)`.
pub fn kendall_tau(spec: &CopulaSpec) -> f64 {
    match spec.family {
        Family::Clayton { theta } => theta / (theta + 2.0),
        Family::Gumbel { theta } => 1.0 - 1.0 / theta,
        Family::MarshallOlkin { alpha1, alpha2 } => {
            let denom = alpha1 + alpha2 - alpha1 * alpha2;
            if denom == 0.0 {
                0.0
            } else {
                alpha1 * alpha2 / denom
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    fn families(d: usize) -> Vec<CopulaSpec> {
        let mut v = vec![CopulaSpec::clayton(2.0 / 3.0, d).unwrap(), CopulaSpec::gumbel(4.0 / 3.0, d).unwrap()];
        if d == 2 {
            v.push(CopulaSpec::marshall_olkin(0.75, 0.60).unwrap());
        }
        v
    }

    #[test]
    fn validation() {
        assert!(CopulaSpec::clayton(0.0, 3).is_err());
        assert!(CopulaSpec::gumbel(0.9, 3).is_err());
        assert!(CopulaSpec::new(Family::MarshallOlkin { alpha1: 0.5, alpha2: 0.5 }, 3).is_err());
        assert!(CopulaSpec::marshall_olkin(1.2, 0.5).is_err());
        assert!(CopulaSpec::clayton(1.0, 1).is_err());
    }

    #[test]
    fn clayton_boundary() {
        let c = CopulaSpec::clayton(2.0 / 3.0, 3).unwrap();
        assert!((copula_cdf(&c, &[0.7, 1.0, 1.0]).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(copula_cdf(&c, &[0.7, 0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn marshall_olkin_value() {
        let c = CopulaSpec::marshall_olkin(0.75, 0.60).unwrap();
        let v = copula_cdf(&c, &[0.5, 0.5]).unwrap();
        // 0.5^1.25 = 0.4204 and 0.5^1.4 = 0.3789; the second term is smaller
        assert!((v - 0.5f64.powf(1.4)).abs() < 1e-15);
        assert!((v - 0.378_929_141_627_599_6).abs() < 1e-12);
    }

    #[test]
    fn gumbel_one_is_independence() {
        let c = CopulaSpec::gumbel(1.0, 3).unwrap();
        let mut rng = crate::rng::stream(5);
        for _ in 0..100 {
            let u: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
            let prod: f64 = u.iter().product();
            assert!((copula_cdf(&c, &u).unwrap() - prod).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_margins() {
        let mut rng = crate::rng::stream(9);
        for d in [2usize, 3, 5] {
            for spec in families(d) {
                for _ in 0..100 {
                    let x: f64 = rng.random();
                    for j in 0..d {
                        let mut u = vec![1.0; d];
                        u[j] = x;
                        assert!((copula_cdf(&spec, &u).unwrap() - x).abs() < 1e-12, "{spec:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn componentwise_nondecreasing() {
        let mut rng = crate::rng::stream(10);
        for d in [2usize, 3] {
            for spec in families(d) {
                for _ in 0..1000 {
                    let u: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                    let mut w = u.clone();
                    let j = rng.random_range(0..d);
                    w[j] = u[j] + (1.0 - u[j]) * rng.random::<f64>();
                    assert!(copula_cdf(&spec, &u).unwrap() <= copula_cdf(&spec, &w).unwrap() + 1e-15);
                }
            }
        }
    }

    #[test]
    fn argument_errors() {
        let c = CopulaSpec::clayton(1.0, 2).unwrap();
        assert!(matches!(copula_cdf(&c, &[0.5]), Err(Error::DimensionMismatch { .. })));
        assert!(copula_cdf(&c, &[0.5, 1.5]).is_err());
    }

    #[test]
    fn tau_inversion() {
        assert!((theta_from_tau(FamilyKind::Clayton, 0.25).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((theta_from_tau(FamilyKind::Gumbel, 0.25).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(theta_from_tau(FamilyKind::Gumbel, 0.0).unwrap(), 1.0);
        assert!(theta_from_tau(FamilyKind::Clayton, 0.0).is_err());
        assert!(theta_from_tau(FamilyKind::Clayton, 1.0).is_err());
        assert!(theta_from_tau(FamilyKind::Gumbel, 1.0).is_err());
        assert!(theta_from_tau(FamilyKind::MarshallOlkin, 0.3).is_err());
        for tau in [0.1, 0.25, 0.6] {
            let c = CopulaSpec::clayton(theta_from_tau(FamilyKind::Clayton, tau).unwrap(), 2).unwrap();
            assert!((kendall_tau(&c) - tau).abs() < 1e-14);
            let g = CopulaSpec::gumbel(theta_from_tau(FamilyKind::Gumbel, tau).unwrap(), 2).unwrap();
            assert!((kendall_tau(&g) - tau).abs() < 1e-14);
        }
    }

    #[test]
    fn spec_json_roundtrip_validates() {
        let c = CopulaSpec::clayton(0.5, 3).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(text, r#"{"family":"clayton","theta":0.5,"d":3}"#);
        assert_eq!(serde_json::from_str::<CopulaSpec>(&text).unwrap(), c);
        assert!(serde_json::from_str::<CopulaSpec>(r#"{"family":"gumbel","theta":0.5,"d":3}"#).is_err());
    }
}
