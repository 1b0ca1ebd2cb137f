use std::fmt;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{aggregate_loss, expected_shortfall, EsSpec};
use crate::copulas::{sample_cdm, CopulaSpec};
use crate::designs::{oa_level_count, Design, Randomization};
use crate::error::{Error, Result};
use crate::gan::GanModel;
use crate::qrs::{qrs_sample, QrsRequest};
use crate::rng::{derive_seed, hash_str};

/// Sampler pipelines compared by the study, in canonical output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    CdmMc,
    CdmSobol,
    GanSobol,
    GanLhd,
    GanOaLhd,
    GanMc,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::CdmMc, Method::CdmSobol, Method::GanSobol, Method::GanLhd, Method::GanOaLhd, Method::GanMc];

    pub fn name(self) -> &'static str {
        match self {
            Method::CdmMc => "cdm-mc",
            Method::CdmSobol => "cdm-sobol",
            Method::GanSobol => "gan-sobol",
            Method::GanLhd => "gan-lhd",
            Method::GanOaLhd => "gan-oalhd",
            Method::GanMc => "gan-mc",
        }
    }

    pub fn uses_gan(self) -> bool {
        !matches!(self, Method::CdmMc | Method::CdmSobol)
    }

    pub fn design(self, randomization: Randomization) -> Design {
        match self {
            Method::CdmMc | Method::GanMc => Design::PseudoRandom,
            Method::CdmSobol | Method::GanSobol => Design::Sobol(randomization),
            Method::GanLhd => Design::Lhd,
            Method::GanOaLhd => Design::OaLhd,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub alpha: f64,
    pub methods: Vec<Method>,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    pub randomization: Randomization,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            alpha: 0.99,
            methods: vec![Method::CdmMc, Method::CdmSobol, Method::GanSobol, Method::GanLhd, Method::GanMc],
            n_grid: vec![1000, 2000, 5000, 10_000],
            replications: 25,
            master_seed: 0,
            randomization: Randomization::DigitalShift,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub method: Method,
    pub design: Design,
    pub n: usize,
    pub replication: usize,
    pub estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub design: Design,
    pub n: usize,
    /// Sample standard deviation over replications; `None` with fewer than two.
    pub sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutput {
    pub records: Vec<StudyRecord>,
    pub summary: Vec<SummaryRow>,
    /// Human-readable reasons for skipped (method, n) combinations.
    pub skipped: Vec<String>,
}

fn infeasible(method: Method, n: usize, alpha: f64, has_model: bool) -> Option<String> {
    if method.uses_gan() && !has_model {
        return Some(format!("{method} at n = {n}: no trained model supplied"));
    }
    if method == Method::GanOaLhd && oa_level_count(n).is_err() {
        return Some(format!("{method} at n = {n}: n is not the square of a prime"));
    }
    if (n as f64) * (1.0 - alpha) < 1.0 - 1e-9 {
        return Some(format!("{method} at n = {n}: too few samples for level {alpha}"));
    }
    None
}

fn replicate(
    method: Method,
    design: Design,
    n: usize,
    seed: u64,
    es: &EsSpec,
    copula: &CopulaSpec,
    model: Option<&GanModel>,
) -> Result<f64> {
    let u: Array2<f64> = match model {
        Some(model) if method.uses_gan() => qrs_sample(&QrsRequest { model, design, n, seed })?.samples,
        _ => sample_cdm(copula, &design.points(n, copula.d(), seed)?)?,
    };
    let estimate = expected_shortfall(&aggregate_loss(u.view())?, es.alpha)?;
    if !estimate.is_finite() {
        return Err(Error::NonFinite(format!("{method} estimate at n = {n}")));
    }
    Ok(estimate)
}

/// Replicated ES estimates for every feasible (method, n) pair.
///
/// Replication `r` of method `m` uses seed `mix64(master ^ mix64(hash(m)) ^ r)`,
/// so the records do not depend on the execution schedule.
pub fn variance_study(
    es: &EsSpec,
    copula: &CopulaSpec,
    model: Option<&GanModel>,
    config: &StudyConfig,
) -> Result<StudyOutput> {
    if es.d != copula.d() {
        return Err(Error::DimensionMismatch { expected: es.d, got: copula.d() });
    }
    if let Some(m) = model {
        if m.d() != es.d {
            return Err(Error::DimensionMismatch { expected: es.d, got: m.d() });
        }
    }
    if config.replications == 0 {
        return Err(Error::invalid("the study needs at least one replication"));
    }
    if config.randomization == Randomization::None
        && config.methods.iter().any(|m| matches!(m, Method::CdmSobol | Method::GanSobol))
    {
        return Err(Error::invalid("Sobol methods need a randomized point set"));
    }

    let mut methods = config.methods.clone();
    methods.sort();
    methods.dedup();
    let mut n_grid = config.n_grid.clone();
    n_grid.sort_unstable();
    n_grid.dedup();

    let mut skipped = Vec::new();
    let mut tasks = Vec::new();
    for &method in &methods {
        for &n in &n_grid {
            if let Some(reason) = infeasible(method, n, es.alpha, model.is_some()) {
                log::info!("skipping {reason}");
                skipped.push(reason);
                continue;
            }
            tasks.extend((0..config.replications).map(|r| (method, n, r)));
        }
    }

    let mut records = tasks
        .par_iter()
        .map(|&(method, n, r)| {
            let seed = derive_seed(config.master_seed, hash_str(method.name()), r as u64);
            let design = method.design(config.randomization);
            let estimate = replicate(method, design, n, seed, es, copula, model)?;
            Ok(StudyRecord { method, design, n, replication: r, estimate })
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| (a.method, a.n, a.replication).cmp(&(b.method, b.n, b.replication)));

    let summary = records
        .chunk_by(|a, b| a.method == b.method && a.n == b.n)
        .map(|group| SummaryRow {
            method: group[0].method,
            design: group[0].design,
            n: group[0].n,
            sd: sample_sd(group.iter().map(|r| r.estimate)),
        })
        .collect();
    Ok(StudyOutput { records, summary, skipped })
}

fn sample_sd(xs: impl Iterator<Item = f64> + Clone) -> Option<f64> {
    let n = xs.clone().count();
    if n < 2 {
        return None;
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    let ss: f64 = xs.map(|x| (x - mean) * (x - mean)).sum();
    Some((ss / (n - 1) as f64).sqrt())
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("slope needs at least two paired points"));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::invalid("log-log slope needs positive finite values"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("slope needs at least two distinct x values"));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clayton() -> (EsSpec, CopulaSpec) {
        (EsSpec::new(0.99, 3).unwrap(), CopulaSpec::clayton(2.0 / 3.0, 3).unwrap())
    }

    fn config(methods: Vec<Method>, n_grid: Vec<usize>, replications: usize) -> StudyConfig {
        StudyConfig { methods, n_grid, replications, master_seed: 17, ..StudyConfig::default() }
    }

    #[test]
    fn single_replication_has_missing_sd() {
        let (es, cop) = clayton();
        let out = variance_study(&es, &cop, None, &config(vec![Method::CdmMc], vec![200, 100], 1)).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.records[0].n, 100);
        assert!(out.summary.iter().all(|s| s.sd.is_none()));
    }

    #[test]
    fn infeasible_pairs_are_skipped() {
        let (es, cop) = clayton();
        let cfg = config(vec![Method::GanSobol, Method::CdmSobol, Method::CdmMc], vec![50, 200], 3);
        let out = variance_study(&es, &cop, None, &cfg).unwrap();
        // n = 50 is below the level and the GAN method has no model
        assert_eq!(out.skipped.len(), 4);
        assert_eq!(out.records.len(), 6);
        assert_eq!(out.records[0].method, Method::CdmMc);
        assert!(out.summary.iter().all(|s| s.sd.unwrap() > 0.0));
    }

    #[test]
    fn records_do_not_depend_on_thread_count() {
        let (es, cop) = clayton();
        let cfg = config(vec![Method::CdmSobol, Method::CdmMc], vec![128, 256], 4);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| variance_study(&es, &cop, None, &cfg).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one.records.len(), 16);
    }

    #[test]
    fn replication_seeds_follow_derivation() {
        let (es, cop) = clayton();
        let out = variance_study(&es, &cop, None, &config(vec![Method::CdmMc], vec![300], 2)).unwrap();
        let seed = derive_seed(17, hash_str("cdm-mc"), 1);
        let direct = replicate(Method::CdmMc, Design::PseudoRandom, 300, seed, &es, &cop, None).unwrap();
        assert_eq!(out.records[1].estimate, direct);
    }

    #[test]
    fn slope_and_sd_helpers() {
        let xs = [1.0, 10.0, 100.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() + 0.5).abs() < 1e-12);
        assert!(log_log_slope(&[1.0], &[1.0]).is_err());
        assert!(log_log_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
        let sd = sample_sd([1.0, 2.0, 3.0, 4.0].into_iter()).unwrap();
        assert!((sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dimension_checks() {
        let (_, cop) = clayton();
        let es2 = EsSpec::new(0.99, 2).unwrap();
        assert!(variance_study(&es2, &cop, None, &config(vec![Method::CdmMc], vec![100], 2)).is_err());
        let (es, _) = clayton();
        let cfg = StudyConfig { randomization: Randomization::None, ..config(vec![Method::CdmSobol], vec![100], 2) };
        assert!(variance_study(&es, &cop, None, &cfg).is_err());
    }
}
