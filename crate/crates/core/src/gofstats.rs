//! Empirical copulas and Cramér–von Mises distances.

use std::cmp::Ordering;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copulas::{copula_cdf, CopulaSpec};
use crate::error::{Error, Result};

/// Rows per block in the deterministic parallel reductions.
const BLOCK: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCopula {
    sample: Array2<f64>,
}

impl EmpiricalCopula {
    pub fn new(sample: Array2<f64>) -> Result<Self> {
        if sample.ncols() == 0 {
            return Err(Error::invalid("empirical copula needs at least one column"));
        }
        if let Some(&bad) = sample.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Domain { value: bad, context: "empirical copula sample must lie in [0,1]" });
        }
        Ok(Self { sample })
    }

    pub fn n(&self) -> usize {
        self.sample.nrows()
    }

    pub fn d(&self) -> usize {
        self.sample.ncols()
    }

    pub fn sample(&self) -> &Array2<f64> {
        &self.sample
    }

    /// Fraction of sample rows that are componentwise `<= u`.
    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.d() {
            return Err(Error::DimensionMismatch { expected: self.d(), got: u.len() });
        }
        Ok(self.fraction_below(u.iter()))
    }

    fn fraction_below<'a>(&self, u: impl Iterator<Item = &'a f64> + Clone) -> f64 {
        if self.n() == 0 {
            return 0.0;
        }
        let count = self
            .sample
            .rows()
            .into_iter()
            .filter(|r| r.iter().zip(u.clone()).all(|(a, b)| a <= b))
            .count();
        count as f64 / self.n() as f64
    }

    /// Evaluates at every row of `queries`, with an `O((n + m) log n)`
    /// sweep for `d = 2` and the direct count otherwise.
    pub fn eval_many(&self, queries: ArrayView2<f64>) -> Result<Vec<f64>> {
        if queries.ncols() != self.d() {
            return Err(Error::DimensionMismatch { expected: self.d(), got: queries.ncols() });
        }
        if self.d() == 2 && self.n() > 0 {
            return Ok(self.eval_many_2d(queries));
        }
        self.eval_many_naive(queries)
    }

    pub fn eval_many_naive(&self, queries: ArrayView2<f64>) -> Result<Vec<f64>> {
        if queries.ncols() != self.d() {
            return Err(Error::DimensionMismatch { expected: self.d(), got: queries.ncols() });
        }
        let rows: Vec<_> = queries.rows().into_iter().collect();
        Ok(rows.par_iter().map(|q| self.fraction_below(q.iter())).collect())
    }

    fn eval_many_2d(&self, queries: ArrayView2<f64>) -> Vec<f64> {
        let n = self.n();
        let mut ys: Vec<f64> = self.sample.column(1).to_vec();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        let mut pts: Vec<(f64, usize)> = self
            .sample
            .rows()
            .into_iter()
            .map(|r| (r[0], ys.partition_point(|&y| y < r[1])))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut order: Vec<usize> = (0..queries.nrows()).collect();
        order.sort_by(|&a, &b| queries[[a, 0]].total_cmp(&queries[[b, 0]]));

        let mut tree = Fenwick::new(ys.len());
        let mut out = vec![0.0; queries.nrows()];
        let mut next = 0;
        for q in order {
            let (qx, qy) = (queries[[q, 0]], queries[[q, 1]]);
            while next < pts.len() && pts[next].0 <= qx {
                tree.add(pts[next].1);
                next += 1;
            }
            // ranks of sample ordinates <= qy
            let upto = ys.partition_point(|&y| y <= qy);
            out[q] = tree.prefix(upto) as f64 / n as f64;
        }
        out
    }
}

struct Fenwick {
    tree: Vec<usize>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self { tree: vec![0; n + 1] }
    }

    fn add(&mut self, index: usize) {
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of inserted indices `< end`.
    fn prefix(&self, end: usize) -> usize {
        let mut i = end;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i &= i - 1;
        }
        s
    }
}

/// `S_n = Σ_i (C_n(u_i) − C(u_i))²` with `C_n` the empirical copula of the
/// sample itself.
pub fn cvm_one_sample(sample: ArrayView2<f64>, spec: &CopulaSpec) -> Result<f64> {
    if sample.ncols() != spec.d() {
        return Err(Error::DimensionMismatch { expected: spec.d(), got: sample.ncols() });
    }
    let ec = EmpiricalCopula::new(sample.to_owned())?;
    let empirical = ec.eval_many(sample)?;
    let model = sample
        .rows()
        .into_iter()
        .map(|r| copula_cdf(spec, &r.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok(empirical.iter().zip(&model).map(|(a, b)| (a - b) * (a - b)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    /// Multiply the integral by `(1/n + 1/N)^{-1/2}`.
    #[default]
    Sqrt,
    /// Multiply the integral by `(1/n + 1/N)^{-1}`.
    Linear,
}

impl Scaling {
    pub fn factor(self, n: usize, m: usize) -> f64 {
        let h = 1.0 / n as f64 + 1.0 / m as f64;
        match self {
            Scaling::Sqrt => 1.0 / h.sqrt(),
            Scaling::Linear => 1.0 / h,
        }
    }
}

/// `(1/(nm)) Σ_i Σ_j Π_k (1 − max(a_ik, b_jk))`, which equals `∫ C_a C_b du`.
/// Rows of `a` are summed in fixed blocks so the result does not depend on
/// the thread count.
pub fn cross_integral(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    let (n, m) = (a.nrows(), b.nrows());
    let partials: Vec<f64> = (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .map(|blk| {
            let mut s = 0.0;
            for i in blk * BLOCK..((blk + 1) * BLOCK).min(n) {
                let ai = a.row(i);
                for bj in b.rows() {
                    s += ai.iter().zip(bj.iter()).map(|(x, y)| 1.0 - x.max(*y)).product::<f64>();
                }
            }
            s
        })
        .collect();
    partials.iter().sum::<f64>() / (n as f64 * m as f64)
}

fn lexicographic(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Ordering {
    a.dim().cmp(&b.dim()).then_with(|| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Scaled `∫ (C_a(u) − C_b(u))² du`, evaluated in closed form.
///
/// The arguments are put in a canonical order first, so swapping them
/// returns the identical value.
pub fn cvm_two_sample(a: ArrayView2<f64>, b: ArrayView2<f64>, scaling: Scaling) -> Result<f64> {
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch { expected: a.ncols(), got: b.ncols() });
    }
    if a.nrows() == 0 || b.nrows() == 0 {
        return Err(Error::invalid("both samples must be non-empty"));
    }
    for &x in a.iter().chain(b.iter()) {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain { value: x, context: "samples must lie in [0,1]" });
        }
    }
    let (a, b) = if lexicographic(a, b) == Ordering::Greater { (b, a) } else { (a, b) };
    let integral = cross_integral(a, a) + cross_integral(b, b) - 2.0 * cross_integral(a, b);
    Ok(integral.max(0.0) * scaling.factor(a.nrows(), b.nrows()))
}
