use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng as _;

use super::{stratum_point, DesignFamily, PointSet};
use crate::error::{Error, Result};
use crate::rng;

/// An `OA(n, s^k, t)`: an `n × k` array over `{0, ..., s-1}` in which every
/// `n × t` submatrix contains each level combination `n / s^t` times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalArray {
    cells: Array2<u32>,
    levels: usize,
    strength: usize,
}

impl OrthogonalArray {
    pub fn n(&self) -> usize {
        self.cells.nrows()
    }

    pub fn k(&self) -> usize {
        self.cells.ncols()
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn strength(&self) -> usize {
        self.strength
    }

    pub fn cells(&self) -> &Array2<u32> {
        &self.cells
    }
}

pub fn is_prime(s: usize) -> bool {
    if s < 2 {
        return false;
    }
    let mut f = 2;
    while f * f <= s {
        if s % f == 0 {
            return false;
        }
        f += 1;
    }
    true
}

/// Bose construction of `OA(s^2, s^k, 2)` for prime `s` and `2 <= k <= s+1`.
///
/// Row `(a, b)` is `(a, b, a + b, a + 2b, ..., a + (k-2)b) mod s`.
pub fn bose_oa(s: usize, k: usize) -> Result<OrthogonalArray> {
    if !is_prime(s) {
        return Err(Error::invalid(format!("Bose construction needs a prime level count, got {s}")));
    }
    if !(2..=s + 1).contains(&k) {
        return Err(Error::invalid(format!(
            "Bose OA with s = {s} supports 2 <= k <= {}, got k = {k}",
            s + 1
        )));
    }
    let cells = Array2::from_shape_fn((s * s, k), |(row, col)| {
        let (a, b) = (row / s, row % s);
        let level = match col {
            0 => a,
            1 => b,
            j => (a + (j - 1) * b) % s,
        };
        level as u32
    });
    Ok(OrthogonalArray { cells, levels: s, strength: 2 })
}

/// OA-based Latin hypercube: within each column, the `n/s` rows at level `e`
/// receive a random permutation `b` of `{1, ..., n/s}`, and
/// `d_ij = a_ij / s + (b_ij - eps_ij) / n` with uniform `eps_ij`.
pub fn oa_lhd_points(oa: &OrthogonalArray, seed: u64) -> Result<PointSet> {
    if oa.strength() < 2 {
        return Err(Error::invalid("OA-based LHD needs an orthogonal array of strength >= 2"));
    }
    let (n, k, s) = (oa.n(), oa.k(), oa.levels());
    if n % s != 0 {
        return Err(Error::invalid(format!("{n} rows are not divisible by {s} levels")));
    }
    let per_level = n / s;
    let mut rng = rng::stream(seed);
    let mut b = vec![0usize; n];
    let mut points = Array2::zeros((n, k));
    let mut rows_at_level: Vec<Vec<usize>> = vec![Vec::with_capacity(per_level); s];
    for j in 0..k {
        rows_at_level.iter_mut().for_each(Vec::clear);
        for i in 0..n {
            rows_at_level[oa.cells[[i, j]] as usize].push(i);
        }
        for rows in &rows_at_level {
            if rows.len() != per_level {
                return Err(Error::invalid("column levels are not balanced"));
            }
            let mut perm: Vec<usize> = (1..=per_level).collect();
            perm.shuffle(&mut rng);
            for (&i, &p) in rows.iter().zip(&perm) {
                b[i] = p;
            }
        }
        for i in 0..n {
            let a = oa.cells[[i, j]] as usize;
            let eps: f64 = rng.random();
            // a/s + (b - eps)/n == (a * n/s + b - 1 + (1 - eps)) / n
            points[[i, j]] = stratum_point(a * per_level + b[i] - 1, n, 1.0 - eps);
        }
    }
    Ok(PointSet::from_raw(points, DesignFamily::OaLhd, seed))
}
