use ndarray::ArrayView1;

use super::PointSet;
use crate::error::{Error, Result};

pub const MAX_EXACT_DIM: usize = 3;
pub const MAX_EXACT_POINTS: usize = 1 << 12;
/// The exact algorithm costs O(n^k); three-dimensional sets are capped lower.
const MAX_EXACT_POINTS_3D: usize = 1 << 9;

/// `|(1/n) #{v_i in [0, a)} - prod_j a_j|`.
pub fn local_discrepancy(ps: &PointSet, a: &[f64]) -> Result<f64> {
    if a.len() != ps.k() {
        return Err(Error::DimensionMismatch { expected: ps.k(), got: a.len() });
    }
    if let Some(&bad) = a.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::Domain { value: bad, context: "box corner must lie in [0,1]^k" });
    }
    let inside = ps
        .points()
        .rows()
        .into_iter()
        .filter(|v| v.iter().zip(a).all(|(x, c)| x < c))
        .count();
    let volume: f64 = a.iter().product();
    Ok((inside as f64 / ps.n() as f64 - volume).abs())
}

/// Exact star discrepancy `sup_a D(P_n, a)`.
///
/// The supremum is attained on the grid of per-dimension coordinate values
/// (plus 1). At each grid corner the open box `[0, a)` bounds
/// `volume - fraction` from above, and the closed box `[0, a]`, the right
/// limit of open boxes, bounds `fraction - volume`.
pub fn star_discrepancy(ps: &PointSet) -> Result<f64> {
    let (n, k) = (ps.n(), ps.k());
    let limit = if k == 3 { MAX_EXACT_POINTS_3D } else { MAX_EXACT_POINTS };
    if k == 0 || k > MAX_EXACT_DIM || n > limit {
        return Err(Error::DiscrepancyInfeasible { n, k });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let pts = ps.points();
    let candidates: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let mut c: Vec<f64> = pts.column(j).to_vec();
            c.push(1.0);
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        })
        .collect();

    // Indices sorted by the last coordinate; filtering keeps the order, so the
    // final sweep is linear.
    let last = k - 1;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| pts[[i, last]].total_cmp(&pts[[j, last]]));

    let search = Search { rows: order.iter().map(|&i| pts.row(i)).collect(), candidates, n: n as f64 };
    let all: Vec<usize> = (0..n).collect();
    Ok(search.sup(0, &all, &all, 1.0))
}

struct Search<'a> {
    rows: Vec<ArrayView1<'a, f64>>,
    candidates: Vec<Vec<f64>>,
    n: f64,
}

impl Search<'_> {
    fn sup(&self, dim: usize, open: &[usize], closed: &[usize], volume: f64) -> f64 {
        let cands = &self.candidates[dim];
        let mut best = 0.0f64;
        if dim + 1 == self.candidates.len() {
            let (mut o, mut c) = (0, 0);
            for &a in cands {
                while o < open.len() && self.rows[open[o]][dim] < a {
                    o += 1;
                }
                while c < closed.len() && self.rows[closed[c]][dim] <= a {
                    c += 1;
                }
                let vol = volume * a;
                best = best.max(vol - o as f64 / self.n).max(c as f64 / self.n - vol);
            }
            return best;
        }
        let mut sub_open = Vec::with_capacity(open.len());
        let mut sub_closed = Vec::with_capacity(closed.len());
        for &a in cands {
            sub_open.clear();
            sub_open.extend(open.iter().copied().filter(|&i| self.rows[i][dim] < a));
            sub_closed.clear();
            sub_closed.extend(closed.iter().copied().filter(|&i| self.rows[i][dim] <= a));
            best = best.max(self.sup(dim + 1, &sub_open, &sub_closed, volume * a));
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{pseudo_random_points, sobol_points, DesignFamily, Randomization};
    use ndarray::Array2;
    use rand::Rng as _;

    fn set(rows: &[&[f64]]) -> PointSet {
        let k = rows[0].len();
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        PointSet::new(Array2::from_shape_vec((rows.len(), k), flat).unwrap(), DesignFamily::PseudoRandom, 0)
            .unwrap()
    }

    #[test]
    fn single_midpoint() {
        assert_eq!(star_discrepancy(&set(&[&[0.5]])).unwrap(), 0.5);
    }

    // Brute-force oracle: sweep a fine grid of corners, including each
    // corner's right limit, in one dimension.
    fn grid_sweep_1d(xs: &[f64], steps: usize) -> f64 {
        let n = xs.len() as f64;
        let mut best = 0.0f64;
        for s in 0..=steps {
            let a = s as f64 / steps as f64;
            let open = xs.iter().filter(|&&x| x < a).count() as f64;
            let closed = xs.iter().filter(|&&x| x <= a).count() as f64;
            best = best.max((open / n - a).abs()).max((closed / n - a).abs());
        }
        best
    }

    #[test]
    fn midpoint_lattice() {
        for n in [1usize, 2, 5, 8, 16] {
            let xs: Vec<f64> = (0..n).map(|i| (2 * i + 1) as f64 / (2 * n) as f64).collect();
            let rows: Vec<&[f64]> = xs.chunks(1).collect();
            let d = star_discrepancy(&set(&rows)).unwrap();
            let expected = 1.0 / (2 * n) as f64;
            assert!((d - expected).abs() < 1e-15, "n={n}: {d}");
            assert!((grid_sweep_1d(&xs, 64 * n) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn local_examples() {
        let p = set(&[&[0.5, 0.5]]);
        assert!((local_discrepancy(&p, &[0.6, 0.6]).unwrap() - 0.64).abs() < 1e-15);
        assert_eq!(local_discrepancy(&p, &[0.5, 0.5]).unwrap(), 0.25);
        assert_eq!(local_discrepancy(&p, &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(local_discrepancy(&p, &[0.0, 0.0]).unwrap(), 0.0);
        assert!(local_discrepancy(&p, &[0.5]).is_err());
        assert!(local_discrepancy(&p, &[0.5, 1.5]).is_err());
    }

    #[test]
    fn size_limits() {
        let big = pseudo_random_points(MAX_EXACT_POINTS + 1, 1, 0);
        assert!(matches!(star_discrepancy(&big), Err(Error::DiscrepancyInfeasible { .. })));
        let four = pseudo_random_points(8, 4, 0);
        assert!(star_discrepancy(&four).is_err());
    }

    #[test]
    fn sobol_prefix_bound() {
        for m in 0..=8 {
            let ps = sobol_points(1 << m, 1, 0, Randomization::None).unwrap();
            let d = star_discrepancy(&ps).unwrap();
            assert!(d <= 2.0f64.powi(1 - m as i32), "m={m}: {d}");
        }
    }

    // Exhaustive oracle over all grid corners with both box types, O(n^k * n).
    fn brute_force(ps: &PointSet) -> f64 {
        let k = ps.k();
        let mut cands: Vec<Vec<f64>> = (0..k)
            .map(|j| {
                let mut c = ps.points().column(j).to_vec();
                c.push(1.0);
                c
            })
            .collect();
        cands.iter_mut().for_each(|c| c.sort_by(f64::total_cmp));
        let sizes: Vec<usize> = cands.iter().map(Vec::len).collect();
        let total: usize = sizes.iter().product();
        let n = ps.n() as f64;
        let mut best = 0.0f64;
        for mut idx in 0..total {
            let mut a = vec![0.0; k];
            for j in 0..k {
                a[j] = cands[j][idx % sizes[j]];
                idx /= sizes[j];
            }
            let vol: f64 = a.iter().product();
            let mut open = 0.0;
            let mut closed = 0.0;
            for v in ps.points().rows() {
                if v.iter().zip(&a).all(|(x, c)| x < c) {
                    open += 1.0;
                }
                if v.iter().zip(&a).all(|(x, c)| x <= c) {
                    closed += 1.0;
                }
            }
            best = best.max(vol - open / n).max(closed / n - vol);
        }
        best
    }

    #[test]
    fn matches_brute_force_in_two_and_three_dimensions() {
        for (n, k) in [(1, 2), (7, 2), (30, 2), (5, 3), (17, 3)] {
            for seed in 0..3 {
                let ps = pseudo_random_points(n, k, seed);
                assert_eq!(star_discrepancy(&ps).unwrap(), brute_force(&ps));
            }
        }
    }

    #[test]
    fn local_never_exceeds_star() {
        let mut rng = crate::rng::stream(1);
        for k in 1..=3 {
            let ps = pseudo_random_points(40, k, k as u64);
            let star = star_discrepancy(&ps).unwrap();
            for _ in 0..1000 {
                let a: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
                assert!(local_discrepancy(&ps, &a).unwrap() <= star + 1e-15);
            }
        }
    }
}
