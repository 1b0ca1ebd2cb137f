use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Rank-transformed data `R_ij / (N + 1)`, an estimate of copula samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoObservations {
    u: Array2<f64>,
}

impl PseudoObservations {
    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn d(&self) -> usize {
        self.u.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.u
    }

    pub fn into_values(self) -> Array2<f64> {
        self.u
    }
}

/// Column-wise ranks divided by `N + 1`. Ties are ranked in input order.
pub fn pseudo_observations(data: ArrayView2<f64>) -> Result<PseudoObservations> {
    let (n, d) = data.dim();
    if n < 2 {
        return Err(Error::invalid(format!("pseudo-observations need at least 2 rows, got {n}")));
    }
    if let Some(&bad) = data.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("data contains {bad}")));
    }
    let scale = (n + 1) as f64;
    let mut u = Array2::zeros((n, d));
    let mut order: Vec<usize> = (0..n).collect();
    for j in 0..d {
        let col = data.column(j);
        order.iter_mut().enumerate().for_each(|(i, o)| *o = i);
        // stable: equal values keep their input order
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
        for (rank, &i) in order.iter().enumerate() {
            u[[i, j]] = (rank + 1) as f64 / scale;
        }
    }
    Ok(PseudoObservations { u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use proptest::prelude::*;

    #[test]
    fn ranks_one_column() {
        let p = pseudo_observations(array![[3.2], [-1.0], [7.5]].view()).unwrap();
        assert_eq!(p.values().column(0).to_vec(), vec![0.5, 0.25, 0.75]);
    }

    #[test]
    fn sorted_column() {
        let data = Array2::from_shape_fn((4, 1), |(i, _)| i as f64);
        let p = pseudo_observations(data.view()).unwrap();
        assert_eq!(p.values().column(0).to_vec(), vec![0.2, 0.4, 0.6, 0.8]);
    }

    #[test]
    fn ties_follow_input_order() {
        let p = pseudo_observations(array![[1.0], [1.0]].view()).unwrap();
        assert_eq!(p.values().column(0).to_vec(), vec![1.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn errors() {
        assert!(pseudo_observations(array![[1.0, 2.0]].view()).is_err());
        assert!(matches!(
            pseudo_observations(array![[1.0], [f64::NAN]].view()),
            Err(Error::NonFinite(_))
        ));
    }

    proptest! {
        #[test]
        fn invariant_under_increasing_maps(rows in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..60)) {
            let n = rows.len();
            let data = Array2::from_shape_fn((n, 2), |(i, j)| if j == 0 { rows[i].0 } else { rows[i].1 });
            let mapped = data.mapv(|x| (x / 100.0).exp() * 3.0 + 1.0);
            let a = pseudo_observations(data.view()).unwrap();
            let b = pseudo_observations(mapped.view()).unwrap();
            // exp can merge distinct neighbours into ties only if they were
            // already within rounding; restrict to strictly increasing images
            let distinct = |v: Vec<f64>| { let mut s = v.clone(); s.sort_by(f64::total_cmp); s.dedup(); s.len() };
            prop_assume!(distinct(data.column(0).to_vec()) == distinct(mapped.column(0).to_vec()));
            prop_assume!(distinct(data.column(1).to_vec()) == distinct(mapped.column(1).to_vec()));
            prop_assert_eq!(a, b);
        }

        #[test]
        fn columns_are_rank_permutations(rows in prop::collection::vec(-1e6f64..1e6, 2..80)) {
            let n = rows.len();
            let data = Array2::from_shape_vec((n, 1), rows).unwrap();
            let p = pseudo_observations(data.view()).unwrap();
            let mut ranks: Vec<usize> = p.values().iter().map(|&x| (x * (n + 1) as f64).round() as usize).collect();
            ranks.sort_unstable();
            prop_assert_eq!(ranks, (1..=n).collect::<Vec<_>>());
        }
    }
}
