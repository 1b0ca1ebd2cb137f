use ndarray::{ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Kendall's tau-a, `(concordant - discordant) / C(n, 2)`, of two columns.
///
/// Knight's O(n log n) algorithm: sort by `(x, y)`, count the inversions of
/// `y` with a merge sort, and correct for pairs tied in `x`, in `y`, or both.
pub fn kendall_tau_pair(x: ArrayView1<f64>, y: ArrayView1<f64>) -> Result<f64> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if n < 2 {
        return Err(Error::invalid("Kendall's tau needs at least 2 observations"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let tied_pairs = |same: &dyn Fn(usize, usize) -> bool| -> u64 {
        let mut total = 0u64;
        let mut run = 1u64;
        for w in 1..n {
            if same(idx[w - 1], idx[w]) {
                run += 1;
            } else {
                total += run * (run - 1) / 2;
                run = 1;
            }
        }
        total + run * (run - 1) / 2
    };
    let x_ties = tied_pairs(&|a, b| x[a] == x[b]);
    let joint_ties = tied_pairs(&|a, b| x[a] == x[b] && y[a] == y[b]);

    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut scratch = vec![0.0; n];
    let inversions = merge_count(&mut ys, &mut scratch);

    // ys is now sorted; count ties in y
    let mut y_ties = 0u64;
    let mut run = 1u64;
    for w in 1..n {
        if ys[w] == ys[w - 1] {
            run += 1;
        } else {
            y_ties += run * (run - 1) / 2;
            run = 1;
        }
    }
    y_ties += run * (run - 1) / 2;

    let pairs = (n as u64) * (n as u64 - 1) / 2;
    let net = pairs as i64 - x_ties as i64 - y_ties as i64 + joint_ties as i64 - 2 * inversions as i64;
    Ok(net as f64 / pairs as f64)
}

fn merge_count(v: &mut [f64], scratch: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (left, right) = v.split_at_mut(mid);
        let (sl, sr) = scratch.split_at_mut(mid);
        merge_count(left, sl) + merge_count(right, sr)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            scratch[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        } else {
            scratch[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    scratch[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&scratch[..n]);
    count
}

/// Mean pairwise Kendall's tau over all column pairs.
pub fn kendall_tau_empirical(samples: ArrayView2<f64>) -> Result<f64> {
    let d = samples.ncols();
    if d < 2 {
        return Err(Error::invalid("Kendall's tau needs at least 2 columns"));
    }
    let mut total = 0.0;
    let mut count = 0;
    for a in 0..d {
        for b in (a + 1)..d {
            total += kendall_tau_pair(samples.column(a), samples.column(b))?;
            count += 1;
        }
    }
    Ok(total / count as f64)
}
