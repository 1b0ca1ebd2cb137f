//! Sobol sequences in Gray-code order with optional randomization.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{DesignFamily, PointSet};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, hash_str, mix64};

pub const SOBOL_MAX_DIM: usize = 32;
const BITS: usize = 32;

// (degree s, polynomial interior bits a, initial direction numbers m) for
// dimensions 2..=32, from new-joe-kuo-6.21201
// (https://web.maths.unsw.edu.au/~fkuo/sobol/). Dimension 1 is van der Corput.
const JOE_KUO: [(u32, u32, &[u32]); SOBOL_MAX_DIM - 1] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
    (6, 19, &[1, 1, 1, 15, 7, 5]),
    (6, 22, &[1, 3, 1, 15, 13, 25]),
    (6, 25, &[1, 1, 5, 5, 19, 61]),
    (7, 1, &[1, 3, 7, 11, 23, 15, 103]),
    (7, 4, &[1, 3, 7, 13, 13, 15, 69]),
    (7, 7, &[1, 1, 3, 13, 7, 35, 63]),
    (7, 8, &[1, 3, 5, 9, 1, 25, 53]),
    (7, 14, &[1, 3, 1, 13, 9, 35, 107]),
    (7, 19, &[1, 3, 1, 5, 27, 61, 31]),
    (7, 21, &[1, 1, 5, 11, 19, 41, 61]),
    (7, 28, &[1, 3, 5, 3, 3, 13, 69]),
    (7, 31, &[1, 1, 7, 13, 1, 19, 1]),
    (7, 32, &[1, 3, 7, 5, 13, 19, 59]),
    (7, 37, &[1, 1, 3, 9, 25, 29, 41]),
    (7, 41, &[1, 3, 5, 13, 23, 1, 55]),
    (7, 42, &[1, 3, 7, 3, 13, 59, 17]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Randomization {
    /// The deterministic sequence, starting at the origin.
    None,
    /// XOR of every coordinate with a per-dimension random 52-bit vector.
    #[default]
    DigitalShift,
    /// Nested uniform (Owen) scrambling of the leading 32 bits; the
    /// remaining 20 bits are filled uniformly given the prefix.
    OwenScramble,
}

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = 1 << (BITS - 1 - i);
        }
        return v;
    }
    let (s, a, m) = JOE_KUO[dim - 1];
    let s = s as usize;
    for i in 0..s.min(BITS) {
        v[i] = m[i] << (BITS - 1 - i);
    }
    for i in s..BITS {
        let mut x = v[i - s] ^ (v[i - s] >> s);
        for k in 1..s {
            if (a >> (s - 1 - k)) & 1 == 1 {
                x ^= v[i - k];
            }
        }
        v[i] = x;
    }
    v
}

/// Nested uniform scramble of a 32-bit digit string: the flip applied to each
/// digit is a random bit keyed on all more significant digits.
fn owen_scramble(x: u32, seed: u64) -> u32 {
    let mut out = 0u32;
    for level in 0..BITS {
        let prefix = if level == 0 { 0 } else { u64::from(x >> (BITS - level)) };
        let flip = (mix64(seed ^ mix64(((level as u64) << 32) | prefix)) & 1) as u32;
        let bit = (x >> (BITS - 1 - level)) & 1;
        out |= (bit ^ flip) << (BITS - 1 - level);
    }
    out
}

const TWO_POW_M32: f64 = 1.0 / 4_294_967_296.0;
const TWO_POW_M52: f64 = 1.0 / 4_503_599_627_370_496.0;

/// First `n` points (index 0 included) of the `k`-dimensional Sobol sequence.
pub fn sobol_points(n: usize, k: usize, seed: u64, randomize: Randomization) -> Result<PointSet> {
    if k == 0 {
        return Err(Error::invalid("Sobol dimension must be at least 1"));
    }
    if k > SOBOL_MAX_DIM {
        return Err(Error::DimensionUnsupported { requested: k, max: SOBOL_MAX_DIM });
    }
    if n as u64 > 1u64 << BITS {
        return Err(Error::invalid(format!("at most 2^32 Sobol points, requested {n}")));
    }
    let dirs: Vec<[u32; BITS]> = (0..k).map(direction_numbers).collect();
    let dim_seeds: Vec<u64> = (0..k as u64)
        .map(|j| derive_seed(seed, hash_str("sobol-dimension"), j))
        .collect();

    let mut points = Array2::zeros((n, k));
    let mut state = vec![0u32; k];
    for i in 0..n {
        if i > 0 {
            let c = (i - 1).trailing_ones() as usize;
            for (x, d) in state.iter_mut().zip(&dirs) {
                *x ^= d[c];
            }
        }
        for j in 0..k {
            let x = state[j];
            points[[i, j]] = match randomize {
                Randomization::None => f64::from(x) * TWO_POW_M32,
                Randomization::DigitalShift => {
                    let shift = mix64(dim_seeds[j]) >> 12;
                    ((u64::from(x) << 20) ^ shift) as f64 * TWO_POW_M52
                }
                Randomization::OwenScramble => {
                    let high = u64::from(owen_scramble(x, dim_seeds[j]));
                    let low = mix64(dim_seeds[j] ^ mix64((32u64 << 32) | u64::from(x))) >> 44;
                    ((high << 20) | low) as f64 * TWO_POW_M52
                }
            };
        }
    }
    Ok(PointSet::from_raw(points, DesignFamily::Sobol, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(ps: &PointSet, j: usize) -> Vec<f64> {
        ps.points().column(j).to_vec()
    }

    #[test]
    fn first_dimension_is_van_der_corput_in_gray_order() {
        let ps = sobol_points(4, 1, 0, Randomization::None).unwrap();
        assert_eq!(column(&ps, 0), vec![0.0, 0.5, 0.75, 0.25]);
    }

    #[test]
    fn index_zero_is_origin() {
        let ps = sobol_points(1, 3, 0, Randomization::None).unwrap();
        assert_eq!(ps.points().row(0).to_vec(), vec![0.0, 0.0, 0.0]);
    }

    // Reference values produced by an independent Sobol implementation
    // (scipy.stats.qmc.Sobol, scramble=False) with the same direction numbers.
    #[test]
    fn matches_reference_sequence() {
        let ps = sobol_points(8, 32, 0, Randomization::None).unwrap();
        let expect: [[f64; 5]; 8] = [
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.5, 0.5, 0.5, 0.5, 0.5],
            [0.75, 0.25, 0.25, 0.75, 0.25],
            [0.25, 0.75, 0.75, 0.25, 0.75],
            [0.375, 0.375, 0.625, 0.125, 0.125],
            [0.875, 0.875, 0.125, 0.625, 0.625],
            [0.625, 0.125, 0.875, 0.875, 0.375],
            [0.125, 0.625, 0.375, 0.375, 0.875],
        ];
        for (i, row) in expect.iter().enumerate() {
            for (c, &j) in [0usize, 1, 2, 5, 31].iter().enumerate() {
                assert_eq!(ps.points()[[i, j]], row[c], "point {i} dim {j}");
            }
        }
    }

    #[test]
    fn rejects_unsupported_dimension() {
        assert!(matches!(
            sobol_points(4, 33, 0, Randomization::None),
            Err(Error::DimensionUnsupported { requested: 33, .. })
        ));
        assert!(sobol_points(4, 0, 0, Randomization::None).is_err());
    }

    fn one_per_dyadic_interval(col: &[f64], m: u32) -> bool {
        let mut seen = vec![false; 1 << m];
        for &x in col {
            let b = (x * f64::from(1u32 << m)).floor() as usize;
            if seen[b] {
                return false;
            }
            seen[b] = true;
        }
        true
    }

    #[test]
    fn randomized_prefixes_remain_dyadic_nets() {
        for r in [Randomization::DigitalShift, Randomization::OwenScramble] {
            for m in 0..=10 {
                for seed in 0..3 {
                    let ps = sobol_points(1 << m, 2, seed, r).unwrap();
                    for j in 0..2 {
                        assert!(one_per_dyadic_interval(&column(&ps, j), m), "{r:?} m={m} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn randomization_is_seeded() {
        for r in [Randomization::DigitalShift, Randomization::OwenScramble] {
            let a = sobol_points(64, 4, 1, r).unwrap();
            assert_eq!(a, sobol_points(64, 4, 1, r).unwrap());
            assert_ne!(a, sobol_points(64, 4, 2, r).unwrap());
            assert!(a.points().iter().all(|x| (0.0..1.0).contains(x)));
        }
    }

    #[test]
    fn owen_scramble_is_a_bijection_on_small_prefixes() {
        // Distinct inputs differing in the top 8 bits stay distinct there.
        let mut tops: Vec<u32> = (0..256u32).map(|t| owen_scramble(t << 24, 99) >> 24).collect();
        tops.sort_unstable();
        assert_eq!(tops, (0..256).collect::<Vec<_>>());
    }
}
