//! Seeded test-signal generators.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{GridDims, Signal2D};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalShape {
    /// Every row has exactly `e_max_target` nonzeros.
    UniformRows,
    /// A fraction of the rows has a single nonzero, the rest `e_max_target`.
    SkewedRows { small_fraction: f64 },
}

fn unit_phase(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>())
}

/// Random signal with unit-modulus, random-phase entries on random row supports.
pub fn generate_test_signal(
    dims: GridDims,
    e_max_target: usize,
    seed: u64,
    shape: SignalShape,
) -> Result<Signal2D> {
    if e_max_target == 0 || e_max_target > dims.n {
        return Err(Error::InfeasibleConfig(format!(
            "e_max_target {e_max_target} must lie in 1..={}",
            dims.n
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut row_sizes = vec![e_max_target; dims.t];
    if let SignalShape::SkewedRows { small_fraction } = shape {
        if !(0.0..=1.0).contains(&small_fraction) {
            return Err(Error::InfeasibleConfig(format!(
                "small_fraction {small_fraction} outside [0, 1]"
            )));
        }
        let mut small = (small_fraction * dims.t as f64).round() as usize;
        if e_max_target > 1 {
            small = small.min(dims.t - 1);
        }
        for y in index::sample(&mut rng, dims.t, small) {
            row_sizes[y] = 1;
        }
    }
    let mut values = vec![Complex64::new(0.0, 0.0); dims.len()];
    for (y, &k) in row_sizes.iter().enumerate() {
        for x in index::sample(&mut rng, dims.n, k) {
            values[dims.index(x, y)] = unit_phase(&mut rng);
        }
    }
    Signal2D::new(dims, values)
}

/// Number of rows of [`improvement_witness`].
pub const WITNESS_ROWS: usize = 8;
/// Largest row support of [`improvement_witness`].
pub const WITNESS_E_MAX: usize = 3;
/// Column-transform support bound of [`improvement_witness`].
pub const WITNESS_S_MAX: usize = 2;

/// An `n x 8` signal with one row of support 3, seven rows of support 2,
/// and every column's 8-point DFT supported on exactly 2 frequencies.
///
/// Three columns are nonzero. Each is `alpha w^{ja} (1 + s w^{da})` with
/// `w = exp(2 pi i / 8)`, whose DFT lives on `{j, j + d}`; choosing `d` in
/// `{4, 2, 1}` and `s` places its zeros on the rows of opposite parity to the
/// dense row `r`, on `{r + 2, r + 6}`, and on `{r + 4}` respectively. So `r`
/// meets all three columns and every other row meets exactly two.
pub fn improvement_witness(n: usize, seed: u64) -> Result<Signal2D> {
    if n < WITNESS_E_MAX {
        return Err(Error::InfeasibleConfig(format!(
            "witness needs n >= {WITNESS_E_MAX}, got {n}"
        )));
    }
    let t = WITNESS_ROWS;
    let dims = GridDims::new(n, t)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dense = rng.random_range(0..t);
    let omega = |k: i64| Complex64::from_polar(1.0, 2.0 * PI * (k.rem_euclid(8) as f64) / 8.0);
    let mut values = vec![Complex64::new(0.0, 0.0); dims.len()];
    for (x, d) in index::sample(&mut rng, n, 3).into_iter().zip([4i64, 2, 1]) {
        let zero_at = dense as i64 + 4 / d;
        let s = -omega(-d * zero_at);
        let j = rng.random_range(0..8i64);
        let alpha = unit_phase(&mut rng) * (0.5 + rng.random::<f64>());
        for y in 0..t {
            let a = y as i64;
            values[dims.index(x, y)] = alpha * omega(j * a) * (1.0 + s * omega(d * a));
        }
    }
    Signal2D::new(dims, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{column_support_max, support_profile};
    use crate::transforms::gabor_col;

    #[test]
    fn uniform_rows_have_target_support() {
        let d = GridDims::new(4, 3).unwrap();
        let f = generate_test_signal(d, 1, 7, SignalShape::UniformRows).unwrap();
        assert_eq!(support_profile(&f, 0.0).row_supports, vec![1, 1, 1]);
        let dense = generate_test_signal(d, 4, 7, SignalShape::UniformRows).unwrap();
        assert_eq!(support_profile(&dense, 0.0).row_supports, vec![4, 4, 4]);
        for v in dense.values() {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn skewed_rows_split() {
        let d = GridDims::new(16, 8).unwrap();
        let f = generate_test_signal(
            d,
            4,
            3,
            SignalShape::SkewedRows {
                small_fraction: 7.0 / 8.0,
            },
        )
        .unwrap();
        let p = support_profile(&f, 0.0);
        assert_eq!(p.e_max, 4);
        assert_eq!(p.row_supports.iter().filter(|&&s| s == 1).count(), 7);
        assert_eq!(p.row_supports.iter().filter(|&&s| s == 4).count(), 1);
    }

    #[test]
    fn infeasible_targets() {
        let d = GridDims::new(4, 3).unwrap();
        assert!(generate_test_signal(d, 0, 0, SignalShape::UniformRows).is_err());
        assert!(generate_test_signal(d, 5, 0, SignalShape::UniformRows).is_err());
        assert!(generate_test_signal(
            d,
            2,
            0,
            SignalShape::SkewedRows {
                small_fraction: 1.5
            }
        )
        .is_err());
        assert!(improvement_witness(2, 0).is_err());
    }

    #[test]
    fn witness_structure() {
        for seed in 0..50 {
            let f = improvement_witness(16, seed).unwrap();
            let tol = f.default_tol();
            let p = support_profile(&f, tol);
            let mut sorted = p.row_supports.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, vec![2, 2, 2, 2, 2, 2, 2, 3], "seed {seed}");
            assert_eq!(column_support_max(&gabor_col(&f), tol), WITNESS_S_MAX);
        }
    }
}
