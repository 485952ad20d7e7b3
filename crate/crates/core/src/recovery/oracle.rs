//! Linear-algebraic uniqueness check for the 1D recovery problem.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::transforms::{naive, Direction};

/// Relative singular-value cutoff used for the rank decision.
const RANK_TOL: f64 = 1e-9;

/// True when every signal supported on `support` is determined by its DFT
/// coefficients outside `missing`.
///
/// That holds exactly when the unitary `n`-point DFT matrix, restricted to the
/// observed frequencies (rows) and to `support` (columns), has full column rank.
pub fn uniqueness_oracle_1d(
    n: usize,
    support: &BTreeSet<usize>,
    missing: &BTreeSet<usize>,
) -> bool {
    assert!(
        support.iter().chain(missing).all(|&i| i < n),
        "indices must lie in Z_{n}"
    );
    if support.is_empty() {
        return true;
    }
    let rows: Vec<usize> = (0..n).filter(|m| !missing.contains(m)).collect();
    if rows.len() < support.len() {
        return false;
    }
    let cols: Vec<usize> = support.iter().copied().collect();
    let a = DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
        naive::matrix_entry(rows[r], cols[c], n, Direction::Forward)
    });
    let sv = a.singular_values();
    let smax = sv.max();
    sv.iter().all(|&s| s > RANK_TOL * smax)
}
