//! Binomial erasure channel: every transmitted coefficient is lost
//! independently with probability `theta`.
//!
//! Patterns are drawn from ChaCha20 (`rand_chacha::ChaCha20Rng::seed_from_u64`),
//! one uniform `f64` per grid position in row-major order; the position is lost
//! when the draw is `< theta`. The stream is platform independent, so a pattern
//! is a pure function of `(dims, theta, seed)`.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::recovery::RecoveryProblem;
use crate::signal::{GridDims, Position, Signal2D};
use crate::transforms::TransformKind;

/// The set `M` of lost positions with its per-row and per-column counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasurePattern {
    dims: GridDims,
    mask: Vec<bool>,
    per_row_counts: Vec<usize>,
    per_col_counts: Vec<usize>,
}

impl ErasurePattern {
    /// Builds a pattern from a row-major loss mask.
    pub fn from_mask(dims: GridDims, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                actual: mask.len(),
            });
        }
        let mut per_row_counts = vec![0; dims.t];
        let mut per_col_counts = vec![0; dims.n];
        for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
            let (x, y) = dims.position(i);
            per_row_counts[y] += 1;
            per_col_counts[x] += 1;
        }
        Ok(ErasurePattern {
            dims,
            mask,
            per_row_counts,
            per_col_counts,
        })
    }

    pub fn from_positions(
        dims: GridDims,
        missing: impl IntoIterator<Item = Position>,
    ) -> Result<Self> {
        let mut mask = vec![false; dims.len()];
        for (x, y) in missing {
            if x >= dims.n || y >= dims.t {
                return Err(Error::InvalidParameter(format!(
                    "position ({x}, {y}) outside {dims} grid"
                )));
            }
            mask[dims.index(x, y)] = true;
        }
        ErasurePattern::from_mask(dims, mask)
    }

    pub fn none(dims: GridDims) -> Self {
        ErasurePattern::from_mask(dims, vec![false; dims.len()]).expect("mask length matches")
    }

    #[inline]
    pub fn dims(&self) -> GridDims {
        self.dims
    }

    #[inline]
    pub fn is_missing(&self, x: usize, y: usize) -> bool {
        self.mask[self.dims.index(x, y)]
    }

    /// Row-major loss mask.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Lost positions in lexicographic `(x, y)` order.
    pub fn missing(&self) -> BTreeSet<Position> {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| self.dims.position(i))
            .collect()
    }

    pub fn missing_count(&self) -> usize {
        self.per_row_counts.iter().sum()
    }

    pub fn per_row_counts(&self) -> &[usize] {
        &self.per_row_counts
    }

    pub fn per_col_counts(&self) -> &[usize] {
        &self.per_col_counts
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Serialize, Deserialize)]
struct PatternJson {
    n: usize,
    t: usize,
    missing: Vec<[usize; 2]>,
}

impl Serialize for ErasurePattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PatternJson {
            n: self.dims.n,
            t: self.dims.t,
            missing: self.missing().into_iter().map(|(x, y)| [x, y]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ErasurePattern {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PatternJson::deserialize(deserializer)?;
        let dims = GridDims::new(raw.n, raw.t).map_err(D::Error::custom)?;
        ErasurePattern::from_positions(dims, raw.missing.into_iter().map(|[x, y]| (x, y)))
            .map_err(D::Error::custom)
    }
}

/// `M_max` and `M_min`: extreme per-row loss counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErasureStats {
    pub m_max: usize,
    pub m_min: usize,
}

pub(crate) fn check_probability(theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(theta))
    }
}

pub fn sample_erasure(dims: GridDims, theta: f64, seed: u64) -> Result<ErasurePattern> {
    check_probability(theta)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mask = (0..dims.len())
        .map(|_| rng.random::<f64>() < theta)
        .collect();
    ErasurePattern::from_mask(dims, mask)
}

pub fn erasure_stats(pattern: &ErasurePattern) -> ErasureStats {
    let counts = pattern.per_row_counts();
    ErasureStats {
        m_max: counts.iter().copied().max().unwrap_or(0),
        m_min: counts.iter().copied().min().unwrap_or(0),
    }
}

/// The receiver's view: `transform` with the positions in `pattern` removed.
pub fn apply_erasure(
    transform: &Signal2D,
    pattern: &ErasurePattern,
    kind: TransformKind,
) -> Result<RecoveryProblem> {
    if transform.dims() != pattern.dims() {
        return Err(Error::DimensionMismatch {
            left: transform.dims().to_string(),
            right: pattern.dims().to_string(),
        });
    }
    let observed: Vec<Option<Complex64>> = transform
        .values()
        .iter()
        .zip(pattern.mask())
        .map(|(&v, &lost)| (!lost).then_some(v))
        .collect();
    RecoveryProblem::new(kind, observed, pattern.clone())
}
