//! Grid-indexed complex signals on `Z_N x Z_T` and their support statistics.
//!
//! A signal is stored row-major by the row index `y in Z_T`: entry `(x, y)`
//! lives at `y * n + x`. Every support query takes an explicit modulus
//! threshold; entries with `|v| <= tol` count as zero.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A grid position `(x, y)` with `x in Z_N` (position inside a row) and `y in Z_T` (row).
pub type Position = (usize, usize);

/// Relative threshold used by [`Signal2D::default_tol`].
pub const DEFAULT_RELATIVE_TOL: f64 = 1e-9;

/// Shape of the grid `Z_N x Z_T`: `n` is the row length, `t` the number of rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDims")]
pub struct GridDims {
    pub n: usize,
    pub t: usize,
}

#[derive(Deserialize)]
struct RawDims {
    n: usize,
    t: usize,
}

impl TryFrom<RawDims> for GridDims {
    type Error = Error;

    fn try_from(raw: RawDims) -> Result<Self> {
        GridDims::new(raw.n, raw.t)
    }
}

impl GridDims {
    pub fn new(n: usize, t: usize) -> Result<Self> {
        if n == 0 || t == 0 {
            return Err(Error::InvalidDims { n, t });
        }
        Ok(GridDims { n, t })
    }

    #[inline]
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.n * self.t
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.n && y < self.t);
        y * self.n + x
    }

    #[inline]
    pub fn position(&self, index: usize) -> Position {
        (index % self.n, index / self.n)
    }
}

impl std::fmt::Display for GridDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.n, self.t)
    }
}

/// A finite complex-valued function on `Z_N x Z_T`.
///
/// Transforms of a signal (`f^`, `Gf`, `G~f`) use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal2D {
    dims: GridDims,
    values: Vec<Complex64>,
}

impl Signal2D {
    pub fn new(dims: GridDims, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                actual: values.len(),
            });
        }
        if let Some(i) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite(i));
        }
        Ok(Signal2D { dims, values })
    }

    pub fn zeros(dims: GridDims) -> Self {
        Signal2D {
            dims,
            values: vec![Complex64::new(0.0, 0.0); dims.len()],
        }
    }

    /// Builds a signal from `f(x, y)` evaluated at every grid position.
    pub fn from_fn(dims: GridDims, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let values = (0..dims.len())
            .map(|i| {
                let (x, y) = dims.position(i);
                f(x, y)
            })
            .collect();
        Signal2D::new(dims, values)
    }

    /// Single unit spike of height `value` at `(x, y)`.
    pub fn delta(dims: GridDims, x: usize, y: usize, value: Complex64) -> Self {
        let mut s = Signal2D::zeros(dims);
        s.values[dims.index(x, y)] = value;
        s
    }

    #[inline]
    pub fn dims(&self) -> GridDims {
        self.dims
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.values[self.dims.index(x, y)]
    }

    /// Row `y` as a slice of length `n`.
    pub fn row(&self, y: usize) -> &[Complex64] {
        let n = self.dims.n;
        &self.values[y * n..(y + 1) * n]
    }

    /// Column `x` copied out as a vector of length `t`.
    pub fn column(&self, x: usize) -> Vec<Complex64> {
        (0..self.dims.t).map(|y| self.get(x, y)).collect()
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// The library default support threshold: `1e-9` times the largest modulus.
    pub fn default_tol(&self) -> f64 {
        DEFAULT_RELATIVE_TOL * self.max_modulus()
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Signal2D) -> Result<f64> {
        self.check_same_dims(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `||self - other||_2 / ||other||_2`, or the absolute error when `other` is zero.
    pub fn relative_error(&self, truth: &Signal2D) -> Result<f64> {
        self.check_same_dims(truth)?;
        let diff: f64 = self
            .values
            .iter()
            .zip(&truth.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale = truth.norm_l2();
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }

    pub(crate) fn check_same_dims(&self, other: &Signal2D) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                left: self.dims.to_string(),
                right: other.dims.to_string(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Serialize, Deserialize)]
struct SignalJson {
    n: usize,
    t: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for Signal2D {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SignalJson {
            n: self.dims.n,
            t: self.dims.t,
            re: self.values.iter().map(|v| v.re).collect(),
            im: self.values.iter().map(|v| v.im).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Signal2D {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SignalJson::deserialize(deserializer)?;
        if raw.re.len() != raw.im.len() {
            return Err(D::Error::custom(format!(
                "re has {} entries but im has {}",
                raw.re.len(),
                raw.im.len()
            )));
        }
        let dims = GridDims::new(raw.n, raw.t).map_err(D::Error::custom)?;
        let values = raw
            .re
            .into_iter()
            .zip(raw.im)
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        Signal2D::new(dims, values).map_err(D::Error::custom)
    }
}

/// Per-row support sizes of a signal together with `E_max` and `|E|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportProfile {
    pub row_supports: Vec<usize>,
    pub e_max: usize,
    pub total_support: usize,
}

impl SupportProfile {
    pub fn from_row_supports(row_supports: Vec<usize>) -> Self {
        let e_max = row_supports.iter().copied().max().unwrap_or(0);
        let total_support = row_supports.iter().sum();
        SupportProfile {
            row_supports,
            e_max,
            total_support,
        }
    }
}

fn check_tol(tol: f64) {
    assert!(
        tol >= 0.0 && !tol.is_nan(),
        "support threshold must be >= 0, got {tol}"
    );
}

/// Positions `(x, y)` with `|f(x, y)| > tol`.
pub fn support(signal: &Signal2D, tol: f64) -> BTreeSet<Position> {
    check_tol(tol);
    signal
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > tol)
        .map(|(i, _)| signal.dims.position(i))
        .collect()
}

/// Number of entries of `values` with modulus above `tol`.
pub fn count_above(values: &[Complex64], tol: f64) -> usize {
    values.iter().filter(|v| v.norm() > tol).count()
}

pub fn support_profile(signal: &Signal2D, tol: f64) -> SupportProfile {
    check_tol(tol);
    let rows = (0..signal.dims.t)
        .map(|y| count_above(signal.row(y), tol))
        .collect();
    SupportProfile::from_row_supports(rows)
}

/// `S_max`: the largest per-column support of a column-wise Gabor transform.
pub fn column_support_max(transform_values: &Signal2D, tol: f64) -> usize {
    check_tol(tol);
    (0..transform_values.dims.n)
        .map(|x| count_above(&transform_values.column(x), tol))
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn dims(n: usize, t: usize) -> GridDims {
        GridDims::new(n, t).unwrap()
    }

    #[test]
    fn rejects_degenerate_dims() {
        assert!(GridDims::new(0, 3).is_err());
        assert!(GridDims::new(3, 0).is_err());
        assert!(GridDims::new(1, 1).is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        let d = dims(2, 2);
        assert!(matches!(
            Signal2D::new(d, vec![c(1.0); 3]),
            Err(Error::LengthMismatch {
                expected: 4,
                actual: 3
            })
        ));
        let mut v = vec![c(0.0); 4];
        v[2] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(Signal2D::new(d, v), Err(Error::NonFinite(2))));
    }

    #[test]
    fn support_examples() {
        let d = dims(4, 3);
        assert!(support(&Signal2D::zeros(d), 0.0).is_empty());

        let delta = Signal2D::delta(d, 0, 0, c(1.0));
        assert_eq!(support(&delta, 0.0), BTreeSet::from([(0, 0)]));

        let mut s = Signal2D::zeros(d);
        s.values[d.index(1, 1)] = c(1e-12);
        s.values[d.index(2, 2)] = c(1.0);
        assert_eq!(support(&s, 1e-9), BTreeSet::from([(2, 2)]));
    }

    #[test]
    fn profile_examples() {
        let d = dims(4, 3);
        let p = support_profile(&Signal2D::delta(d, 0, 0, c(1.0)), 0.0);
        assert_eq!(p.row_supports, vec![1, 0, 0]);
        assert_eq!((p.e_max, p.total_support), (1, 1));

        let ones = Signal2D::new(d, vec![c(1.0); 12]).unwrap();
        let p = support_profile(&ones, 0.0);
        assert_eq!(p.row_supports, vec![4, 4, 4]);
        assert_eq!((p.e_max, p.total_support), (4, 12));
    }

    #[test]
    fn column_support_examples() {
        let d = dims(4, 3);
        assert_eq!(column_support_max(&Signal2D::zeros(d), 0.0), 0);
        let s = Signal2D::from_fn(d, |x, _| if x == 2 { c(1.0) } else { c(0.0) }).unwrap();
        assert_eq!(column_support_max(&s, 0.0), 3);
    }

    #[test]
    fn json_layout_is_row_major() {
        let d = dims(2, 2);
        let s =
            Signal2D::from_fn(d, |x, y| Complex64::new((10 * y + x) as f64, -(x as f64))).unwrap();
        let json = s.to_json().unwrap();
        assert_eq!(
            json,
            r#"{"n":2,"t":2,"re":[0.0,1.0,10.0,11.0],"im":[-0.0,-1.0,-0.0,-1.0]}"#
        );
        assert_eq!(Signal2D::from_json(&json).unwrap(), s);
    }

    #[test]
    fn json_rejects_inconsistent_payloads() {
        assert!(Signal2D::from_json(r#"{"n":2,"t":1,"re":[1.0,2.0],"im":[0.0]}"#).is_err());
        assert!(Signal2D::from_json(r#"{"n":0,"t":1,"re":[],"im":[]}"#).is_err());
        assert!(Signal2D::from_json(r#"{"n":2,"t":2,"re":[1.0,2.0],"im":[0.0,0.0]}"#).is_err());
    }

    #[test]
    fn degenerate_grids_work() {
        let d = dims(1, 5);
        let s = Signal2D::from_fn(d, |_, y| c(y as f64)).unwrap();
        let p = support_profile(&s, 0.0);
        assert_eq!(p.row_supports, vec![0, 1, 1, 1, 1]);
        assert_eq!(column_support_max(&s, 0.0), 4);
    }
}
