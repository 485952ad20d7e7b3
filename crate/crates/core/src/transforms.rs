//! Unitary discrete Fourier transforms on `Z_N x Z_T`.
//!
//! Forward transforms use `exp(-2 pi i ...)`, inverses `exp(+2 pi i ...)`, and
//! every 1D transform of length `L` carries the factor `L^{-1/2}`, so all
//! transforms here are unitary. The column-wise Gabor transform is normalised
//! by `T^{-1/2}` (its sum runs over `Z_T`).
//!
//! The fast path goes through `rustfft`; [`naive`] keeps the direct
//! `O(L^2)` summation available as a reference.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::parallel;
use crate::signal::{GridDims, Signal2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    #[inline]
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        }
    }
}

/// Which transform of the signal was transmitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformKind {
    /// The 2D DFT `f^`.
    Fourier2d,
    /// The row-wise Gabor transform `Gf`.
    GaborRow,
    /// The column-wise Gabor transform `G~f`.
    GaborColumn,
}

impl TransformKind {
    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Fourier2d => "fourier2d",
            TransformKind::GaborRow => "gabor-row",
            TransformKind::GaborColumn => "gabor-col",
        }
    }

    pub fn forward(self, signal: &Signal2D) -> Signal2D {
        match self {
            TransformKind::Fourier2d => dft2(signal),
            TransformKind::GaborRow => gabor_row(signal),
            TransformKind::GaborColumn => gabor_col(signal),
        }
    }

    pub fn inverse(self, transform: &Signal2D) -> Signal2D {
        match self {
            TransformKind::Fourier2d => idft2(transform),
            TransformKind::GaborRow => gabor_row_inverse(transform),
            TransformKind::GaborColumn => gabor_col_inverse(transform),
        }
    }
}

impl std::str::FromStr for TransformKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fourier2d" | "dft2" => Ok(TransformKind::Fourier2d),
            "gabor-row" => Ok(TransformKind::GaborRow),
            "gabor-col" | "gabor-column" => Ok(TransformKind::GaborColumn),
            other => Err(format!("unknown transform kind {other:?}")),
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: Direction) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match direction {
            Direction::Forward => p.plan_fft_forward(len),
            Direction::Inverse => p.plan_fft_inverse(len),
        }
    })
}

/// Unitary 1D DFT of `data` in place.
pub fn dft1_in_place(data: &mut [Complex64], direction: Direction) {
    let len = data.len();
    if len <= 1 {
        return;
    }
    plan(len, direction).process(data);
    let scale = 1.0 / (len as f64).sqrt();
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Transforms each consecutive `chunk`-long block of `data` independently.
fn dft1_chunks(data: &mut [Complex64], chunk: usize, direction: Direction) {
    if chunk <= 1 {
        return;
    }
    parallel::for_each_chunk_mut(data, chunk, |block| dft1_in_place(block, direction));
}

fn transpose(values: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(values.len());
    for c in 0..cols {
        out.extend((0..rows).map(|r| values[r * cols + c]));
    }
    out
}

fn along_rows(signal: &Signal2D, direction: Direction) -> Signal2D {
    let dims = signal.dims();
    let mut values = signal.values().to_vec();
    dft1_chunks(&mut values, dims.n, direction);
    rebuild(dims, values)
}

fn along_columns(signal: &Signal2D, direction: Direction) -> Signal2D {
    let dims = signal.dims();
    let mut columns = transpose(signal.values(), dims.t, dims.n);
    dft1_chunks(&mut columns, dims.t, direction);
    rebuild(dims, transpose(&columns, dims.n, dims.t))
}

fn rebuild(dims: GridDims, values: Vec<Complex64>) -> Signal2D {
    Signal2D::new(dims, values).expect("unitary transform of a finite signal is finite")
}

/// The 2D DFT `f^(m, n) = (NT)^{-1/2} sum_x sum_y f(x, y) exp(-2 pi i (xm/N + yn/T))`.
pub fn dft2(signal: &Signal2D) -> Signal2D {
    along_columns(&along_rows(signal, Direction::Forward), Direction::Forward)
}

pub fn idft2(freq: &Signal2D) -> Signal2D {
    along_columns(&along_rows(freq, Direction::Inverse), Direction::Inverse)
}

/// Row-wise Gabor transform: the unitary `N`-point DFT of every row.
pub fn gabor_row(signal: &Signal2D) -> Signal2D {
    along_rows(signal, Direction::Forward)
}

pub fn gabor_row_inverse(transform: &Signal2D) -> Signal2D {
    along_rows(transform, Direction::Inverse)
}

/// Column-wise Gabor transform: the unitary `T`-point DFT of every column.
pub fn gabor_col(signal: &Signal2D) -> Signal2D {
    along_columns(signal, Direction::Forward)
}

pub fn gabor_col_inverse(transform: &Signal2D) -> Signal2D {
    along_columns(transform, Direction::Inverse)
}

/// `exp(sign * 2 pi i * k / len)` with `k` reduced mod `len` first.
#[inline]
pub(crate) fn root_of_unity(k: usize, len: usize, direction: Direction) -> Complex64 {
    let angle = direction.sign() * 2.0 * PI * ((k % len) as f64) / len as f64;
    Complex64::from_polar(1.0, angle)
}

/// Direct-summation reference transforms.
pub mod naive {
    use super::*;

    /// Unitary 1D DFT by direct summation.
    pub fn dft1(input: &[Complex64], direction: Direction) -> Vec<Complex64> {
        let len = input.len();
        let scale = 1.0 / (len as f64).sqrt();
        (0..len)
            .map(|k| {
                input
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| v * root_of_unity(j * k, len, direction))
                    .sum::<Complex64>()
                    * scale
            })
            .collect()
    }

    /// Entry `(row, col)` of the unitary DFT matrix of size `len`.
    #[inline]
    pub fn matrix_entry(row: usize, col: usize, len: usize, direction: Direction) -> Complex64 {
        root_of_unity(row * col, len, direction) / (len as f64).sqrt()
    }

    pub fn gabor_row(signal: &Signal2D) -> Signal2D {
        let dims = signal.dims();
        let values = (0..dims.t)
            .flat_map(|y| dft1(signal.row(y), Direction::Forward))
            .collect();
        rebuild(dims, values)
    }

    pub fn gabor_col(signal: &Signal2D) -> Signal2D {
        let dims = signal.dims();
        let cols: Vec<Vec<Complex64>> = (0..dims.n)
            .map(|x| dft1(&signal.column(x), Direction::Forward))
            .collect();
        Signal2D::from_fn(dims, |x, y| cols[x][y]).expect("finite")
    }

    pub fn dft2(signal: &Signal2D) -> Signal2D {
        gabor_col(&gabor_row(signal))
    }
}
